#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sesop/line_search.hpp"
#include "sesop/linear_operator.hpp"
#include "sesop/lp_space.hpp"
#include "sesop/search_space.hpp"

namespace sesop {

enum class StopReason { residual_met, discrepancy_met, max_iter_reached, exact_zero_residual };
enum class TolKind { absolute, relative };
enum class SeedRule { heuristic, xu_roach };

const char* to_string(StopReason reason);
const char* to_string(SpaceMode mode);

struct SolverConfig {
  LpSpec space_x;                 // solution space (n, p, power)
  double r = 2.0;                 // data space is l^r with gauge exponent r
  SpaceMode mode = SpaceMode::metric;
  int capacity = 1;               // number of retained directions N
  int max_iter = 1000;
  TolKind tol_kind = TolKind::relative;
  double residual_tol = 1e-4;
  std::optional<double> noise_delta;      // relative noise level of y
  std::optional<double> discrepancy_tau;  // stop at tau * delta; requires noise_delta
  SeedRule seed_rule = SeedRule::heuristic;
  double seed_gamma = 0.95;               // safety factor of the smoothness-based seed
  LineSearchConfig line_search;           // initial_point is overwritten per iteration
  std::optional<double> operator_norm;    // skip the power-iteration estimate if known
};

/// Telemetry of one iteration; residual fields describe the iterate BEFORE
/// the step taken at this n. Reference-based fields are absent without a
/// supplied reference.
struct IterationRecord {
  int n = 0;
  double residual = 0.0;
  double relative_residual = 0.0;
  std::optional<double> bregman_to_reference;
  std::optional<double> error_norm;
  double wall_ms = 0.0;
};

struct SolveResult {
  PrimalVector x_final;
  std::vector<IterationRecord> records;
  StopReason stop_reason = StopReason::max_iter_reached;
};

struct LandweberDirection {
  DualVector direction;  // A^T J_r(A x - y), lives in the dual of the solution space
  DualVector precursor;  // J_r(A x - y), lives in the dual of the data space
  double residual_norm = 0.0;
};

LandweberDirection landweber_direction(const LinearOperator& A, const PrimalVector& x,
                                       const PrimalVector& y);

/// Variant that reuses an already computed residual A x - y.
LandweberDirection landweber_from_residual(const LinearOperator& A, const PrimalVector& residual,
                                           const LpSpec& space_x);

/// Initial coefficient for the newest direction: nu = tau ||x||^(power-1)/||w||.
/// heuristic takes tau = 1; xu_roach solves rho(tau)/tau = min(rho(1),
/// gamma 2^-q G^-1 R^r / (||x|| ||w||)) by bisection on (0, 1] with rho the
/// modulus-of-smoothness bound of the dual space. At x = 0 falls back to the
/// residual-scaled seed max(R^(r-1)/A_norm^2, 1).
double step_width_seed(const PrimalVector& x, const DualVector& w_new, double residual_norm,
                       double r, double a_norm, SeedRule rule, double gamma);

/// max over stored precursors of |<w*, rho>| / (||w*|| ||rho||); measures how
/// well the current residual is annihilated by the last coefficient solve.
double assert_residual_orthogonality(const SearchSpaceState& state, const PrimalVector& residual);

/// Observation hooks for invariant checks; both optional.
struct SolveCallbacks {
  /// Current residual against the stored directions, just before the new push.
  /// Fires only for steps that actually execute (n >= 1, after the stopping
  /// rules have passed), so a run's final residual is never reported here.
  std::function<void(int n, const SearchSpaceState&, const PrimalVector& residual)> before_push;
  /// After the iterate update of step n, with the coefficients just applied.
  std::function<void(int n, const SearchSpaceState&, const PrimalVector& x_next, const Vector& t)>
      after_update;
};

/// Runs the subspace-optimized dual iteration x_{n+1} = J*(J(x_n) - sum t_k w_k)
/// from x_0 = 0 until a stopping rule fires. Line-search or search-space
/// failures are rethrown with the iteration index attached.
SolveResult solve(const LinearOperator& A, const PrimalVector& y, const SolverConfig& config,
                  const std::optional<PrimalVector>& reference = std::nullopt,
                  const SolveCallbacks* callbacks = nullptr);

}  // namespace sesop
