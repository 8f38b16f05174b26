#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sesop/linear_operator.hpp"
#include "sesop/lp_space.hpp"
#include "sesop/solver.hpp"

namespace sesop {

/// Consistent random instance: A and y* uniform in [-1,1], the reference
/// solution J*(A^T y*) normalized to unit norm, data y = A x_true. By
/// construction J(x_true) is a positive multiple of A^T y*, so x_true is the
/// minimum-norm solution.
struct ToyProblem {
  DenseOperator A;
  PrimalVector x_true;
  PrimalVector y;
};

ToyProblem make_toy_problem(std::uint64_t seed, int m, int n, const LpSpec& space_x,
                            double r = 2.0);

/// Conjugate gradients on the normal equation of the second kind
/// (A A* lambda = y, iterates x = A* lambda) with the Polak-Ribiere update
/// computed from the data-space residuals and exact line search. Returns the
/// iterate list x_1, x_2, ... Matches the l^2 metric-orthogonalized solver
/// with one retained direction step for step.
std::vector<Vector> cg_normal_polak_ribiere(const LinearOperator& A, const Vector& y,
                                            const Vector& x0, double tol, int max_iter);

struct GridCellConfig {
  double p = 2.0;
  int capacity = 1;
  SpaceMode mode = SpaceMode::metric;
};

struct GridConfig {
  int m = 100;
  int n = 500;
  double r = 2.0;
  std::optional<double> power;  // per-cell default: max(p, 2)
  std::vector<double> ps{2.0};
  std::vector<int> capacities{1};
  std::vector<SpaceMode> modes{SpaceMode::metric};
  std::vector<std::uint64_t> seeds{420};
  TolKind tol_kind = TolKind::relative;
  double residual_tol = 1e-4;
  int max_iter = 20000;
  SeedRule seed_rule = SeedRule::heuristic;
  LineSearchConfig line_search;
  /// Optional per-run sink (history export etc.). Invoked once per finished
  /// run, possibly from worker threads; calls for distinct runs never share a
  /// (cell, seed) key.
  std::function<void(const GridCellConfig&, std::uint64_t seed, const SolveResult&)> on_run;
};

/// Aggregate over the seeds of one (p, N, mode) cell. Runs that hit the
/// iteration cap count as failures and are excluded from the means.
struct GridStats {
  double p = 0.0;
  int capacity = 0;
  SpaceMode mode = SpaceMode::metric;
  int seed_count = 0;
  double mean_iters = 0.0;
  double std_iters = 0.0;
  double mean_ms = 0.0;
  int failures = 0;
};

/// Runs every (p, N, mode) x seed combination; independent runs may execute
/// on a small thread pool, aggregation order is deterministic.
std::vector<GridStats> run_grid(const GridConfig& config);

/// Header "p,N,mode,seed_count,mean_iters,std_iters,mean_ms,failures" plus one
/// row per cell, locale-independent formatting.
std::string grid_csv(const std::vector<GridStats>& stats);

/// History table of one run: header
/// "iter,residual,relative_residual,bregman,error_norm,wall_ms"; optional
/// fields stay empty. Byte-identical for identical runs.
std::string history_csv(const std::vector<IterationRecord>& records);

}  // namespace sesop
