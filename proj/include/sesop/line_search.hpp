#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "sesop/lp_space.hpp"

namespace sesop {

/// Differentiable convex function of a small coefficient vector. eval returns
/// the value and fills grad (resized by the caller to dimension).
struct SmoothConvexProblem {
  Eigen::Index dimension = 0;
  std::function<double(const Vector& t, Vector& grad)> eval;
};

struct LineSearchConfig {
  double grad_tol = 1e-10;
  int max_iter = 20;
  Vector initial_point;  // empty means the origin
};

struct LineSearchResult {
  Vector t;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Raised when an objective evaluates to a non-finite value or gradient;
/// carries the offending point.
class LineSearchError : public std::runtime_error {
 public:
  LineSearchError(const std::string& msg, Vector point)
      : std::runtime_error(msg), point_(std::move(point)) {}
  const Vector& point() const { return point_; }

 private:
  Vector point_;
};

/// Quasi-Newton (BFGS) descent with Armijo backtracking (c1 = 1e-4, step
/// halving), steepest-descent restart on non-positive curvature. If the
/// gradient tolerance is still unmet when value-based acceptance stalls, the
/// stationary point is refined by damped Newton steps on the gradient
/// (finite-difference Hessian, accepted only on strict gradient-norm
/// decrease). Returns the best visited point.
LineSearchResult minimize(const SmoothConvexProblem& problem, const LineSearchConfig& config);

/// h(t) = (1/q) || J(x_n) - sum_k t_k w_k ||^q  + sum_k t_k beta_k
/// over the dual of space_x, q the conjugate of space_x.power. Its gradient is
///   dh/dt_j = -< w_j, J_dual(J(x_n) - sum_k t_k w_k) > + beta_j,
/// so a vanishing gradient is exactly the hyperplane-projection optimality of
/// the iteration step.
SmoothConvexProblem sesop_objective(const DualVector& dual_iterate,
                                    const std::vector<DualVector>& directions,
                                    const Vector& offsets, const LpSpec& space_x);

/// g(s) = || d - sum_i s_i w_i ||^q over the dual of space_x; minimizing s
/// realizes the metric projection of d onto the span of the stored directions.
SmoothConvexProblem orthogonalization_objective(const DualVector& d,
                                                const std::vector<DualVector>& old_directions,
                                                const LpSpec& space_x);

}  // namespace sesop
