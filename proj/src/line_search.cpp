#include "sesop/line_search.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace sesop {

namespace {

std::string format_point(const Vector& t) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < t.size(); ++i) os << (i ? ", " : "") << t[i];
  os << "]";
  return os.str();
}

double checked_eval(const SmoothConvexProblem& prob, const Vector& t, Vector& grad) {
  const double f = prob.eval(t, grad);
  if (!std::isfinite(f))
    throw LineSearchError("line search: non-finite value at " + format_point(t), t);
  if (!grad.allFinite())
    throw LineSearchError("line search: non-finite gradient at " + format_point(t), t);
  return f;
}

// Value-based acceptance stalls once predicted improvements drop below the
// rounding error of the value itself, which leaves the gradient near
// sqrt(eps * curvature) rather than the ~eps attainable from the gradient
// directly. Refine the stationary point with damped Newton steps on the
// gradient, using a central-difference Hessian and accepting only strict
// gradient-norm decreases; on any breakdown the input point is kept.
void polish_stationary_point(const SmoothConvexProblem& problem, const LineSearchConfig& config,
                             LineSearchResult& best) {
  const Eigen::Index n = problem.dimension;
  try {
    Vector t = best.t;
    Vector g(n);
    checked_eval(problem, t, g);
    double gn = g.norm();
    const double fd_scale = std::cbrt(std::numeric_limits<double>::epsilon());
    for (int round = 0; round < 4 && gn > config.grad_tol; ++round) {
      Eigen::MatrixXd H(n, n);
      Vector probe = t, g_plus(n), g_minus(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double dj = fd_scale * (1.0 + std::abs(t[j]));
        probe[j] = t[j] + dj;
        checked_eval(problem, probe, g_plus);
        probe[j] = t[j] - dj;
        checked_eval(problem, probe, g_minus);
        probe[j] = t[j];
        H.col(j) = (g_plus - g_minus) / (2.0 * dj);
      }
      const Eigen::MatrixXd sym = 0.5 * (H + H.transpose());
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(sym);
      if (ldlt.info() != Eigen::Success) break;
      Vector delta = ldlt.solve(-g);
      if (!delta.allFinite()) break;
      bool improved = false;
      for (int halve = 0; halve < 8 && !improved; ++halve) {
        const Vector t_try = t + delta;
        Vector g_try(n);
        checked_eval(problem, t_try, g_try);
        if (g_try.norm() < gn) {
          t = t_try;
          g = g_try;
          gn = g.norm();
          improved = true;
        }
        delta *= 0.5;
      }
      if (!improved) break;
    }
    if (gn < best.grad_norm) {
      best.value = checked_eval(problem, t, g);
      best.t = std::move(t);
      best.grad_norm = gn;
    }
  } catch (const LineSearchError&) {
    // keep the unpolished point
  }
}

}  // namespace

LineSearchResult minimize(const SmoothConvexProblem& problem, const LineSearchConfig& config) {
  if (!problem.eval) throw std::invalid_argument("minimize: problem has no evaluator");
  if (problem.dimension < 0) throw std::invalid_argument("minimize: negative dimension");
  if (!(config.grad_tol > 0.0)) throw std::invalid_argument("minimize: grad_tol must be > 0");
  if (config.max_iter < 1) throw std::invalid_argument("minimize: max_iter must be >= 1");

  const Eigen::Index n = problem.dimension;
  Vector t = config.initial_point.size() ? config.initial_point : Vector::Zero(n);
  if (t.size() != n) throw std::invalid_argument("minimize: initial point has wrong dimension");

  Vector g(n);
  double f = checked_eval(problem, t, g);

  LineSearchResult best{t, f, g.norm(), 0};
  if (n == 0) return best;

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  constexpr double c1 = 1e-4;
  int it = 0;
  for (; it < config.max_iter; ++it) {
    const double gn = g.norm();
    if (gn <= config.grad_tol) break;

    Vector p = -(H * g);
    double gp = g.dot(p);
    if (!(gp < 0.0)) {  // curvature model broke down, restart from steepest descent
      H.setIdentity();
      p = -g;
      gp = -gn * gn;
    }

    double step = it == 0 ? 1.0 / std::max(1.0, gn) : 1.0;
    Vector t_new(n), g_new(n);
    double f_new = f;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      t_new = t + step * p;
      f_new = checked_eval(problem, t_new, g_new);
      if (f_new <= f + c1 * step * gp) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      if (H.isIdentity(0.0)) break;  // flat along the gradient, numerically done
      H.setIdentity();
      continue;
    }

    const Vector s = t_new - t;
    const Vector yv = g_new - g;
    t.swap(t_new);
    f = f_new;
    g.swap(g_new);
    if (f < best.value) best = LineSearchResult{t, f, g.norm(), it + 1};

    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Vector Hy = H * yv;
      const double yHy = yv.dot(Hy);
      H.noalias() -= rho * (s * Hy.transpose() + Hy * s.transpose());
      H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
    }
  }
  best.iterations = it;
  if (best.grad_norm > config.grad_tol) polish_stationary_point(problem, config, best);
  return best;
}

namespace {

// One pass computes the dual norm of v and the vector u with
// J(v) = c * u, sharing the pow() work between value and gradient.
struct DualEval {
  double norm = 0.0;   // ||v||_ps
  double scale = 0.0;  // c in J(v) = c * u
  Vector u;

  DualEval(const Vector& v, double ps, double q) {
    u.resize(v.size());
    if (ps == 2.0) {
      norm = v.norm();
      u = v;
      scale = norm == 0.0 ? 0.0 : (q == 2.0 ? 1.0 : std::pow(norm, q - 2.0));
      return;
    }
    const double amax = v.cwiseAbs().maxCoeff();
    if (amax == 0.0) {
      u.setZero();
      return;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double a = std::abs(v[i]) / amax;
      const double w = std::pow(a, ps - 1.0);
      u[i] = v[i] < 0.0 ? -w : w;
      acc += w * a;
    }
    norm = amax * std::pow(acc, 1.0 / ps);
    scale = std::pow(norm, q - 1.0) * std::pow(amax / norm, ps - 1.0);
  }
};

Eigen::MatrixXd pack_directions(const std::vector<DualVector>& dirs, Eigen::Index dim) {
  Eigen::MatrixXd W(dim, static_cast<Eigen::Index>(dirs.size()));
  for (size_t k = 0; k < dirs.size(); ++k) {
    if (dirs[k].dim() != dim)
      throw std::invalid_argument("objective: direction dimension mismatch");
    W.col(static_cast<Eigen::Index>(k)) = dirs[k].values();
  }
  return W;
}

}  // namespace

SmoothConvexProblem sesop_objective(const DualVector& dual_iterate,
                                    const std::vector<DualVector>& directions,
                                    const Vector& offsets, const LpSpec& space_x) {
  validate(space_x);
  if (directions.empty()) throw std::invalid_argument("sesop_objective: no directions");
  if (offsets.size() != static_cast<Eigen::Index>(directions.size()))
    throw std::invalid_argument("sesop_objective: offsets/directions size mismatch");
  if (!compatible(dual_iterate.space(), space_x.dual()))
    throw std::invalid_argument("sesop_objective: iterate not in the dual of space_x");

  const double ps = conjugate_exponent(space_x.p);
  const double q = conjugate_exponent(space_x.power);
  const Eigen::Index k = static_cast<Eigen::Index>(directions.size());

  struct State {
    Vector base;
    Eigen::MatrixXd W;
    Vector beta;
    double ps, q;
  };
  auto st = std::make_shared<State>(State{dual_iterate.values(),
                                          pack_directions(directions, dual_iterate.dim()),
                                          offsets, ps, q});

  return SmoothConvexProblem{
      k, [st](const Vector& t, Vector& grad) {
        const Vector v = st->base - st->W * t;
        const DualEval e(v, st->ps, st->q);
        grad = st->beta - e.scale * (st->W.transpose() * e.u);
        return std::pow(e.norm, st->q) / st->q + st->beta.dot(t);
      }};
}

SmoothConvexProblem orthogonalization_objective(const DualVector& d,
                                                const std::vector<DualVector>& old_directions,
                                                const LpSpec& space_x) {
  validate(space_x);
  if (!compatible(d.space(), space_x.dual()))
    throw std::invalid_argument("orthogonalization_objective: d not in the dual of space_x");

  const double ps = conjugate_exponent(space_x.p);
  const double q = conjugate_exponent(space_x.power);
  const Eigen::Index k = static_cast<Eigen::Index>(old_directions.size());

  struct State {
    Vector base;
    Eigen::MatrixXd W;
    double ps, q;
  };
  auto st = std::make_shared<State>(
      State{d.values(), pack_directions(old_directions, d.dim()), ps, q});

  return SmoothConvexProblem{
      k, [st](const Vector& s, Vector& grad) {
        const Vector v = st->base - st->W * s;
        const DualEval e(v, st->ps, st->q);
        grad = (-st->q * e.scale) * (st->W.transpose() * e.u);
        return std::pow(e.norm, st->q);
      }};
}

}  // namespace sesop
