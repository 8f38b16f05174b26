#include "sesop/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sesop/smoothness.hpp"

namespace sesop {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::residual_met: return "residual_met";
    case StopReason::discrepancy_met: return "discrepancy_met";
    case StopReason::max_iter_reached: return "max_iter";
    case StopReason::exact_zero_residual: return "exact_zero_residual";
  }
  return "unknown";
}

const char* to_string(SpaceMode mode) {
  switch (mode) {
    case SpaceMode::unorthogonalized: return "unorth";
    case SpaceMode::metric: return "metric";
    case SpaceMode::expanding: return "expanding";
  }
  return "unknown";
}

LandweberDirection landweber_from_residual(const LinearOperator& A, const PrimalVector& residual,
                                           const LpSpec& space_x) {
  validate(space_x);
  if (residual.dim() != A.rows())
    throw std::invalid_argument("landweber_direction: residual dimension mismatch");
  DualVector precursor = duality_map(residual);
  DualVector direction(A.adjoint_apply(precursor.values()), space_x.dual());
  return LandweberDirection{std::move(direction), std::move(precursor), residual.norm()};
}

LandweberDirection landweber_direction(const LinearOperator& A, const PrimalVector& x,
                                       const PrimalVector& y) {
  if (x.dim() != A.cols() || y.dim() != A.rows())
    throw std::invalid_argument("landweber_direction: dimension mismatch");
  PrimalVector residual(A.apply(x.values()) - y.values(), y.space());
  return landweber_from_residual(A, residual, x.space());
}

double step_width_seed(const PrimalVector& x, const DualVector& w_new, double residual_norm,
                       double r, double a_norm, SeedRule rule, double gamma) {
  const double wn = w_new.norm();
  if (!(wn > 0.0)) throw std::invalid_argument("step_width_seed: zero direction");
  if (!(r > 1.0)) throw std::invalid_argument("step_width_seed: requires r > 1");

  const double xn = x.norm();
  if (xn == 0.0) {
    if (!(a_norm > 0.0)) return 1.0;
    return std::max(std::pow(residual_norm, r - 1.0) / (a_norm * a_norm), 1.0);
  }

  double tau = 1.0;
  if (rule == SeedRule::xu_roach) {
    const double ps = conjugate_exponent(x.space().p);        // dual norm exponent
    const double q = conjugate_exponent(x.space().power);     // dual gauge exponent
    const double G = xu_roach_constants(x.space().power).G;
    const double target =
        std::min(modulus_smoothness_bound(1.0, ps),
                 gamma / (std::pow(2.0, q) * G) * std::pow(residual_norm, r) / (xn * wn));
    auto phi = [ps](double t) { return modulus_smoothness_bound(t, ps) / t; };
    if (phi(1.0) <= target) {
      tau = 1.0;
    } else {
      double lo = 0.0, hi = 1.0;  // phi is increasing and continuous with phi(0+) = 0
      for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < target ? lo : hi) = mid;
      }
      tau = 0.5 * (lo + hi);
    }
  }
  return tau * std::pow(xn, x.space().power - 1.0) / wn;
}

double assert_residual_orthogonality(const SearchSpaceState& state, const PrimalVector& residual) {
  const double rn = residual.norm();
  double worst = 0.0;
  for (int j = 0; j < state.count(); ++j) {
    const double scale = state.precursors[j].norm() * rn;
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(pairing(state.precursors[j], residual)) / scale);
  }
  return worst;
}

namespace {

void validate_config(const LinearOperator& A, const PrimalVector& y, const SolverConfig& cfg) {
  validate(cfg.space_x);
  if (!(cfg.r > 1.0)) throw std::invalid_argument("solve: requires r > 1");
  if (cfg.space_x.dim != A.cols()) throw std::invalid_argument("solve: space/operator mismatch");
  if (y.dim() != A.rows()) throw std::invalid_argument("solve: data dimension mismatch");
  if (std::abs(y.space().p - cfg.r) > 1e-12)
    throw std::invalid_argument("solve: data vector norm exponent differs from config r");
  if (cfg.mode != SpaceMode::expanding && cfg.capacity < 1)
    throw std::invalid_argument("solve: capacity must be >= 1");
  if (cfg.max_iter < 0) throw std::invalid_argument("solve: max_iter must be >= 0");
  if (!(cfg.residual_tol >= 0.0)) throw std::invalid_argument("solve: negative residual_tol");
  if (cfg.discrepancy_tau && !cfg.noise_delta)
    throw std::invalid_argument("solve: discrepancy stopping requires the noise level");
  if (cfg.noise_delta && !(*cfg.noise_delta >= 0.0))
    throw std::invalid_argument("solve: negative noise level");
  if (cfg.discrepancy_tau && !(*cfg.discrepancy_tau > 0.0))
    throw std::invalid_argument("solve: discrepancy factor must be > 0");
}

[[noreturn]] void rethrow_with_iteration(int n) {
  try {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "iteration " << n << ": " << e.what();
    throw std::runtime_error(os.str());
  }
}

}  // namespace

SolveResult solve(const LinearOperator& A, const PrimalVector& y, const SolverConfig& config,
                  const std::optional<PrimalVector>& reference, const SolveCallbacks* callbacks) {
  validate_config(A, y, config);
  if (reference && !compatible(reference->space(), config.space_x))
    throw std::invalid_argument("solve: reference lives in a different space");

  const LpSpec space_y{A.rows(), config.r, config.r};
  const double q = conjugate_exponent(config.space_x.power);
  const double ps = conjugate_exponent(config.space_x.p);
  const double y_norm = y.norm();
  const double a_norm =
      config.operator_norm ? *config.operator_norm : norm_estimate(A).value;

  PrimalVector x(Vector::Zero(A.cols()), config.space_x);
  Vector dual_iterate = Vector::Zero(A.cols());  // J(x_n), updated in closed form
  SearchSpaceState state = make_search_space(config.space_x, config.mode, config.capacity);

  SolveResult result;
  Vector t_prev;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  for (int n = 0;; ++n) {
    PrimalVector residual(A.apply(x.values()) - y.values(), space_y);
    const double rn = residual.norm();
    const double rel = y_norm > 0.0 ? rn / y_norm : rn;

    IterationRecord rec;
    rec.n = n;
    rec.residual = rn;
    rec.relative_residual = rel;
    if (reference) {
      rec.bregman_to_reference = bregman_distance(x, *reference);
      rec.error_norm = lp_norm(x.values() - reference->values(), config.space_x.p);
    }
    rec.wall_ms = elapsed_ms();
    result.records.push_back(rec);

    if (rn == 0.0) {
      result.stop_reason = StopReason::exact_zero_residual;
      break;
    }
    if (config.discrepancy_tau && rel <= *config.discrepancy_tau * *config.noise_delta) {
      result.stop_reason = StopReason::discrepancy_met;
      break;
    }
    if (config.tol_kind == TolKind::absolute ? rn <= config.residual_tol
                                             : rel <= config.residual_tol) {
      result.stop_reason = StopReason::residual_met;
      break;
    }
    if (n >= config.max_iter) {
      result.stop_reason = StopReason::max_iter_reached;
      break;
    }

    if (callbacks && callbacks->before_push && n >= 1 && state.count() > 0)
      callbacks->before_push(n, state, residual);

    try {
      LandweberDirection ld = landweber_from_residual(A, residual, config.space_x);
      const double offset = pairing(ld.precursor, y);

      const int count_before = state.count();
      if (config.mode == SpaceMode::metric) {
        push_orthogonalized(state, ld.direction, ld.precursor, offset, config.line_search);
      } else {
        push_unorthogonalized(state, std::move(ld.direction), std::move(ld.precursor), offset);
      }

      const double nu = step_width_seed(x, state.directions.back(), rn, config.r, a_norm,
                                        config.seed_rule, config.seed_gamma);
      const int k = state.count();
      Vector warm = Vector::Zero(k);
      if (config.mode != SpaceMode::unorthogonalized && t_prev.size() > 0) {
        // reuse the previous coefficients, shifted by one slot on eviction
        const int shift = state.count() == count_before ? 1 : 0;
        for (int i = 0; i + shift < static_cast<int>(t_prev.size()); ++i)
          warm[i] = t_prev[i + shift];
      }
      warm[k - 1] = nu;

      DualVector jx(dual_iterate, config.space_x.dual());
      SmoothConvexProblem h = sesop_objective(
          jx, state.directions, Eigen::Map<const Vector>(state.offsets.data(), k),
          config.space_x);
      LineSearchConfig ls = config.line_search;
      ls.initial_point = warm;
      // The gradient at t = 0 is the vector of residual pairings with the
      // stored directions, the natural magnitude of this subproblem. Late in a
      // run it decays like the squared residual; keeping the configured
      // tolerance absolute there would accept coefficients whose relative
      // defect grows without bound, so tighten it proportionally (never
      // loosen).
      {
        Vector g0(k);
        h.eval(Vector::Zero(k), g0);
        const double scale = g0.norm();
        if (scale < 1.0)
          ls.grad_tol = std::max(config.line_search.grad_tol * scale,
                                 std::numeric_limits<double>::min());
      }
      LineSearchResult sol = minimize(h, ls);

      // never accept a step that fails to descend below h(0); colder starts
      // recover from a misscaled warm start
      const double h_at_zero = std::pow(lp_norm(dual_iterate, ps), q) / q;
      if (sol.value >= h_at_zero) {
        Vector cold = Vector::Zero(k);
        cold[k - 1] = nu;
        ls.initial_point = cold;
        LineSearchResult retry = minimize(h, ls);
        if (retry.value < sol.value) sol = retry;
        if (sol.value >= h_at_zero) {
          ls.initial_point = Vector::Zero(k);
          retry = minimize(h, ls);
          if (retry.value < sol.value) sol = retry;
        }
      }

      for (int i = 0; i < k; ++i) dual_iterate -= sol.t[i] * state.directions[i].values();
      x = duality_map(DualVector(dual_iterate, config.space_x.dual()));
      t_prev = sol.t;

      if (callbacks && callbacks->after_update) callbacks->after_update(n, state, x, sol.t);
    } catch (...) {
      rethrow_with_iteration(n);
    }
  }

  result.x_final = x;
  return result;
}

}  // namespace sesop
