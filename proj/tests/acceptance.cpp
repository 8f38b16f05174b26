// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single [PASS]/[FAIL] line with the measured quantity and its
// pinned threshold. The process exit code is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sesop/harness.hpp"
#include "sesop/linear_operator.hpp"
#include "sesop/lp_space.hpp"
#include "sesop/search_space.hpp"
#include "sesop/solver.hpp"
#include "sesop/tomo.hpp"
#include "test_support.hpp"

using namespace sesop;
using test_support::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Shared {
  // carried from the instrumented run of check 3 into check 4
  std::optional<double> max_semi;
  std::optional<double> max_resid_orth;
  int orth_steps = 0;
  // carried from the sweep of check 7 into check 8
  std::optional<long> bregman_violations;
  long bregman_pairs = 0;
  // tomography fixtures reused by checks 9-12
  std::optional<SparseOperator> radon;
  std::optional<Vector> phantom;
  std::optional<Vector> sinogram;
  const RadonGeometry geometry{41, 61, 60};

  const SparseOperator& ct_matrix() {
    if (!radon) radon = build_radon_matrix(geometry);
    return *radon;
  }
  const Vector& ct_phantom() {
    if (!phantom) phantom = shepp_logan(geometry.pixels);
    return *phantom;
  }
  const Vector& ct_sinogram() {
    if (!sinogram) sinogram = ct_matrix().apply(ct_phantom());
    return *sinogram;
  }
};

Shared shared;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// --- 1: duality maps ------------------------------------------------------

Outcome check_duality_maps() {
  Rng rng(1001);
  const double ps[] = {1.1, 1.5, 2.0, 3.0, 10.0};
  double worst_round = 0.0, worst_pairing = 0.0;
  for (double p : ps) {
    for (double power : {2.0, p}) {
      const LpSpec space{100, p, power};
      for (int rep = 0; rep < 100; ++rep) {
        Vector v = rng.vector(100);
        v *= std::exp(rng.uniform(-5.0, 5.0));
        const PrimalVector x(v, space);
        const DualVector jx = duality_map(x);
        const PrimalVector back = duality_map(jx);
        worst_round = std::max(worst_round, (back.values() - v).norm() / v.norm());
        const double pairing = jx.values().dot(v);
        const double target = std::pow(x.norm(), space.power);
        worst_pairing = std::max(worst_pairing, std::abs(pairing - target) / target);
      }
    }
  }
  const bool pass = worst_round <= 1e-10 && worst_pairing <= 1e-12;
  return {pass, "round-trip " + fmt(worst_round) + " <= 1e-10, pairing " + fmt(worst_pairing) +
                    " <= 1e-12"};
}

// --- 2: analytic gradients vs finite differences ---------------------------

Outcome check_gradients() {
  Rng rng(1002);
  double worst = 0.0;
  for (double p : {1.5, 3.0}) {
    for (double power : {2.0, p}) {
      const LpSpec space{40, p, power};
      const LpSpec dual = space.dual();
      std::vector<DualVector> dirs;
      for (int j = 0; j < 3; ++j) dirs.emplace_back(rng.vector(40), dual);
      const DualVector jx(rng.vector(40), dual);
      const Vector beta = rng.vector(3);
      const SmoothConvexProblem h = sesop_objective(jx, dirs, beta, space);

      const DualVector d(rng.vector(40), dual);
      const std::vector<DualVector> old{dirs[0], dirs[1]};
      const SmoothConvexProblem g = orthogonalization_objective(d, old, space);

      for (int rep = 0; rep < 20; ++rep) {
        const Vector t3 = rng.vector(3, -0.5, 0.5);
        Vector grad(3);
        h.eval(t3, grad);
        const Vector fd = test_support::numeric_gradient(h, t3);
        worst = std::max(worst, (grad - fd).norm() / std::max(fd.norm(), grad.norm()));

        const Vector s2 = rng.vector(2, -0.5, 0.5);
        Vector grad2(2);
        g.eval(s2, grad2);
        const Vector fd2 = test_support::numeric_gradient(g, s2);
        worst = std::max(worst, (grad2 - fd2).norm() / std::max(fd2.norm(), grad2.norm()));
      }
    }
  }
  return {worst <= 1e-5, "max rel. deviation " + fmt(worst) + " <= 1e-5 over 320 points"};
}

// --- 3 & 4: orthogonality invariants along a run ----------------------------

void run_instrumented_orthogonality() {
  const LpSpec space{500, 1.5, 2.0};
  const ToyProblem prob = make_toy_problem(2024, 100, 500, space);

  SolverConfig sc;
  sc.space_x = space;
  sc.mode = SpaceMode::metric;
  sc.capacity = 4;
  sc.max_iter = 50;
  sc.tol_kind = TolKind::relative;
  // Stop above the residual's own representability floor. Each computed
  // residual carries absolute rounding ~eps * ||A|| * ||x||, so once
  // ||rho|| shrinks toward that level, pairings with it measure arithmetic
  // noise rather than the update rule; at 1e-8 the measured defect still has
  // two orders of headroom under the pinned bound.
  sc.residual_tol = 1e-8;
  sc.line_search.grad_tol = 1e-10;
  sc.line_search.max_iter = 100;

  double max_semi = 0.0, max_resid = 0.0;
  int steps = 0;
  SolveCallbacks cb;
  cb.after_update = [&](int, const SearchSpaceState& state, const PrimalVector&, const Vector&) {
    max_semi = std::max(max_semi, verify_semi_orthogonality(state));
    ++steps;
  };
  cb.before_push = [&](int, const SearchSpaceState& state, const PrimalVector& residual) {
    max_resid = std::max(max_resid, assert_residual_orthogonality(state, residual));
  };
  solve(prob.A, prob.y, sc, prob.x_true, &cb);
  shared.max_semi = max_semi;
  shared.max_resid_orth = max_resid;
  shared.orth_steps = steps;
}

Outcome check_semi_orthogonality() {
  if (!shared.max_semi) run_instrumented_orthogonality();
  const double v = *shared.max_semi;
  return {v <= 1e-6, "max scaled pairing of stored direction pairs " + fmt(v) + " <= 1e-6 over " +
                         std::to_string(shared.orth_steps) + " steps"};
}

Outcome check_residual_orthogonality() {
  if (!shared.max_resid_orth) run_instrumented_orthogonality();
  const double v = *shared.max_resid_orth;
  return {v <= 1e-6, "max scaled residual pairing " + fmt(v) + " <= 1e-6 over " +
                         std::to_string(shared.orth_steps) + " steps"};
}

// --- 5: agreement with conjugate gradients ----------------------------------

Outcome check_cg_equivalence() {
  const LpSpec space{200, 2.0, 2.0};
  const ToyProblem prob = make_toy_problem(5050, 50, 200, space);

  SolverConfig sc;
  sc.space_x = space;
  sc.mode = SpaceMode::metric;
  sc.capacity = 1;
  sc.max_iter = 50;
  sc.residual_tol = 0.0;
  sc.line_search.grad_tol = 1e-12;
  sc.line_search.max_iter = 100;

  std::vector<Vector> mine;
  SolveCallbacks cb;
  cb.after_update = [&](int, const SearchSpaceState&, const PrimalVector& x, const Vector&) {
    mine.push_back(x.values());
  };
  solve(prob.A, prob.y, sc, std::nullopt, &cb);

  const std::vector<Vector> oracle =
      cg_normal_polak_ribiere(prob.A, prob.y.values(), Vector::Zero(200), 0.0, 50);
  const size_t n = std::min(mine.size(), oracle.size());
  if (n < 50) return {false, "only " + std::to_string(n) + " comparable iterates"};
  double worst = 0.0;
  for (size_t i = 0; i < n; ++i)
    worst = std::max(worst, (mine[i] - oracle[i]).norm() / oracle[i].norm());
  return {worst <= 1e-6, "max per-iterate rel. deviation " + fmt(worst) + " <= 1e-6 over " +
                             std::to_string(n) + " iterates"};
}

// --- 6: extra retained directions are inert in the Hilbert case -------------

Outcome check_memory_inert_l2() {
  // Same system as the conjugate-gradient comparison above.
  const LpSpec space{200, 2.0, 2.0};
  const ToyProblem prob = make_toy_problem(5050, 50, 200, space);

  auto iterates = [&](int capacity) {
    SolverConfig sc;
    sc.space_x = space;
    sc.mode = SpaceMode::metric;
    sc.capacity = capacity;
    sc.max_iter = 40;
    sc.residual_tol = 0.0;
    sc.line_search.grad_tol = 1e-12;
    sc.line_search.max_iter = 100;
    std::vector<Vector> xs;
    SolveCallbacks cb;
    cb.after_update = [&](int, const SearchSpaceState&, const PrimalVector& x, const Vector&) {
      xs.push_back(x.values());
    };
    solve(prob.A, prob.y, sc, std::nullopt, &cb);
    return xs;
  };

  const std::vector<Vector> one = iterates(1);
  const std::vector<Vector> four = iterates(4);
  if (one.size() != four.size())
    return {false, "iterate counts differ: " + std::to_string(one.size()) + " vs " +
                       std::to_string(four.size())};
  double worst = 0.0;
  for (size_t i = 0; i < one.size(); ++i)
    worst = std::max(worst, (one[i] - four[i]).norm() / one[i].norm());
  return {worst <= 1e-8,
          "max rel. gap between capacity 1 and 4 " + fmt(worst) + " <= 1e-8"};
}

// --- 7 & 8: iteration-count sweep and descent bookkeeping --------------------

Outcome check_speedup_sweep() {
  GridConfig g;
  g.m = 100;
  g.n = 500;
  g.ps = {1.2, 1.5, 2.0, 3.0};
  g.capacities = {1};
  g.modes = {SpaceMode::metric, SpaceMode::unorthogonalized};
  g.seeds = {420, 421, 422, 423, 424, 425, 426, 427, 428, 429};
  g.residual_tol = 1e-4;
  g.max_iter = 20000;
  g.line_search.grad_tol = 1e-10;
  g.line_search.max_iter = 20;

  long violations = 0, pairs = 0;
  g.on_run = [&](const GridCellConfig&, std::uint64_t, const SolveResult& res) {
    for (size_t i = 1; i < res.records.size(); ++i) {
      ++pairs;
      const double prev = *res.records[i - 1].bregman_to_reference;
      const double cur = *res.records[i].bregman_to_reference;
      if (!(cur < prev)) ++violations;
    }
  };

  const std::vector<GridStats> stats = run_grid(g);
  shared.bregman_violations = violations;
  shared.bregman_pairs = pairs;

  bool pass = true;
  std::string detail;
  for (size_t i = 0; i < g.ps.size(); ++i) {
    const GridStats& metric = stats[2 * i];
    const GridStats& unorth = stats[2 * i + 1];
    if (metric.failures > 0 || unorth.failures > 0) pass = false;
    if (!(metric.mean_iters <= 0.5 * unorth.mean_iters)) pass = false;
    if (!detail.empty()) detail += ", ";
    detail += "p=" + fmt(g.ps[i]) + ": " + fmt(metric.mean_iters) + " vs " +
              fmt(unorth.mean_iters);
  }
  return {pass, "mean iterations (projected vs plain, need <= half): " + detail};
}

Outcome check_bregman_descent() {
  if (!shared.bregman_violations) return {false, "sweep unavailable"};
  const long v = *shared.bregman_violations;
  return {v == 0, std::to_string(v) + " non-decreasing steps in " +
                      std::to_string(shared.bregman_pairs) + " consecutive pairs"};
}

// --- 9-11: tomography contrasts ---------------------------------------------

SolverConfig ct_config(double p, SpaceMode mode, int capacity, int max_iter) {
  SolverConfig sc;
  sc.space_x = LpSpec{shared.geometry.cols(), p, std::max(p, 2.0)};
  sc.r = 2.0;
  sc.mode = mode;
  sc.capacity = capacity;
  sc.max_iter = max_iter;
  sc.tol_kind = TolKind::absolute;
  sc.residual_tol = 1e-2;
  sc.line_search.grad_tol = 1e-8;
  sc.line_search.max_iter = 20;
  return sc;
}

Outcome check_ct_exact_contrast() {
  const SparseOperator& A = shared.ct_matrix();
  const PrimalVector y(shared.ct_sinogram(), LpSpec{shared.geometry.rows(), 2.0, 2.0});
  const PrimalVector ref(shared.ct_phantom(), LpSpec{shared.geometry.cols(), 2.0, 2.0});

  const SolveResult fast = solve(A, y, ct_config(2.0, SpaceMode::metric, 1, 500), ref);
  const SolveResult slow =
      solve(A, y, ct_config(2.0, SpaceMode::unorthogonalized, 2, 500), ref);

  const int fast_n = fast.records.back().n;
  const bool fast_ok = fast.stop_reason == StopReason::residual_met && fast_n <= 100;
  const bool slow_ok = slow.stop_reason == StopReason::max_iter_reached;
  return {fast_ok && slow_ok,
          "projected capacity 1 stops at " + std::to_string(fast_n) +
              " (<= 100); plain capacity 2 at cap 500 with residual " +
              fmt(slow.records.back().residual) + " (> 1e-2)"};
}

Outcome check_ct_discrepancy_stop() {
  const SparseOperator& A = shared.ct_matrix();
  const Vector noisy = add_noise(shared.ct_sinogram(), 0.01, 420);
  const PrimalVector y(noisy, LpSpec{shared.geometry.rows(), 2.0, 2.0});
  const PrimalVector ref(shared.ct_phantom(), LpSpec{shared.geometry.cols(), 2.0, 2.0});

  SolverConfig sc = ct_config(2.0, SpaceMode::metric, 1, 500);
  sc.tol_kind = TolKind::relative;
  sc.residual_tol = 1e-4;
  sc.noise_delta = 0.01;
  sc.discrepancy_tau = 3.0;

  const SolveResult res = solve(A, y, sc, ref);
  const auto& last = res.records.back();
  const bool pass = res.stop_reason == StopReason::discrepancy_met && last.n < 500 &&
                    last.relative_residual <= 0.03 && last.error_norm &&
                    std::isfinite(*last.error_norm);
  return {pass, "stopped at n=" + std::to_string(last.n) + " with relative residual " +
                    fmt(last.relative_residual) + " <= 0.03, reconstruction error " +
                    fmt(last.error_norm ? *last.error_norm : -1.0)};
}

Outcome check_ct_small_p() {
  const SparseOperator& A = shared.ct_matrix();
  const PrimalVector y(shared.ct_sinogram(), LpSpec{shared.geometry.rows(), 2.0, 2.0});

  bool pass = true;
  std::string detail;
  for (double p : {1.1, 1.2, 1.5}) {
    const int cap = 2500;
    const SolveResult metric = solve(A, y, ct_config(p, SpaceMode::metric, 1, cap));
    const SolveResult unorth = solve(A, y, ct_config(p, SpaceMode::unorthogonalized, 1, cap));
    const int mn = metric.records.back().n;
    const int un = unorth.records.back().n;
    const bool metric_done = metric.stop_reason == StopReason::residual_met;
    const bool unorth_done = unorth.stop_reason == StopReason::residual_met;

    bool ok;
    if (!metric_done) {
      ok = false;  // projected variant must reach the tolerance
    } else if (!unorth_done) {
      ok = mn * 2 <= cap;  // plain variant dominated by the cap
    } else {
      ok = 2 * mn <= un;
    }
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += "p=" + fmt(p) + ": " + std::to_string(mn) + (metric_done ? "" : "(cap)") +
              " vs " + std::to_string(un) + (unorth_done ? "" : "(cap)") +
              (ok ? "" : " [ratio < 2]");
  }
  return {pass, "iterations to ||Ax-y|| <= 1e-2 (projected vs plain, need <= half): " + detail};
}

// --- 12: discrete projection geometry ----------------------------------------

double chord_length(double theta, double shift) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double ox = 0.5 + shift * c, oy = 0.5 + shift * s;
  const double dx = -s, dy = c;
  double lo = 1e300, hi = -1e300;
  int hits = 0;
  const double eps = 1e-12;
  if (std::abs(dx) > 0.0) {
    for (double edge : {0.0, 1.0}) {
      const double tau = (edge - ox) / dx;
      const double yy = oy + tau * dy;
      if (yy >= -eps && yy <= 1.0 + eps) {
        lo = std::min(lo, tau), hi = std::max(hi, tau);
        ++hits;
      }
    }
  }
  if (std::abs(dy) > 0.0) {
    for (double edge : {0.0, 1.0}) {
      const double tau = (edge - oy) / dy;
      const double xx = ox + tau * dx;
      if (xx >= -eps && xx <= 1.0 + eps) {
        lo = std::min(lo, tau), hi = std::max(hi, tau);
        ++hits;
      }
    }
  }
  return hits >= 2 ? hi - lo : 0.0;
}

Outcome check_radon_geometry() {
  const SparseOperator& A = shared.ct_matrix();
  const RadonGeometry& g = shared.geometry;
  const double pi = 3.14159265358979323846;
  const double half_diag = std::sqrt(2.0) / 2.0;

  double worst = 0.0;
  Eigen::Index row = 0;
  for (int ai = 0; ai < g.angles; ++ai) {
    const double theta = ai * pi / g.angles;
    for (int si = 0; si < g.shifts; ++si, ++row) {
      const double shift = -half_diag + (si + 0.5) * (2.0 * half_diag / g.shifts);
      double sum = 0.0;
      for (Eigen::Index k = A.row_offsets()[row]; k < A.row_offsets()[row + 1]; ++k)
        sum += A.values()[k];
      worst = std::max(worst, std::abs(sum - chord_length(theta, shift)));
    }
  }

  Rng rng(1012);
  const Vector x = rng.vector(A.cols());
  const Vector u = rng.vector(A.rows());
  const double lhs = u.dot(A.apply(x));
  const double rhs = A.adjoint_apply(u).dot(x);
  const double adj = std::abs(lhs - rhs) / std::abs(lhs);

  const bool pass = worst <= 1e-10 && adj <= 1e-12;
  return {pass, "max |row sum - chord| " + fmt(worst) + " <= 1e-10, adjoint pairing rel. " +
                    fmt(adj) + " <= 1e-12"};
}

// -----------------------------------------------------------------------------

struct Check {
  int id;
  const char* title;
  std::function<Outcome()> run;
  double budget_s;  // 0 = piggybacks on an earlier check
};

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {1, "duality maps: round trip and defining pairing", check_duality_maps, 1.0},
      {2, "objective gradients match finite differences", check_gradients, 5.0},
      {3, "stored directions stay semi-orthogonal", check_semi_orthogonality, 30.0},
      {4, "residual annihilates the stored directions", check_residual_orthogonality, 0.0},
      {5, "Hilbert-case iterates match conjugate gradients", check_cg_equivalence, 5.0},
      {6, "extra retained directions are inert in the Hilbert case", check_memory_inert_l2,
       10.0},
      {7, "projection halves mean iteration counts on random problems", check_speedup_sweep,
       300.0},
      {8, "reference distance decreases strictly in every sweep run", check_bregman_descent,
       0.0},
      {9, "tomography, exact data: fast stop vs stalled plain variant",
       check_ct_exact_contrast, 120.0},
      {10, "tomography, noisy data: discrepancy rule stops early", check_ct_discrepancy_stop,
       180.0},
      {11, "tomography, sparsity-promoting exponents: projection halves iterations",
       check_ct_small_p, 600.0},
      {12, "projection matrix: row sums equal chord lengths, exact adjoint",
       check_radon_geometry, 30.0},
  };

  int failures = 0;
  for (const auto& check : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = check.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = out.pass;
    std::string note = out.detail;
    if (pass && check.budget_s > 0.0 && secs > check.budget_s) {
      pass = false;
      note += " [exceeded " + fmt(check.budget_s) + " s budget]";
    }
    if (!pass) ++failures;
    std::printf("[%s] %02d %s — %s (%.1f s)\n", pass ? "PASS" : "FAIL", check.id, check.title,
                note.c_str(), secs);
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of 12 checks failed\n", failures);
  return failures;
}
