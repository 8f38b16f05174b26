#include "sesop/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sesop/rng.hpp"

namespace sesop {

ToyProblem make_toy_problem(std::uint64_t seed, int m, int n, const LpSpec& space_x, double r) {
  validate(space_x);
  if (m < 1 || n < 1) throw std::invalid_argument("make_toy_problem: bad shape");
  if (space_x.dim != n) throw std::invalid_argument("make_toy_problem: space dim != n");
  if (!(r > 1.0)) throw std::invalid_argument("make_toy_problem: requires r > 1");

  Xoshiro256pp rng(seed);
  DenseOperator::Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.uniform_symmetric();
  Vector ystar(m);
  for (Eigen::Index i = 0; i < m; ++i) ystar[i] = rng.uniform_symmetric();

  DenseOperator A(std::move(a));
  DualVector u(A.adjoint_apply(ystar), space_x.dual());
  PrimalVector xt = duality_map(u);
  const double nrm = xt.norm();
  if (nrm == 0.0) throw std::runtime_error("make_toy_problem: degenerate draw, A^T y* = 0");
  PrimalVector x_true(xt.values() / nrm, space_x);
  PrimalVector y(A.apply(x_true.values()), LpSpec{m, r, r});
  return ToyProblem{std::move(A), std::move(x_true), std::move(y)};
}

std::vector<Vector> cg_normal_polak_ribiere(const LinearOperator& A, const Vector& y,
                                            const Vector& x0, double tol, int max_iter) {
  if (y.size() != A.rows() || x0.size() != A.cols())
    throw std::invalid_argument("cg_normal_polak_ribiere: dimension mismatch");
  if (max_iter < 0) throw std::invalid_argument("cg_normal_polak_ribiere: negative max_iter");

  std::vector<Vector> iterates;
  Vector x = x0;
  Vector r = y - A.apply(x);
  Vector p = A.adjoint_apply(r);
  Vector ap(A.rows());
  for (int it = 0; it < max_iter; ++it) {
    const double rr = r.squaredNorm();
    if (std::sqrt(rr) <= tol) break;
    const double pp = p.squaredNorm();
    if (pp == 0.0) break;  // residual orthogonal to the range, stalled
    const double alpha = rr / pp;
    x += alpha * p;
    A.apply(p, ap);
    const Vector r_next = r - alpha * ap;
    const double beta = r_next.dot(r_next - r) / rr;  // Polak-Ribiere form
    p = A.adjoint_apply(r_next) + beta * p;
    r = r_next;
    iterates.push_back(x);
  }
  return iterates;
}

namespace {

struct RunOutcome {
  bool failed = false;
  double iterations = 0.0;
  double wall_ms = 0.0;
};

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace

std::vector<GridStats> run_grid(const GridConfig& config) {
  if (config.ps.empty() || config.capacities.empty() || config.modes.empty() ||
      config.seeds.empty())
    throw std::invalid_argument("run_grid: empty grid axis");

  struct Job {
    size_t cell;
    std::uint64_t seed;
    GridCellConfig cc;
  };
  std::vector<Job> jobs;
  std::vector<GridStats> stats;
  for (double p : config.ps)
    for (int cap : config.capacities)
      for (SpaceMode mode : config.modes) {
        const size_t cell = stats.size();
        stats.push_back(GridStats{p, cap, mode, static_cast<int>(config.seeds.size()), 0, 0, 0, 0});
        for (std::uint64_t seed : config.seeds) jobs.push_back(Job{cell, seed, {p, cap, mode}});
      }

  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const LpSpec space{config.n, job.cc.p,
                         config.power ? *config.power : std::max(job.cc.p, 2.0)};
      ToyProblem prob = make_toy_problem(job.seed, config.m, config.n, space, config.r);

      SolverConfig sc;
      sc.space_x = space;
      sc.r = config.r;
      sc.mode = job.cc.mode;
      sc.capacity = job.cc.capacity;
      sc.max_iter = config.max_iter;
      sc.tol_kind = config.tol_kind;
      sc.residual_tol = config.residual_tol;
      sc.seed_rule = config.seed_rule;
      sc.line_search = config.line_search;

      const SolveResult res = solve(prob.A, prob.y, sc, prob.x_true);
      RunOutcome out;
      out.failed = res.stop_reason == StopReason::max_iter_reached;
      out.iterations = res.records.back().n;
      out.wall_ms = res.records.back().wall_ms;
      outcomes[i] = out;
      if (config.on_run) config.on_run(job.cc, job.seed, res);
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t nthreads = std::min<size_t>(hw, jobs.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<std::vector<double>> iters(stats.size());
  std::vector<std::vector<double>> walls(stats.size());
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].failed) {
      ++stats[jobs[i].cell].failures;
    } else {
      iters[jobs[i].cell].push_back(outcomes[i].iterations);
      walls[jobs[i].cell].push_back(outcomes[i].wall_ms);
    }
  }
  for (size_t c = 0; c < stats.size(); ++c) {
    const auto& xs = iters[c];
    if (xs.empty()) continue;
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= xs.size();
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= xs.size();
    double wall = 0.0;
    for (double v : walls[c]) wall += v;
    stats[c].mean_iters = mean;
    stats[c].std_iters = std::sqrt(var);
    stats[c].mean_ms = wall / xs.size();
  }
  return stats;
}

std::string grid_csv(const std::vector<GridStats>& stats) {
  std::ostringstream os;
  os << "p,N,mode,seed_count,mean_iters,std_iters,mean_ms,failures\n";
  for (const auto& s : stats)
    os << format_real(s.p) << "," << s.capacity << "," << to_string(s.mode) << ","
       << s.seed_count << "," << format_real(s.mean_iters) << "," << format_real(s.std_iters)
       << "," << format_real(s.mean_ms) << "," << s.failures << "\n";
  return os.str();
}

std::string history_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream os;
  os << "iter,residual,relative_residual,bregman,error_norm,wall_ms\n";
  for (const auto& rec : records) {
    os << rec.n << "," << format_real(rec.residual) << "," << format_real(rec.relative_residual)
       << ",";
    if (rec.bregman_to_reference) os << format_real(*rec.bregman_to_reference);
    os << ",";
    if (rec.error_norm) os << format_real(*rec.error_norm);
    os << "," << format_real(rec.wall_ms) << "\n";
  }
  return os.str();
}

}  // namespace sesop
