// Command-line front end: toy-problem grid sweeps, tomographic
// reconstructions, and single solves from matrix/vector files. Artifacts are
// CSV histories plus PGM/CSV images; exit codes: 0 success, 1 numerical
// failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesop/harness.hpp"
#include "sesop/linear_operator.hpp"
#include "sesop/lp_space.hpp"
#include "sesop/solver.hpp"
#include "sesop/tomo.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

sesop::SpaceMode parse_mode(const std::string& name) {
  if (name == "unorth") return sesop::SpaceMode::unorthogonalized;
  if (name == "metric") return sesop::SpaceMode::metric;
  if (name == "expanding") return sesop::SpaceMode::expanding;
  throw UsageError("unknown mode '" + name + "' (expected unorth, metric or expanding)");
}

sesop::SeedRule parse_seed_rule(const std::string& name) {
  if (name == "heuristic") return sesop::SeedRule::heuristic;
  if (name == "xu-roach") return sesop::SeedRule::xu_roach;
  throw UsageError("unknown seed rule '" + name + "' (expected heuristic or xu-roach)");
}

std::string format_p(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

// Solver flags shared by the subcommands; list-valued fields are only
// meaningful for `toy`.
struct SolverFlags {
  std::vector<double> ps{2.0};
  std::optional<double> power;
  double r = 2.0;
  std::vector<int> capacities{1};
  std::vector<std::string> modes{"metric"};
  int max_iter = 0;  // per-subcommand default applied in add_solver_flags
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  double noise = 0.0;
  std::optional<double> discrepancy;
  std::string seed_rule = "heuristic";
  double seed_gamma = 0.95;
  std::optional<double> op_norm;
  int ls_max_iter = 20;
  std::string out = ".";
};

void add_solver_flags(CLI::App& cmd, SolverFlags& f, bool lists, int default_max_iter) {
  f.max_iter = default_max_iter;
  if (lists) {
    cmd.add_option("--p", f.ps, "norm exponent(s) of the solution space, each > 1")
        ->delimiter(',');
    cmd.add_option("--N", f.capacities, "retained search directions, >= 1")->delimiter(',');
    cmd.add_option("--mode", f.modes, "search-space mode(s): unorth, metric, expanding")
        ->delimiter(',');
  } else {
    f.ps.resize(1);
    f.capacities.resize(1);
    f.modes.resize(1);
    cmd.add_option("--p", f.ps[0], "norm exponent of the solution space, > 1");
    cmd.add_option("--N", f.capacities[0], "retained search directions, >= 1");
    cmd.add_option("--mode", f.modes[0], "search-space mode: unorth, metric, expanding");
  }
  cmd.add_option("--power", f.power, "gauge exponent of the duality maps (default max(p, 2))");
  cmd.add_option("--r", f.r, "norm and gauge exponent of the data space");
  cmd.add_option("--max-iter", f.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  auto* abs = cmd.add_option("--abs-tol", f.abs_tol, "stop when ||Ax-y|| <= this");
  auto* rel = cmd.add_option("--rel-tol", f.rel_tol,
                             "stop when ||Ax-y||/||y|| <= this (default 1e-4)");
  abs->excludes(rel);
  rel->excludes(abs);
  cmd.add_option("--seed-rule", f.seed_rule,
                 "initial step-width rule: heuristic or xu-roach");
  cmd.add_option("--seed-gamma", f.seed_gamma, "safety factor of the xu-roach rule");
  cmd.add_option("--op-norm", f.op_norm, "known operator norm (skips the power iteration)");
  cmd.add_option("--ls-max-iter", f.ls_max_iter, "inner line-search iteration cap")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", f.out, "output directory (created if missing)");
}

void apply_common(const SolverFlags& f, sesop::SolverConfig& sc) {
  sc.r = f.r;
  sc.max_iter = f.max_iter;
  if (f.abs_tol) {
    sc.tol_kind = sesop::TolKind::absolute;
    sc.residual_tol = *f.abs_tol;
  } else {
    sc.tol_kind = sesop::TolKind::relative;
    sc.residual_tol = f.rel_tol ? *f.rel_tol : 1e-4;
  }
  if (f.noise > 0.0) sc.noise_delta = f.noise;
  if (f.discrepancy) {
    if (!(f.noise > 0.0)) throw UsageError("--discrepancy requires --noise > 0");
    sc.discrepancy_tau = *f.discrepancy;
  }
  sc.seed_rule = parse_seed_rule(f.seed_rule);
  sc.seed_gamma = f.seed_gamma;
  sc.operator_norm = f.op_norm;
  sc.line_search.max_iter = f.ls_max_iter;
}

std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("failed to write " + path.string());
}

void print_summary(const sesop::SolveResult& res) {
  const auto& last = res.records.back();
  std::cout << "stop=" << sesop::to_string(res.stop_reason) << " iters=" << last.n
            << " residual=" << last.residual << " relative=" << last.relative_residual << "\n";
}

// --- toy ---------------------------------------------------------------

struct ToyFlags {
  SolverFlags solver;
  int m = 100;
  int n = 500;
  std::vector<std::uint64_t> seeds{420, 421, 422, 423, 424, 425, 426, 427, 428, 429};
};

int cmd_toy(const ToyFlags& f) {
  const auto dir = prepare_out_dir(f.solver.out);

  sesop::GridConfig gc;
  gc.m = f.m;
  gc.n = f.n;
  gc.r = f.solver.r;
  gc.power = f.solver.power;
  gc.ps = f.solver.ps;
  gc.capacities = f.solver.capacities;
  gc.modes.clear();
  for (const auto& name : f.solver.modes) gc.modes.push_back(parse_mode(name));
  gc.seeds = f.seeds;
  if (f.solver.abs_tol) {
    gc.tol_kind = sesop::TolKind::absolute;
    gc.residual_tol = *f.solver.abs_tol;
  } else if (f.solver.rel_tol) {
    gc.residual_tol = *f.solver.rel_tol;
  }
  gc.max_iter = f.solver.max_iter;
  gc.seed_rule = parse_seed_rule(f.solver.seed_rule);
  gc.line_search.max_iter = f.solver.ls_max_iter;
  gc.line_search.grad_tol = 1e-10;
  if (f.solver.noise > 0.0 || f.solver.discrepancy)
    throw UsageError("toy sweeps use exact data; --noise/--discrepancy apply to ct");

  gc.on_run = [&](const sesop::GridCellConfig& cell, std::uint64_t seed,
                  const sesop::SolveResult& res) {
    std::ostringstream name;
    name << "history_p" << format_p(cell.p) << "_N" << cell.capacity << "_"
         << sesop::to_string(cell.mode) << "_s" << seed << ".csv";
    write_text(dir / name.str(), sesop::history_csv(res.records));
  };

  const auto stats = sesop::run_grid(gc);
  const std::string table = sesop::grid_csv(stats);
  write_text(dir / "grid_stats.csv", table);
  std::cout << table;
  return 0;
}

// --- ct ----------------------------------------------------------------

struct CtFlags {
  SolverFlags solver;
  int pixels = 41;
  int shifts = 61;
  int angles = 60;
  std::uint64_t noise_seed = 420;
};

int cmd_ct(const CtFlags& f) {
  const auto dir = prepare_out_dir(f.solver.out);
  const double p = f.solver.ps[0];
  const double power = f.solver.power ? *f.solver.power : std::max(p, 2.0);

  sesop::RadonGeometry geom{f.pixels, f.shifts, f.angles};
  const sesop::SparseOperator A = sesop::build_radon_matrix(geom);
  const sesop::Vector phantom = sesop::shepp_logan(f.pixels);

  // Data comes from the discrete forward projection of the phantom, so the
  // exact-data system is consistent and the phantom itself is a solution; the
  // noisy variant perturbs it at a known relative level.
  sesop::Vector y_vec = A.apply(phantom);
  if (f.solver.noise > 0.0) y_vec = sesop::add_noise(y_vec, f.solver.noise, f.noise_seed);

  sesop::SolverConfig sc;
  sc.space_x = sesop::LpSpec{geom.cols(), p, power};
  sc.mode = parse_mode(f.solver.modes[0]);
  sc.capacity = f.solver.capacities[0];
  apply_common(f.solver, sc);
  sc.line_search.grad_tol = 1e-8;

  const sesop::PrimalVector y(y_vec, sesop::LpSpec{geom.rows(), f.solver.r, f.solver.r});
  const sesop::PrimalVector reference(phantom, sc.space_x);
  const sesop::SolveResult res = sesop::solve(A, y, sc, reference);

  const auto image = [&](const std::string& tag, const sesop::Vector& data, int w, int h) {
    sesop::write_pgm((dir / (tag + ".pgm")).string(), data, w, h);
    sesop::write_pgm((dir / sesop::artifact_name(tag, p, f.pixels, "pgm")).string(), data, w, h);
    sesop::write_csv_image((dir / sesop::artifact_name(tag, p, f.pixels, "csv")).string(), data,
                           w, h);
  };
  image("phantom", phantom, f.pixels, f.pixels);
  image("sinogram", y_vec, f.shifts, f.angles);
  image("solution", res.x_final.values(), f.pixels, f.pixels);
  write_text(dir / "history.csv", sesop::history_csv(res.records));

  print_summary(res);
  return 0;
}

// --- solve -------------------------------------------------------------

struct SolveFlags {
  SolverFlags solver;
  std::string matrix_path;
  std::string rhs_path;
  std::string format = "dense";
};

int cmd_solve(const SolveFlags& f) {
  const auto dir = prepare_out_dir(f.solver.out);
  const double p = f.solver.ps[0];
  const double power = f.solver.power ? *f.solver.power : std::max(p, 2.0);

  std::unique_ptr<sesop::LinearOperator> A;
  sesop::Vector y_vec;
  try {
    if (f.format == "dense") {
      A = std::make_unique<sesop::DenseOperator>(sesop::load_dense_operator(f.matrix_path));
    } else if (f.format == "sparse") {
      A = std::make_unique<sesop::SparseOperator>(sesop::load_sparse_operator(f.matrix_path));
    } else {
      throw UsageError("unknown --format '" + f.format + "' (expected dense or sparse)");
    }
    y_vec = sesop::load_vector(f.rhs_path);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (y_vec.size() != A->rows())
    throw UsageError("right-hand side length does not match the matrix row count");

  sesop::SolverConfig sc;
  sc.space_x = sesop::LpSpec{A->cols(), p, power};
  sc.mode = parse_mode(f.solver.modes[0]);
  sc.capacity = f.solver.capacities[0];
  apply_common(f.solver, sc);
  sc.line_search.grad_tol = 1e-10;

  const sesop::PrimalVector y(y_vec, sesop::LpSpec{A->rows(), f.solver.r, f.solver.r});
  const sesop::SolveResult res = sesop::solve(*A, y, sc);

  std::ostringstream xs;
  xs << "x\n";
  xs.precision(17);
  for (Eigen::Index i = 0; i < res.x_final.dim(); ++i) xs << res.x_final.values()[i] << "\n";
  write_text(dir / "x.csv", xs.str());
  write_text(dir / "history.csv", sesop::history_csv(res.records));

  print_summary(res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-accelerated iterative solvers for Ax = y in lp spaces"};
  app.require_subcommand(1);

  ToyFlags toy;
  auto* toy_cmd = app.add_subcommand("toy", "seeded random-matrix sweep over (p, N, mode)");
  add_solver_flags(*toy_cmd, toy.solver, /*lists=*/true, /*default_max_iter=*/20000);
  toy_cmd->add_option("--m", toy.m, "rows of the random matrix")->check(CLI::PositiveNumber);
  toy_cmd->add_option("--n", toy.n, "columns of the random matrix")->check(CLI::PositiveNumber);
  toy_cmd->add_option("--seeds", toy.seeds, "seed list")->delimiter(',');

  CtFlags ct;
  auto* ct_cmd = app.add_subcommand("ct", "tomographic reconstruction of the head phantom");
  add_solver_flags(*ct_cmd, ct.solver, /*lists=*/false, /*default_max_iter=*/1000);
  ct_cmd->add_option("--pixels", ct.pixels, "image side length")->check(CLI::PositiveNumber);
  ct_cmd->add_option("--shifts", ct.shifts, "detector bins per angle")
      ->check(CLI::PositiveNumber);
  ct_cmd->add_option("--angles", ct.angles, "projection angles in [0, pi)")
      ->check(CLI::PositiveNumber);
  ct_cmd->add_option("--noise", ct.solver.noise, "relative noise level (0 = exact data)");
  ct_cmd->add_option("--discrepancy", ct.solver.discrepancy,
                     "stop factor tau of the discrepancy rule (requires --noise)");
  ct_cmd->add_option("--seeds", ct.noise_seed, "noise seed");

  SolveFlags slv;
  auto* solve_cmd = app.add_subcommand("solve", "solve a system given matrix and vector files");
  add_solver_flags(*solve_cmd, slv.solver, /*lists=*/false, /*default_max_iter=*/1000);
  solve_cmd->add_option("matrix", slv.matrix_path, "matrix file")->required();
  solve_cmd->add_option("rhs", slv.rhs_path, "right-hand side file")->required();
  solve_cmd->add_option("--format", slv.format, "matrix file format: dense or sparse");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (toy_cmd->parsed()) return cmd_toy(toy);
    if (ct_cmd->parsed()) return cmd_ct(ct);
    return cmd_solve(slv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
