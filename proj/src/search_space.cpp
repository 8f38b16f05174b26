#include "sesop/search_space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sesop {

namespace {

void check_push(const SearchSpaceState& state, const DualVector& d,
                const DualVector& d_precursor) {
  if (!compatible(d.space(), state.space.dual()))
    throw std::invalid_argument("search space: direction not in the dual of the state space");
  if (!state.precursors.empty() && state.precursors.front().dim() != d_precursor.dim())
    throw std::invalid_argument("search space: precursor dimension changed");
}

void evict_if_full(SearchSpaceState& state) {
  if (state.mode == SpaceMode::expanding) return;
  if (state.count() < state.capacity) return;
  state.directions.erase(state.directions.begin());
  state.precursors.erase(state.precursors.begin());
  state.offsets.erase(state.offsets.begin());
}

}  // namespace

SearchSpaceState make_search_space(const LpSpec& space, SpaceMode mode, int capacity) {
  validate(space);
  if (mode != SpaceMode::expanding && capacity < 1)
    throw std::invalid_argument("search space: capacity must be >= 1");
  SearchSpaceState state;
  state.space = space;
  state.mode = mode;
  state.capacity = capacity;
  return state;
}

void push_unorthogonalized(SearchSpaceState& state, DualVector d, DualVector d_precursor,
                           double offset) {
  if (state.mode == SpaceMode::metric)
    throw std::logic_error("push_unorthogonalized: state performs metric orthogonalization");
  check_push(state, d, d_precursor);
  evict_if_full(state);
  state.directions.push_back(std::move(d));
  state.precursors.push_back(std::move(d_precursor));
  state.offsets.push_back(offset);
}

OrthogonalizeResult push_orthogonalized(SearchSpaceState& state, const DualVector& d,
                                        const DualVector& d_precursor, double offset,
                                        const LineSearchConfig& ls) {
  if (state.mode != SpaceMode::metric)
    throw std::logic_error("push_orthogonalized: state is not in metric mode");
  check_push(state, d, d_precursor);

  OrthogonalizeResult result;
  result.input_norm = d.norm();
  if (result.input_norm == 0.0)
    throw std::runtime_error("push_orthogonalized: zero direction");

  DualVector w = d;
  DualVector w_precursor = d_precursor;
  double beta = offset;

  if (state.count() > 0) {
    // project onto all stored directions, then drop the oldest; the direction
    // about to be evicted still participates in the projection. The solve runs
    // on unit-normalized vectors: it has the same minimizer up to scaling, but
    // its value and gradient are O(1), so the minimizer cannot stall once the
    // objective drops below the resolution of its own floating-point value.
    std::vector<DualVector> unit_dirs;
    unit_dirs.reserve(state.directions.size());
    std::vector<double> dir_norms;
    dir_norms.reserve(state.directions.size());
    for (const DualVector& wj : state.directions) {
      const double nj = wj.norm();
      dir_norms.push_back(nj);
      unit_dirs.push_back(DualVector(wj.values() / nj, wj.space()));
    }
    const DualVector d_unit(d.values() / result.input_norm, d.space());

    SmoothConvexProblem g = orthogonalization_objective(d_unit, unit_dirs, state.space);
    LineSearchConfig cfg = ls;
    cfg.initial_point = Vector::Zero(g.dimension);
    const LineSearchResult sol = minimize(g, cfg);

    result.s.resize(sol.t.size());
    Vector wv = d.values();
    Vector pv = d_precursor.values();
    for (int j = 0; j < state.count(); ++j) {
      result.s[j] = sol.t[j] * result.input_norm / dir_norms[j];
      wv -= result.s[j] * state.directions[j].values();
      pv -= result.s[j] * state.precursors[j].values();
      beta -= result.s[j] * state.offsets[j];
    }
    w = DualVector(std::move(wv), d.space());
    w_precursor = DualVector(std::move(pv), d_precursor.space());
  }

  result.direction_norm = w.norm();
  if (result.direction_norm < 1e-14 * result.input_norm) {
    std::ostringstream os;
    os << "push_orthogonalized: degenerate direction, ||w|| = " << result.direction_norm
       << " against ||d|| = " << result.input_norm;
    throw std::runtime_error(os.str());
  }

  evict_if_full(state);
  state.directions.push_back(std::move(w));
  state.precursors.push_back(std::move(w_precursor));
  state.offsets.push_back(beta);
  return result;
}

double verify_semi_orthogonality(const SearchSpaceState& state) {
  const double q = conjugate_exponent(state.space.power);
  double worst = 0.0;
  for (int k = 1; k < state.count(); ++k) {
    const PrimalVector jk = duality_map(state.directions[k]);
    const double nk = state.directions[k].norm();
    for (int j = 0; j < k; ++j) {
      const double nj = state.directions[j].norm();
      const double scale = nj * std::pow(nk, q - 1.0);
      if (scale == 0.0) continue;
      worst = std::max(worst, std::abs(pairing(state.directions[j], jk)) / scale);
    }
  }
  return worst;
}

}  // namespace sesop
