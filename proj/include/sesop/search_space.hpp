#pragma once

#include <vector>

#include "sesop/line_search.hpp"
#include "sesop/lp_space.hpp"

namespace sesop {

enum class SpaceMode { unorthogonalized, metric, expanding };

/// FIFO store of search directions (dual-space vectors), their data-space
/// precursors and the hyperplane offsets. Entries are ordered oldest first;
/// truncated modes evict the front once capacity is reached.
struct SearchSpaceState {
  LpSpec space;  // primal space the directions are dual to
  SpaceMode mode = SpaceMode::metric;
  int capacity = 1;  // ignored in expanding mode
  std::vector<DualVector> directions;
  std::vector<DualVector> precursors;
  std::vector<double> offsets;

  int count() const { return static_cast<int>(directions.size()); }
};

SearchSpaceState make_search_space(const LpSpec& space, SpaceMode mode, int capacity);

/// Appends the raw direction, evicting the oldest entry when a truncated
/// store is full. Valid for unorthogonalized and expanding modes.
void push_unorthogonalized(SearchSpaceState& state, DualVector d, DualVector d_precursor,
                           double offset);

struct OrthogonalizeResult {
  Vector s;                     // projection coefficients onto the stored directions
  double input_norm = 0.0;      // ||d|| before projection
  double direction_norm = 0.0;  // ||w_new||, never larger than input_norm
};

/// Metric-projection update: the new direction is d minus its best
/// approximation from all currently stored directions (including one about to
/// be evicted); precursors and offsets follow the same recurrence, so stored
/// triples stay consistent. A new direction collapsing below 1e-14 * ||d||
/// flags a numerical breakdown and throws.
OrthogonalizeResult push_orthogonalized(SearchSpaceState& state, const DualVector& d,
                                        const DualVector& d_precursor, double offset,
                                        const LineSearchConfig& ls);

/// max over stored pairs j < k of |<w_j, J(w_k)>| / (||w_j|| ||w_k||^(q-1)),
/// q the dual gauge exponent. Zero for perfectly orthogonalized stores.
double verify_semi_orthogonality(const SearchSpaceState& state);

}  // namespace sesop
