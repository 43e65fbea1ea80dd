#pragma once

// Truncated information-state grid. Explicit points carry per-arm pairs
// (s, tau) with tau in [1, tau0-1]; arms unobserved for tau0 or more steps
// collapse to an aggregate coordinate whose marginal is pinned to the
// stationary distribution. Every information state with min tau = 1 maps to
// exactly one grid point.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "urbp/belief.hpp"

namespace urbp {

constexpr int kAggState = -1;  // aggregate coordinate sentinel

struct GridCoord {
    int state = kAggState;  // kAggState for aggregated arms
    int tau = 0;            // 0 for aggregated arms
    bool aggregated() const { return state == kAggState; }
    bool operator==(const GridCoord& o) const { return state == o.state && tau == o.tau; }
};

struct GridPoint {
    std::vector<GridCoord> coords;
    bool aggregate = false;  // true iff any coordinate is aggregated
    int index = -1;
    std::string key() const;
};

struct BeliefGrid {
    int tau0 = 0;
    std::vector<int> sizes;  // per-arm state counts
    std::vector<GridPoint> points;
    std::unordered_map<std::string, int> lookup;
    // Combinatorial successor table (model-independent):
    // succ[point][arm][obs] = index of the snapped advanced state.
    std::vector<std::vector<std::vector<int>>> succ;

    int num_points() const { return static_cast<int>(points.size()); }
    int num_arms() const { return static_cast<int>(sizes.size()); }

    // Grid point covering an information state (aggregating tau >= tau0).
    int snap_index(const InformationState& info) const;
    GridCoord snap_coord(int /*arm*/, int s, int tau) const {
        return (tau >= tau0) ? GridCoord{kAggState, 0} : GridCoord{s, tau};
    }

    // Representative information state of a point: explicit coordinates map to
    // themselves; aggregated arms get tau = far_tau (marginal ~ stationary).
    InformationState representative(int point, int far_tau) const;

    std::string point_name(int point) const;
};

// Enumerates the grid for truncation tau0 (>= 1), throwing GridTooLargeError
// beyond `cap` points. Grid size equals the number of non-empty partition
// sets over the domain {min_k tau_k = 1}.
BeliefGrid build_grid(const BanditInstance& inst, int tau0, size_t cap = 200000);

// Closed-form count of grid points (used to cross-check enumeration).
long grid_point_count(const std::vector<int>& sizes, int tau0);

}  // namespace urbp
