#include "urbp/grid.hpp"

#include <algorithm>

namespace urbp {

std::string GridPoint::key() const {
    std::string s;
    for (const auto& c : coords) {
        if (c.aggregated())
            s += "agg|";
        else
            s += "s" + std::to_string(c.state) + "t" + std::to_string(c.tau) + "|";
    }
    return s;
}

std::string BeliefGrid::point_name(int point) const {
    std::string s = points[point].key();
    if (!s.empty()) s.pop_back();  // drop trailing separator
    return s;
}

int BeliefGrid::snap_index(const InformationState& info) const {
    GridPoint p;
    p.coords.resize(info.state.size());
    for (size_t k = 0; k < info.state.size(); ++k)
        p.coords[k] = snap_coord(static_cast<int>(k), info.state[k], info.tau[k]);
    const auto it = lookup.find(p.key());
    if (it == lookup.end()) throw DomainError("snap_index: state outside grid domain: " + p.key());
    return it->second;
}

InformationState BeliefGrid::representative(int point, int far_tau) const {
    const GridPoint& p = points[point];
    InformationState info;
    info.state.resize(p.coords.size());
    info.tau.resize(p.coords.size());
    for (size_t k = 0; k < p.coords.size(); ++k) {
        if (p.coords[k].aggregated()) {
            info.state[k] = 0;
            info.tau[k] = far_tau;
        } else {
            info.state[k] = p.coords[k].state;
            info.tau[k] = p.coords[k].tau;
        }
    }
    return info;
}

long grid_point_count(const std::vector<int>& sizes, int tau0) {
    // Per arm the coordinate options are {aggregate} or (s, tau) with
    // tau in [1, tau0-1]. A coordinate vector is a non-empty set iff either
    // some explicit coordinate has tau = 1, or every arm is aggregated and
    // tau0 == 1 (then tau = 1 >= tau0 for the just-played arm too).
    const int K = static_cast<int>(sizes.size());
    long total = 0;
    // Iterate over tau assignments (0 = aggregate, else tau in 1..tau0-1);
    // multiply by the state choices of the explicit arms.
    const int opts = tau0;  // per arm: aggregate + tau0-1 explicit tau values
    std::vector<int> idx(K, 0);
    while (true) {
        bool has_tau1 = false, all_agg = true;
        long states = 1;
        for (int k = 0; k < K; ++k) {
            if (idx[k] == 0) continue;  // aggregate
            all_agg = false;
            states *= sizes[k];
            if (idx[k] == 1) has_tau1 = true;
        }
        if (has_tau1 || (all_agg && tau0 == 1)) total += states;
        int k = 0;
        while (k < K && ++idx[k] == opts) idx[k++] = 0;
        if (k == K) break;
    }
    return total;
}

BeliefGrid build_grid(const BanditInstance& inst, int tau0, size_t cap) {
    if (tau0 < 1) throw DomainError("build_grid: tau0 must be >= 1");
    BeliefGrid grid;
    grid.tau0 = tau0;
    for (const auto& a : inst.arms) grid.sizes.push_back(a.num_states());
    const int K = grid.num_arms();

    // Per-arm coordinate options in canonical order: explicit (s, tau) sorted
    // by (state, tau), then the aggregate.
    std::vector<std::vector<GridCoord>> options(K);
    for (int k = 0; k < K; ++k) {
        for (int s = 0; s < grid.sizes[k]; ++s)
            for (int t = 1; t <= tau0 - 1; ++t) options[k].push_back({s, t});
        options[k].push_back({kAggState, 0});
    }

    std::vector<int> pick(K, 0);
    std::vector<GridPoint> pts;
    while (true) {
        GridPoint p;
        p.coords.resize(K);
        bool has_tau1 = false, all_agg = true;
        for (int k = 0; k < K; ++k) {
            p.coords[k] = options[k][pick[k]];
            if (p.coords[k].aggregated()) {
                p.aggregate = true;
            } else {
                all_agg = false;
                if (p.coords[k].tau == 1) has_tau1 = true;
            }
        }
        if (has_tau1 || (all_agg && tau0 == 1)) {
            pts.push_back(std::move(p));
            if (pts.size() > cap) throw GridTooLargeError("build_grid: exceeds cap");
        }
        int k = 0;
        while (k < K && ++pick[k] == static_cast<int>(options[k].size())) pick[k++] = 0;
        if (k == K) break;
    }

    // Canonical order: lexicographic over per-arm coordinates with explicit
    // pairs before the aggregate. The first point is the bias reference.
    auto coord_rank = [](const GridCoord& c) {
        return c.aggregated() ? std::pair<int, int>{1 << 20, 0}
                              : std::pair<int, int>{c.state, c.tau};
    };
    std::sort(pts.begin(), pts.end(), [&](const GridPoint& a, const GridPoint& b) {
        for (size_t k = 0; k < a.coords.size(); ++k) {
            const auto ra = coord_rank(a.coords[k]), rb = coord_rank(b.coords[k]);
            if (ra != rb) return ra < rb;
        }
        return false;
    });
    grid.points = std::move(pts);
    for (int i = 0; i < grid.num_points(); ++i) {
        grid.points[i].index = i;
        grid.lookup.emplace(grid.points[i].key(), i);
    }

    // Successor table: playing arm u and observing y from point x lands on
    // snap(advance). Aggregated arms stay aggregated (their tau only grows);
    // explicit arms advance one step and may cross into the aggregate.
    grid.succ.assign(grid.num_points(),
                     std::vector<std::vector<int>>(K));
    for (int x = 0; x < grid.num_points(); ++x) {
        const GridPoint& p = grid.points[x];
        for (int u = 0; u < K; ++u) {
            grid.succ[x][u].assign(grid.sizes[u], -1);
            for (int y = 0; y < grid.sizes[u]; ++y) {
                GridPoint q;
                q.coords.resize(K);
                for (int k = 0; k < K; ++k) {
                    if (k == u) {
                        q.coords[k] = grid.snap_coord(k, y, 1);
                    } else if (p.coords[k].aggregated()) {
                        q.coords[k] = {kAggState, 0};
                    } else {
                        q.coords[k] = grid.snap_coord(k, p.coords[k].state, p.coords[k].tau + 1);
                    }
                }
                const auto it = grid.lookup.find(q.key());
                if (it == grid.lookup.end())
                    throw DomainError("build_grid: successor missing (internal)");
                grid.succ[x][u][y] = it->second;
            }
        }
    }
    return grid;
}

}  // namespace urbp
