#include "urbp/solver.hpp"

#include <algorithm>
#include <cmath>

#include "urbp/errors.hpp"
#include "urbp/oracle.hpp"

namespace urbp {

SolveTables build_tables(const BeliefGrid& grid, const BanditInstance& inst,
                         const std::vector<TransitionMatrix>& model, uint64_t version) {
    const int K = grid.num_arms();
    if (static_cast<int>(model.size()) != K)
        throw DomainError("build_tables: model/grid arm count mismatch");
    for (int k = 0; k < K; ++k)
        if (model[k].n != grid.sizes[k])
            throw DomainError("build_tables: model/grid state count mismatch");

    SolveTables t;
    t.grid = &grid;
    t.inst = &inst;
    t.model = model;
    t.model_version = version;
    t.stationary.reserve(K);
    for (int k = 0; k < K; ++k) t.stationary.push_back(stationary_distribution(model[k]));

    const int n = grid.num_points();
    t.marginal.assign(n, std::vector<Vec>(K));
    t.rbar.assign(static_cast<size_t>(n) * K, 0.0);
    for (int x = 0; x < n; ++x) {
        const GridPoint& p = grid.points[x];
        for (int k = 0; k < K; ++k) {
            const GridCoord& c = p.coords[k];
            t.marginal[x][k] =
                c.aggregated() ? t.stationary[k] : row_after_steps(model[k], c.state, c.tau);
            t.rbar[static_cast<size_t>(x) * K + k] = dot(t.marginal[x][k], inst.arms[k].rewards);
        }
    }
    return t;
}

SolveTables build_tables(const BeliefGrid& grid, const BanditInstance& inst) {
    std::vector<TransitionMatrix> model;
    model.reserve(inst.arms.size());
    for (const auto& a : inst.arms) model.push_back(a.P);
    return build_tables(grid, inst, model, 0);
}

AroeSolution value_iterate(const SolveTables& tables, double tol, long max_iters, const Vec* warm,
                           bool allow_weak_mixing, std::vector<double>* span_history) {
    const BeliefGrid& grid = *tables.grid;
    const int n = grid.num_points();
    const int K = grid.num_arms();
    if (n == 0) throw DomainError("value_iterate: empty grid");
    if (!allow_weak_mixing)
        for (const auto& m : tables.model)
            if (!m.strictly_positive)
                throw DomainError(
                    "value_iterate: transition matrix has zero entries; convergence of the "
                    "span-seminorm iteration is only guaranteed for strictly positive rows "
                    "(pass allow_weak_mixing to try anyway)");

    // Flatten the sweep into contiguous (prob, reward, successor) triples.
    std::vector<int> arm_off(K, 0);
    int row_len = 0;
    for (int u = 0; u < K; ++u) {
        arm_off[u] = row_len;
        row_len += grid.sizes[u];
    }
    std::vector<double> prob(static_cast<size_t>(n) * row_len);
    std::vector<double> rew(static_cast<size_t>(n) * row_len);
    std::vector<int> succ(static_cast<size_t>(n) * row_len);
    for (int x = 0; x < n; ++x)
        for (int u = 0; u < K; ++u)
            for (int y = 0; y < grid.sizes[u]; ++y) {
                const size_t slot = static_cast<size_t>(x) * row_len + arm_off[u] + y;
                prob[slot] = tables.marginal[x][u][y];
                rew[slot] = tables.inst->arms[u].rewards[y];
                succ[slot] = grid.succ[x][u][y];
            }

    Vec v(n, 0.0);
    if (warm) {
        if (static_cast<int>(warm->size()) != n)
            throw DomainError("value_iterate: warm start has wrong size");
        v = *warm;
    }
    Vec w(n, 0.0);
    double last_span = -1.0;

    for (long it = 1; it <= max_iters; ++it) {
        double dmax = -1e300, dmin = 1e300;
        for (int x = 0; x < n; ++x) {
            const size_t row = static_cast<size_t>(x) * row_len;
            double best = -1e300;
            for (int u = 0; u < K; ++u) {
                double acc = 0.0;
                const int width = grid.sizes[u];
                for (int y = 0; y < width; ++y) {
                    const size_t slot = row + arm_off[u] + y;
                    acc += prob[slot] * (rew[slot] + v[succ[slot]]);
                }
                best = std::max(best, acc);
            }
            w[x] = best;
            const double d = best - v[x];
            dmax = std::max(dmax, d);
            dmin = std::min(dmin, d);
        }
        const double span = dmax - dmin;
        last_span = span;
        if (span_history) span_history->push_back(span);
        if (!std::isfinite(span)) throw NumericalError("value_iterate: non-finite span");
        if (span <= tol) {
            AroeSolution sol;
            sol.gain = 0.5 * (dmax + dmin);
            sol.h = w;
            const double ref = sol.h[0];
            for (auto& x : sol.h) x -= ref;
            sol.iterations = it;
            sol.span_residual = span;
            sol.reference = 0;
            sol.model_version = tables.model_version;
            return sol;
        }
        const double ref = w[0];
        for (int x = 0; x < n; ++x) v[x] = w[x] - ref;
    }
    throw ConvergenceError("value_iterate: span did not reach tolerance within iteration cap",
                           last_span);
}

double action_value(const SolveTables& t, const AroeSolution& sol, int point, int u) {
    const BeliefGrid& grid = *t.grid;
    if (point < 0 || point >= grid.num_points()) throw DomainError("action_value: bad point");
    if (u < 0 || u >= grid.num_arms()) throw DomainError("action_value: bad arm");
    double acc = t.rbar[static_cast<size_t>(point) * grid.num_arms() + u];
    const Vec& m = t.marginal[point][u];
    for (int y = 0; y < grid.sizes[u]; ++y) acc += m[y] * sol.h[grid.succ[point][u][y]];
    return acc;
}

double action_value(const SolveTables& t, const AroeSolution& sol, const InformationState& info,
                    int u) {
    const BeliefGrid& grid = *t.grid;
    if (u < 0 || u >= grid.num_arms()) throw DomainError("action_value: bad arm");
    const Vec m = row_after_steps(t.model[u], info.state[u], info.tau[u]);
    double acc = 0.0;
    for (int y = 0; y < t.model[u].n; ++y) {
        const InformationState nxt = advance_information_state(info, u, y, *t.inst);
        acc += m[y] * (t.inst->arms[u].rewards[y] + sol.h[grid.snap_index(nxt)]);
    }
    return acc;
}

namespace {

template <typename StateT>
double gap_impl(const SolveTables& t, const AroeSolution& sol, const StateT& x, int u) {
    double best = -1e300;
    for (int a = 0; a < t.grid->num_arms(); ++a) best = std::max(best, action_value(t, sol, x, a));
    return best - action_value(t, sol, x, u);
}

template <typename StateT>
std::vector<int> optimal_set_impl(const SolveTables& t, const AroeSolution& sol, const StateT& x,
                                  double gap_tol) {
    const int K = t.grid->num_arms();
    Vec vals(K);
    double best = -1e300;
    for (int a = 0; a < K; ++a) {
        vals[a] = action_value(t, sol, x, a);
        best = std::max(best, vals[a]);
    }
    std::vector<int> out;
    for (int a = 0; a < K; ++a)
        if (best - vals[a] <= gap_tol) out.push_back(a);
    return out;
}

}  // namespace

double suboptimality_gap(const SolveTables& t, const AroeSolution& sol, int point, int u) {
    return gap_impl(t, sol, point, u);
}

double suboptimality_gap(const SolveTables& t, const AroeSolution& sol,
                         const InformationState& info, int u) {
    return gap_impl(t, sol, info, u);
}

std::vector<int> optimal_action_set(const SolveTables& t, const AroeSolution& sol, int point,
                                    double gap_tol) {
    return optimal_set_impl(t, sol, point, gap_tol);
}

std::vector<int> optimal_action_set(const SolveTables& t, const AroeSolution& sol,
                                    const InformationState& info, double gap_tol) {
    return optimal_set_impl(t, sol, info, gap_tol);
}

bool Partition::contains(const Belief& psi, int set_index) const {
    if (set_index < 0 || set_index >= static_cast<int>(sets.size()))
        throw DomainError("Partition::contains: bad set index");
    const PartitionSet& s = sets[set_index];
    const GridPoint& p = grid->points[s.index];
    if (psi.num_arms() != static_cast<int>(p.coords.size()))
        throw DomainError("Partition::contains: arm count mismatch");
    // Lower bound on the distance from psi to the set, summed over arms:
    // explicit coordinates are single rows; aggregated coordinates are balls
    // of radius agg_radius around the stationary row. A lower bound keeps the
    // test inclusive (never rejects a true member of the epsilon-extension).
    double dist = 0.0;
    for (int k = 0; k < psi.num_arms(); ++k) {
        if (p.coords[k].aggregated())
            dist += std::max(0.0, l1_dist(psi.m[k], s.center.m[k]) - agg_radius[k]);
        else
            dist += l1_dist(psi.m[k], s.center.m[k]);
    }
    return dist <= epsilon + 1e-12;
}

Partition build_partition(const SolveTables& tables, const AroeSolution& sol, double epsilon,
                          int probe_len, double gap_tol) {
    if (epsilon < 0) throw DomainError("build_partition: epsilon must be nonnegative");
    const BeliefGrid& grid = *tables.grid;
    const int K = grid.num_arms();
    Partition part;
    part.grid = &grid;
    part.epsilon = epsilon;

    // Per-arm radius of the aggregate coordinate: every member row (any
    // state, any tau >= tau0) lies within this L1 distance of the stationary
    // row. Probed over a window, with the measured geometric envelope
    // covering the tail.
    part.agg_radius.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        const TransitionMatrix& P = tables.model[k];
        const Vec& pi = tables.stationary[k];
        double radius = 0.0;
        for (int s = 0; s < P.n; ++s) {
            Vec row = row_after_steps(P, s, grid.tau0);
            for (int step = 0; step <= probe_len; ++step) {
                radius = std::max(radius, l1_dist(row, pi));
                row = row_times_mat(row, P.p, P.n);
            }
        }
        const auto cert = ergodicity_certificate(P);
        radius = std::max(radius, cert.C * std::pow(cert.rho, grid.tau0 + probe_len + 1));
        part.agg_radius[k] = radius;
    }

    part.sets.reserve(grid.num_points());
    for (int x = 0; x < grid.num_points(); ++x) {
        PartitionSet s;
        s.index = x;
        s.aggregate = grid.points[x].aggregate;
        s.center = tables.point_belief(x);
        s.optimal_set = optimal_action_set(tables, sol, x, gap_tol);
        double diam = 0.0;
        for (int k = 0; k < K; ++k)
            if (grid.points[x].coords[k].aggregated()) diam += 2.0 * part.agg_radius[k];
        s.diameter = diam;
        part.sets.push_back(std::move(s));
    }

    // Conservative overlap scan over epsilon-extensions: a pair is flagged
    // unless some arm separates the two coordinate sets by more than
    // 2 * epsilon. Per-arm set distance is lower-bounded (aggregates are
    // balls), so every real overlap is flagged.
    for (int i = 0; i < grid.num_points(); ++i)
        for (int j = i + 1; j < grid.num_points(); ++j) {
            double sep = 0.0;
            for (int k = 0; k < K; ++k) {
                const bool ai = grid.points[i].coords[k].aggregated();
                const bool aj = grid.points[j].coords[k].aggregated();
                double d = l1_dist(part.sets[i].center.m[k], part.sets[j].center.m[k]);
                if (ai) d -= part.agg_radius[k];
                if (aj) d -= part.agg_radius[k];
                sep = std::max(sep, d);
            }
            if (sep <= 2.0 * epsilon + 1e-12) part.overlap_pairs.emplace_back(i, j);
        }
    return part;
}

SandwichReport check_finite_horizon_sandwich(const SolveTables& tables, const AroeSolution& sol,
                                             int t_max) {
    if (t_max < 1) throw DomainError("check_finite_horizon_sandwich: t_max must be >= 1");
    const BeliefGrid& grid = *tables.grid;
    const int n = grid.num_points();

    OracleOptions opts;
    std::vector<InformationState> starts;
    starts.reserve(n);
    for (int x = 0; x < n; ++x) starts.push_back(grid.representative(x, opts.tau_cap));
    std::vector<int> horizons(t_max);
    for (int T = 1; T <= t_max; ++T) horizons[T - 1] = T;
    const auto vals = finite_horizon_oracle_batch(*tables.inst, tables.model, starts, horizons,
                                                  opts);

    const double hmax = *std::max_element(sol.h.begin(), sol.h.end());
    const double hmin = *std::min_element(sol.h.begin(), sol.h.end());
    SandwichReport rep;
    rep.t_max = t_max;
    rep.worst_violation = -1e300;
    for (int x = 0; x < n; ++x)
        for (int T = 1; T <= t_max; ++T) {
            const double val = vals[static_cast<size_t>(x) * t_max + (T - 1)] - T * sol.gain;
            const double lower = sol.h[x] - hmax;
            const double upper = sol.h[x] - hmin;
            rep.worst_violation = std::max(rep.worst_violation, lower - val);
            rep.worst_violation = std::max(rep.worst_violation, val - upper);
            ++rep.points_checked;
        }
    return rep;
}

}  // namespace urbp
