#include "urbp/ala.hpp"

#include <algorithm>
#include <cmath>

#include "urbp/errors.hpp"
#include "urbp/rng.hpp"

namespace urbp {

ExplorationSchedule ExplorationSchedule::fixed(double L) {
    ExplorationSchedule s;
    s.kind = Kind::fixed;
    s.L = L;
    return s;
}

ExplorationSchedule ExplorationSchedule::adaptive() {
    return adaptive([](double t) { return 1.0 + std::log(1.0 + std::log(t)); });
}

ExplorationSchedule ExplorationSchedule::adaptive(std::function<double(double)> L_fn) {
    ExplorationSchedule s;
    s.kind = Kind::adaptive;
    s.L_fn = std::move(L_fn);
    return s;
}

double ExplorationSchedule::multiplier(long t) const {
    if (t < 1) throw DomainError("ExplorationSchedule: t must be >= 1");
    return kind == Kind::fixed ? L : L_fn(static_cast<double>(t));
}

double ExplorationSchedule::value(long t) const {
    return multiplier(t) * std::log(static_cast<double>(t));
}

void ExplorationSchedule::validate() const {
    if (kind == Kind::fixed) {
        if (!(L > 0.0)) throw ConfigError("exploration schedule: fixed L must be positive");
        return;
    }
    if (!L_fn) throw ConfigError("exploration schedule: adaptive kind needs a multiplier function");
    if (std::abs(L_fn(1.0) - 1.0) > 1e-9)
        throw ConfigError("exploration schedule: adaptive multiplier must satisfy L(1) = 1");
    double prev = L_fn(1.0);
    for (double t = 2.0; t <= 1e12; t *= 2.0) {
        const double cur = L_fn(t);
        if (!(cur >= prev - 1e-12))
            throw ConfigError("exploration schedule: adaptive multiplier must be nondecreasing");
        prev = cur;
    }
    if (!(L_fn(1e12) > L_fn(1.0) + 1e-6))
        throw ConfigError("exploration schedule: adaptive multiplier must grow without bound");
}

namespace {

// All rows shifted toward `target`: mass (clipped) moves from the other
// columns, rescaled proportionally. Row L1 change is at most 2 * mass.
TransitionMatrix shift_toward(const TransitionMatrix& P, int target, double mass) {
    Mat raw = P.p;
    const int n = P.n;
    for (int i = 0; i < n; ++i) {
        const double pj = mat_at(raw, n, i, target);
        const double add = std::min(mass, 1.0 - pj);
        if (add <= 0.0) continue;
        const double rest = 1.0 - pj;
        const double scale = (rest - add) / rest;
        for (int j = 0; j < n; ++j) mat_at(raw, n, i, j) *= scale;
        mat_at(raw, n, i, target) = pj + add;
    }
    return make_transition_matrix(raw, n, 1e-9);
}

// Seeded random stochastic matrix within L1 (max row) distance `radius`.
TransitionMatrix random_in_ball(const TransitionMatrix& P, double radius, uint64_t seed,
                                uint64_t s1, uint64_t s2, uint64_t s3) {
    const int n = P.n;
    Mat raw = P.p;
    const uint64_t base = mix_u64(seed, s1, s2, s3);
    for (int i = 0; i < n; ++i) {
        // Zero-sum direction, scaled so the pre-clip row change is <= radius.
        Vec d(n);
        double mean = 0.0;
        for (int j = 0; j < n; ++j) {
            d[j] = uniform01(base, 11, static_cast<uint64_t>(i), static_cast<uint64_t>(j)) - 0.5;
            mean += d[j];
        }
        mean /= n;
        double abs_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            d[j] -= mean;
            abs_sum += std::abs(d[j]);
        }
        if (abs_sum < 1e-15) continue;
        const double scale =
            radius * uniform01(base, 13, static_cast<uint64_t>(i), 0) / abs_sum;
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = std::max(mat_at(P.p, n, i, j) + scale * d[j], 1e-12);
            mat_at(raw, n, i, j) = v;
            row_sum += v;
        }
        for (int j = 0; j < n; ++j) mat_at(raw, n, i, j) /= row_sum;
        // Clipping/renormalization may overshoot; pull back inside the ball.
        double diff = 0.0;
        for (int j = 0; j < n; ++j) diff += std::abs(mat_at(raw, n, i, j) - mat_at(P.p, n, i, j));
        if (diff > radius) {
            const double blend = radius / diff;
            for (int j = 0; j < n; ++j)
                mat_at(raw, n, i, j) =
                    mat_at(P.p, n, i, j) + blend * (mat_at(raw, n, i, j) - mat_at(P.p, n, i, j));
        }
    }
    return make_transition_matrix(raw, n, 1e-9);
}

}  // namespace

IndexResult optimistic_index(const SolveTables& tables, const AroeSolution& sol,
                             const InformationState& info, int u, double radius, int budget,
                             uint64_t seed, long t) {
    if (budget < 1) throw ConfigError("optimistic_index: budget must be >= 1");
    const BeliefGrid& grid = *tables.grid;
    const int n = tables.model[u].n;

    // Successor bias values and rewards do not depend on the candidate model.
    Vec cont(n);
    for (int y = 0; y < n; ++y) {
        const InformationState nxt = advance_information_state(info, u, y, *tables.inst);
        cont[y] = tables.inst->arms[u].rewards[y] + sol.h[grid.snap_index(nxt)];
    }
    const auto value_of = [&](const TransitionMatrix& P) {
        const Vec m = row_after_steps(P, info.state[u], info.tau[u]);
        return dot(m, cont);
    };

    IndexResult res;
    res.value = value_of(tables.model[u]);
    res.origin = 0;
    if (radius <= 0.0) return res;

    for (int target = 0; target < n; ++target) {
        const double v = value_of(shift_toward(tables.model[u], target, radius / 2.0));
        if (v > res.value) {
            res.value = v;
            res.origin = 1;
        }
    }
    for (int c = 1; c <= budget; ++c) {
        const double v = value_of(random_in_ball(tables.model[u], radius, seed,
                                                 static_cast<uint64_t>(u),
                                                 static_cast<uint64_t>(t),
                                                 static_cast<uint64_t>(c)));
        if (v > res.value) {
            res.value = v;
            res.origin = 2;
        }
    }
    return res;
}

ALAAgent::ALAAgent(const BanditInstance& inst, const ALAConfig& cfg) : inst_(inst), cfg_(cfg) {
    cfg_.schedule.validate();
    if (cfg_.index_budget < 1) throw ConfigError("ALAConfig: index_budget must be >= 1");
    if (cfg_.resolve_every < 1) throw ConfigError("ALAConfig: resolve_every must be >= 1");
    if (cfg_.tau0 < 1) throw ConfigError("ALAConfig: tau0 must be >= 1");
    grid_ = build_grid(inst_, cfg_.tau0);
    std::vector<int> sizes;
    for (const auto& a : inst_.arms) sizes.push_back(a.num_states());
    if (cfg_.model_override) {
        if (static_cast<int>(cfg_.model_override->size()) != inst_.num_arms())
            throw ConfigError("ALAConfig: model_override arm count mismatch");
        for (int k = 0; k < inst_.num_arms(); ++k)
            if ((*cfg_.model_override)[k].n != sizes[k])
                throw ConfigError("ALAConfig: model_override state count mismatch");
    }
    tables_ = CountTables::zeros(sizes);
}

EstimatedModel ALAAgent::current_estimate() const {
    if (cfg_.model_override) {
        EstimatedModel em;
        em.normalized = *cfg_.model_override;
        em.version = 0;
        return em;
    }
    return estimate(tables_);
}

void ALAAgent::feed_init(int arm, int obs) {
    if (arm != init_fed_) throw DomainError("feed_init: arms must be fed in order 0..K-1");
    if (obs < 0 || obs >= inst_.arms[arm].num_states())
        throw DomainError("feed_init: observation out of range");
    tables_.record_step(prev_arm_, arm, prev_obs_, obs);
    if (init_fed_ == 0) {
        info_.state.assign(inst_.num_arms(), 0);
        info_.tau.assign(inst_.num_arms(), 0);
    }
    info_.state[arm] = obs;
    prev_arm_ = arm;
    prev_obs_ = obs;
    ++init_fed_;
    if (init_fed_ == inst_.num_arms()) {
        const int K = inst_.num_arms();
        for (int k = 0; k < K; ++k) info_.tau[k] = K - k;
        phase_ = Phase::init;
    }
}

void ALAAgent::ensure_solution(long t) {
    (void)t;
    const EstimatedModel em = current_estimate();
    const bool stale = !solution_ || solved_version_ != em.version;
    if (!stale) {
        exploits_since_solve_ = 0;  // cache exactly matches the estimate
        return;
    }
    if (solution_ && exploits_since_solve_ < cfg_.resolve_every - 1) {
        ++exploits_since_solve_;  // deliberately reuse a stale cache
        return;
    }
    model_ = em;
    solve_tables_ = build_tables(grid_, inst_, em.normalized, em.version);
    const Vec* warm = solution_ ? &solution_->h : nullptr;
    solution_ = value_iterate(solve_tables_, cfg_.vi_tol, cfg_.vi_max_iters, warm);
    solved_version_ = em.version;
    exploits_since_solve_ = 0;
    ++solves_;
}

int ALAAgent::select(long t) {
    if (init_fed_ != inst_.num_arms())
        throw DomainError("select: initialization incomplete");
    if (t != t_ + 1) throw DomainError("select: decision steps must be sequential");
    t_ = t;
    const int K = inst_.num_arms();

    const double f = cfg_.schedule.value(t);
    const auto w = exploration_set(tables_, f);
    if (!w.empty()) {
        phase_ = Phase::explore;
        for (const auto& [k, i] : w)
            if (k == prev_arm_) return prev_arm_;
        return w.front().first;  // lexicographically minimal deficient pair
    }

    phase_ = Phase::exploit;
    ensure_solution(t);

    if (cfg_.variant == ALAVariant::finite_partition) {
        const int point = grid_.snap_index(info_);
        const auto opt = optimal_action_set(solve_tables_, *solution_, point, cfg_.gap_tol);
        const int arm = opt.front();
        // Logged invariant: the chosen arm's gap at the set's center must be
        // within tolerance of optimal (recomputed independently of `opt`).
        ++fp_checks_;
        if (suboptimality_gap(solve_tables_, *solution_, point, arm) > cfg_.gap_tol)
            ++fp_violations_;
        return arm;
    }

    Vec indices(K);
    for (int u = 0; u < K; ++u) {
        const double radius =
            cfg_.force_radius_zero
                ? 0.0
                : std::sqrt(2.0 * std::log(static_cast<double>(t)) / tables_.plays[u]);
        const IndexResult ir = optimistic_index(solve_tables_, *solution_, info_, u, radius,
                                                cfg_.index_budget, cfg_.seed, t);
        indices[u] = ir.value;
        ++index_origin_[ir.origin];
    }
    const double best = *std::max_element(indices.begin(), indices.end());
    if (cfg_.tie_break == TieBreak::deterministic_first) {
        for (int u = 0; u < K; ++u)
            if (indices[u] >= best) return u;
        return K - 1;  // unreachable
    }
    std::vector<int> ties;
    for (int u = 0; u < K; ++u)
        if (indices[u] >= best - 1e-12) ties.push_back(u);
    const double r = uniform01(cfg_.seed, 17, static_cast<uint64_t>(t));
    return ties[std::min(static_cast<size_t>(r * ties.size()), ties.size() - 1)];
}

void ALAAgent::record(int arm, int obs) {
    tables_.record_step(prev_arm_, arm, prev_obs_, obs);
    info_ = advance_information_state(info_, arm, obs, inst_);
    prev_arm_ = arm;
    prev_obs_ = obs;
}

std::optional<Belief> ALAAgent::estimated_belief() const {
    if (init_fed_ != inst_.num_arms()) return std::nullopt;
    return belief_of(info_, current_estimate().normalized);
}

Tau0Selection select_tau0_for_horizon(const BanditInstance& inst,
                                      const std::vector<TransitionMatrix>& model, long horizon,
                                      int probe_len, int cap, double floor) {
    if (horizon < 1) throw DomainError("select_tau0_for_horizon: horizon must be >= 1");
    Tau0Selection out;
    const int K = inst.num_arms();
    for (int tau0 = 2; tau0 <= cap; ++tau0) {
        const BeliefGrid grid = build_grid(inst, tau0);
        const SolveTables tables = build_tables(grid, inst, model, 0);
        const AroeSolution sol = value_iterate(tables);
        const double span =
            *std::max_element(sol.h.begin(), sol.h.end()) -
            *std::min_element(sol.h.begin(), sol.h.end());
        const double threshold = std::max(span / (2.0 * static_cast<double>(horizon)), floor);

        // Probe member states of each aggregated point: vary (state, tau)
        // of every aggregated arm over a geometric tau ladder, upper-bounding
        // the within-set variation of the rolled-out bias.
        std::vector<int> ladder;
        for (int step = 0; step <= probe_len; step = (step == 0 ? 1 : step * 2 + 1))
            ladder.push_back(tau0 + std::min(step, probe_len));
        ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

        double worst = 0.0;
        for (int x = 0; x < grid.num_points(); ++x) {
            if (!grid.points[x].aggregate) continue;
            std::vector<int> agg_arms;
            for (int k = 0; k < K; ++k)
                if (grid.points[x].coords[k].aggregated()) agg_arms.push_back(k);
            // Enumerate (state, ladder tau) choices per aggregated arm.
            std::vector<size_t> pick(agg_arms.size(), 0);
            double vmin = 1e300, vmax = -1e300;
            long combos = 0;
            for (;;) {
                InformationState info = grid.representative(x, tau0);
                for (size_t a = 0; a < agg_arms.size(); ++a) {
                    const int k = agg_arms[a];
                    const size_t choices = static_cast<size_t>(inst.arms[k].num_states()) *
                                           ladder.size();
                    const size_t c = pick[a] % choices;
                    info.state[k] = static_cast<int>(c / ladder.size());
                    info.tau[k] = ladder[c % ladder.size()];
                }
                double rolled = -1e300;
                for (int u = 0; u < K; ++u)
                    rolled = std::max(rolled, action_value(tables, sol, info, u));
                vmin = std::min(vmin, rolled);
                vmax = std::max(vmax, rolled);
                if (++combos >= 512) break;
                size_t a = 0;
                for (; a < agg_arms.size(); ++a) {
                    const size_t choices = static_cast<size_t>(
                                               inst.arms[agg_arms[a]].num_states()) *
                                           ladder.size();
                    if (++pick[a] < choices) break;
                    pick[a] = 0;
                }
                if (a == agg_arms.size()) break;
            }
            worst = std::max(worst, vmax - vmin);
        }
        out.tau0 = tau0;
        out.variation = worst;
        out.threshold = threshold;
        if (worst <= threshold) {
            out.achieved = true;
            return out;
        }
    }
    out.achieved = false;
    out.tau0 = cap;
    return out;
}

}  // namespace urbp
