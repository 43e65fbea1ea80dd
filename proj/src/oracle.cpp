#include "urbp/oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "urbp/errors.hpp"

namespace urbp {

namespace {

// Reachable-state closure with staleness capped at opts.tau_cap, plus the
// precomputed per-state tables that make the backward sweep a pure
// index/multiply loop.
struct Closure {
    int num_arms = 0;
    std::vector<InformationState> states;
    // succ[s * total_actions_obs + ...] flattened below.
    // succ_index[state][arm][obs] -> closure index
    std::vector<int> succ;          // size states * sum_obs (per arm offsets)
    std::vector<double> marg;       // same layout: observation probabilities
    std::vector<int> arm_offset;    // offset of arm u's block within a state row
    int row_len = 0;                // sum of arm sizes
    std::vector<double> obs_reward; // reward of observing y on arm u (same layout)

    int succ_at(int state, int arm, int y) const {
        return succ[static_cast<size_t>(state) * row_len + arm_offset[arm] + y];
    }
};

std::string info_key(const InformationState& inf) {
    std::string key;
    key.reserve(inf.state.size() * 6);
    for (size_t k = 0; k < inf.state.size(); ++k) {
        key += std::to_string(inf.state[k]);
        key += ':';
        key += std::to_string(inf.tau[k]);
        key += '|';
    }
    return key;
}

InformationState capped(InformationState inf, int cap) {
    for (auto& t : inf.tau) t = std::min(t, cap);
    return inf;
}

Closure build_closure(const BanditInstance& inst, const std::vector<TransitionMatrix>& model,
                      const std::vector<InformationState>& starts, const OracleOptions& opts) {
    const int num_arms = inst.num_arms();
    if (static_cast<int>(model.size()) != num_arms)
        throw DomainError("model/instance arm count mismatch");
    Closure c;
    c.num_arms = num_arms;
    c.arm_offset.resize(num_arms);
    for (int u = 0; u < num_arms; ++u) {
        c.arm_offset[u] = c.row_len;
        c.row_len += model[u].n;
    }

    std::unordered_map<std::string, int> lookup;
    std::vector<int> frontier;
    for (const auto& s0 : starts) {
        InformationState s = capped(s0, opts.tau_cap);
        auto key = info_key(s);
        if (lookup.count(key)) continue;
        lookup.emplace(std::move(key), static_cast<int>(c.states.size()));
        frontier.push_back(static_cast<int>(c.states.size()));
        c.states.push_back(std::move(s));
    }

    // Breadth-first closure under the one-step successor map.
    while (!frontier.empty()) {
        std::vector<int> next_frontier;
        for (int idx : frontier) {
            const InformationState base = c.states[idx];
            for (int u = 0; u < num_arms; ++u) {
                for (int y = 0; y < model[u].n; ++y) {
                    InformationState nxt = base;
                    nxt.state[u] = y;
                    for (int k = 0; k < num_arms; ++k)
                        nxt.tau[k] = std::min((k == u ? 1 : nxt.tau[k] + 1), opts.tau_cap);
                    auto key = info_key(nxt);
                    auto it = lookup.find(key);
                    if (it == lookup.end()) {
                        if (static_cast<long>(c.states.size()) >= opts.max_states)
                            throw OracleTooLargeError(
                                "reachable information-state count exceeds max_states=" +
                                std::to_string(opts.max_states));
                        int ni = static_cast<int>(c.states.size());
                        lookup.emplace(std::move(key), ni);
                        c.states.push_back(std::move(nxt));
                        next_frontier.push_back(ni);
                    }
                }
            }
        }
        frontier.swap(next_frontier);
    }

    const size_t n = c.states.size();
    c.succ.resize(n * c.row_len);
    c.marg.resize(n * c.row_len);
    c.obs_reward.resize(n * c.row_len);
    for (size_t i = 0; i < n; ++i) {
        const InformationState& s = c.states[i];
        for (int u = 0; u < num_arms; ++u) {
            Vec m = row_after_steps(model[u], s.state[u], s.tau[u]);
            for (int y = 0; y < model[u].n; ++y) {
                InformationState nxt = s;
                nxt.state[u] = y;
                for (int k = 0; k < num_arms; ++k)
                    nxt.tau[k] = std::min((k == u ? 1 : nxt.tau[k] + 1), opts.tau_cap);
                auto it = lookup.find(info_key(nxt));
                // The closure is successor-complete by construction.
                size_t slot = i * c.row_len + c.arm_offset[u] + y;
                c.succ[slot] = it->second;
                c.marg[slot] = m[y];
                c.obs_reward[slot] = inst.arms[u].rewards[y];
            }
        }
    }
    return c;
}

// One backward-induction sweep: v_out[i] = max_u sum_y m(y) [r(y) + v_in[succ]].
void sweep(const Closure& c, const std::vector<double>& v_in, std::vector<double>& v_out) {
    const size_t n = c.states.size();
    for (size_t i = 0; i < n; ++i) {
        const size_t row = i * c.row_len;
        double best = -1e300;
        for (int u = 0; u < c.num_arms; ++u) {
            const int off = c.arm_offset[u];
            const int width = (u + 1 < c.num_arms ? c.arm_offset[u + 1] : c.row_len) - off;
            double acc = 0.0;
            for (int y = 0; y < width; ++y) {
                const size_t slot = row + off + y;
                acc += c.marg[slot] * (c.obs_reward[slot] + v_in[c.succ[slot]]);
            }
            best = std::max(best, acc);
        }
        v_out[i] = best;
    }
}

// Same sweep but a fixed arm instead of the max.
void sweep_fixed(const Closure& c, int arm, const std::vector<double>& v_in,
                 std::vector<double>& v_out) {
    const size_t n = c.states.size();
    const int off = c.arm_offset[arm];
    const int width = (arm + 1 < c.num_arms ? c.arm_offset[arm + 1] : c.row_len) - off;
    for (size_t i = 0; i < n; ++i) {
        const size_t row = i * c.row_len;
        double acc = 0.0;
        for (int y = 0; y < width; ++y) {
            const size_t slot = row + off + y;
            acc += c.marg[slot] * (c.obs_reward[slot] + v_in[c.succ[slot]]);
        }
        v_out[i] = acc;
    }
}

}  // namespace

std::vector<double> finite_horizon_oracle_batch(const BanditInstance& inst,
                                                const std::vector<TransitionMatrix>& model,
                                                const std::vector<InformationState>& starts,
                                                const std::vector<int>& horizons,
                                                const OracleOptions& opts) {
    for (int h : horizons)
        if (h < 0) throw DomainError("negative horizon");
    std::vector<double> out(starts.size() * horizons.size(), 0.0);
    if (starts.empty() || horizons.empty()) return out;
    int t_max = *std::max_element(horizons.begin(), horizons.end());

    Closure c = build_closure(inst, model, starts, opts);
    std::vector<int> start_index(starts.size());
    {
        std::unordered_map<std::string, int> lookup;
        for (size_t i = 0; i < c.states.size(); ++i)
            lookup.emplace(info_key(c.states[i]), static_cast<int>(i));
        for (size_t i = 0; i < starts.size(); ++i)
            start_index[i] = lookup.at(info_key(capped(starts[i], opts.tau_cap)));
    }

    std::vector<double> v(c.states.size(), 0.0), w(c.states.size(), 0.0);
    auto record = [&](int steps_done) {
        for (size_t j = 0; j < horizons.size(); ++j)
            if (horizons[j] == steps_done)
                for (size_t i = 0; i < starts.size(); ++i)
                    out[i * horizons.size() + j] = v[start_index[i]];
    };
    record(0);
    for (int step = 1; step <= t_max; ++step) {
        sweep(c, v, w);
        v.swap(w);
        record(step);
    }
    return out;
}

double finite_horizon_oracle(const BanditInstance& inst, const std::vector<TransitionMatrix>& model,
                             const InformationState& info, int horizon,
                             const OracleOptions& opts) {
    return finite_horizon_oracle_batch(inst, model, {info}, {horizon}, opts)[0];
}

double finite_horizon_oracle(const BanditInstance& inst, const InformationState& info, int horizon,
                             const OracleOptions& opts) {
    std::vector<TransitionMatrix> model;
    model.reserve(inst.arms.size());
    for (const auto& a : inst.arms) model.push_back(a.P);
    return finite_horizon_oracle(inst, model, info, horizon, opts);
}

double finite_horizon_fixed_arm(const BanditInstance& inst,
                                const std::vector<TransitionMatrix>& model,
                                const InformationState& info, int horizon, int arm,
                                const OracleOptions& opts) {
    if (arm < 0 || arm >= inst.num_arms()) throw DomainError("arm index out of range");
    if (horizon < 0) throw DomainError("negative horizon");
    Closure c = build_closure(inst, model, {info}, opts);
    int start = -1;
    {
        auto key = info_key(capped(info, opts.tau_cap));
        for (size_t i = 0; i < c.states.size(); ++i)
            if (info_key(c.states[i]) == key) {
                start = static_cast<int>(i);
                break;
            }
    }
    std::vector<double> v(c.states.size(), 0.0), w(c.states.size(), 0.0);
    for (int step = 1; step <= horizon; ++step) {
        sweep_fixed(c, arm, v, w);
        v.swap(w);
    }
    return v[start];
}

double oracle_mean_over_initializations(const BanditInstance& inst,
                                        const std::vector<TransitionMatrix>& model, int horizon,
                                        const OracleOptions& opts) {
    const int num_arms = inst.num_arms();
    std::vector<Vec> pis;
    pis.reserve(num_arms);
    for (int k = 0; k < num_arms; ++k) pis.push_back(stationary_distribution(model[k]));

    // Enumerate joint observed states; weight by the product of stationary
    // laws (the chains start at stationarity and the initialization round
    // observes each arm once).
    std::vector<InformationState> starts;
    std::vector<double> weights;
    std::vector<int> obs(num_arms, 0);
    for (;;) {
        double w = 1.0;
        for (int k = 0; k < num_arms; ++k) w *= pis[k][obs[k]];
        starts.push_back(initial_information_state(obs));
        weights.push_back(w);
        int k = num_arms - 1;
        while (k >= 0 && ++obs[k] == model[k].n) obs[k--] = 0;
        if (k < 0) break;
    }
    auto vals = finite_horizon_oracle_batch(inst, model, starts, {horizon}, opts);
    double mean = 0.0;
    for (size_t i = 0; i < starts.size(); ++i) mean += weights[i] * vals[i];
    return mean;
}

}  // namespace urbp
