#include "urbp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "urbp/errors.hpp"
#include "urbp/hash.hpp"
#include "urbp/rng.hpp"

namespace urbp {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::init: return "init";
        case Phase::explore: return "explore";
        default: return "exploit";
    }
}

namespace {

std::string fmt_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

uint64_t hash_belief(const Belief& b) {
    uint64_t h = kFnvOffset;
    for (const auto& m : b.m) h = fnv1a64(m, h);
    return h;
}

std::string info_key(const InformationState& inf) {
    std::string key;
    for (size_t k = 0; k < inf.state.size(); ++k)
        key += std::to_string(inf.state[k]) + ":" + std::to_string(inf.tau[k]) + "|";
    return key;
}

}  // namespace

Environment::Environment(const BanditInstance& inst, uint64_t env_seed)
    : inst_(&inst), seed_(env_seed) {
    const int K = inst.num_arms();
    states_.resize(K);
    for (int k = 0; k < K; ++k) {
        const Vec pi = stationary_distribution(inst.arms[k].P);
        states_[k] = sample_discrete(pi, uniform01(seed_, static_cast<uint64_t>(k), 0));
    }
}

void Environment::advance() {
    ++time_;
    for (size_t k = 0; k < states_.size(); ++k) {
        const Vec row = inst_->arms[k].P.row(states_[k]);
        states_[k] = sample_discrete(row, uniform01(seed_, static_cast<uint64_t>(k),
                                                    static_cast<uint64_t>(time_)));
    }
}

RunRecord simulate(const BanditInstance& inst, Policy& policy, long horizon, uint64_t env_seed,
                   bool keep_beliefs) {
    if (horizon < 1) throw DomainError("simulate: horizon must be >= 1");
    const int K = inst.num_arms();
    Environment env(inst, env_seed);
    RunRecord rec;
    rec.env_seed = env_seed;
    rec.rows.reserve(static_cast<size_t>(K) + horizon);

    for (int k = 0; k < K; ++k) {
        const int y = env.state(k);
        policy.feed_init(k, y);
        RunRow row;
        row.t = static_cast<long>(k) + 1 - K;
        row.arm = k;
        row.observation = y;
        row.reward = inst.arms[k].rewards[y];
        row.phase = Phase::init;
        rec.rows.push_back(row);
        rec.init_obs.push_back(y);
        env.advance();
    }
    rec.initial_info = initial_information_state(rec.init_obs);

    for (long t = 1; t <= horizon; ++t) {
        const int u = policy.select(t);
        if (u < 0 || u >= K) throw DomainError("simulate: policy chose an invalid arm");
        const int y = env.state(u);
        const Phase ph = policy.phase();
        const auto bel = policy.estimated_belief();
        policy.record(u, y);

        RunRow row;
        row.t = t;
        row.arm = u;
        row.observation = y;
        row.reward = inst.arms[u].rewards[y];
        row.phase = ph;
        row.belief_hash = bel ? hash_belief(*bel) : 0;
        rec.rows.push_back(row);
        rec.decision_reward += row.reward;
        if (ph == Phase::explore)
            ++rec.explore_steps;
        else
            ++rec.exploit_steps;
        if (keep_beliefs && bel) rec.est_beliefs.push_back(*bel);
        env.advance();
    }
    for (const auto& row : rec.rows) rec.cumulative_reward += row.reward;
    return rec;
}

std::string run_record_csv(const RunRecord& run) {
    std::string out = "t,arm,observation,reward,phase\n";
    for (const auto& r : run.rows) {
        out += std::to_string(r.t);
        out += ',';
        out += std::to_string(r.arm + 1);
        out += ',';
        out += std::to_string(r.observation + 1);
        out += ',';
        out += fmt_double(r.reward);
        out += ',';
        out += phase_name(r.phase);
        out += '\n';
    }
    return out;
}

int RandomPolicy::select(long t) {
    const double r = uniform01(seed_, 23, static_cast<uint64_t>(t));
    return std::min(static_cast<int>(r * num_arms_), num_arms_ - 1);
}

MyopicPolicy::MyopicPolicy(const BanditInstance& inst) : inst_(&inst) {}

void MyopicPolicy::feed_init(int arm, int obs) {
    (void)arm;
    init_obs_.push_back(obs);
    if (static_cast<int>(init_obs_.size()) == inst_->num_arms())
        info_ = initial_information_state(init_obs_);
}

int MyopicPolicy::select(long) {
    const Belief b = belief_of(info_, *inst_);
    int best = 0;
    double best_r = -1e300;
    for (int u = 0; u < inst_->num_arms(); ++u) {
        const double r = expected_reward(b, u, *inst_);
        if (r > best_r) {
            best_r = r;
            best = u;
        }
    }
    return best;
}

void MyopicPolicy::record(int arm, int obs) {
    info_ = advance_information_state(info_, arm, obs, *inst_);
}

SolvedGreedyPolicy::SolvedGreedyPolicy(const SolveTables& tables, const AroeSolution& sol)
    : tables_(&tables), sol_(&sol) {}

void SolvedGreedyPolicy::feed_init(int arm, int obs) {
    (void)arm;
    init_obs_.push_back(obs);
    if (static_cast<int>(init_obs_.size()) == tables_->inst->num_arms())
        info_ = initial_information_state(init_obs_);
}

int SolvedGreedyPolicy::select(long) {
    int best = 0;
    double best_v = -1e300;
    for (int u = 0; u < tables_->inst->num_arms(); ++u) {
        const double v = action_value(*tables_, *sol_, info_, u);
        if (v > best_v) {
            best_v = v;
            best = u;
        }
    }
    return best;
}

void SolvedGreedyPolicy::record(int arm, int obs) {
    info_ = advance_information_state(info_, arm, obs, *tables_->inst);
}

double simulated_greedy_average(const BanditInstance& inst, const SolveTables& tables,
                                const AroeSolution& sol, long steps, uint64_t env_seed) {
    if (steps < 1) throw DomainError("simulated_greedy_average: steps must be >= 1");
    const BeliefGrid& grid = *tables.grid;
    const int K = inst.num_arms();

    std::vector<int> policy_arm(grid.num_points(), 0);
    for (int x = 0; x < grid.num_points(); ++x) {
        double best = -1e300;
        for (int u = 0; u < K; ++u) {
            const double v = action_value(tables, sol, x, u);
            if (v > best) {
                best = v;
                policy_arm[x] = u;
            }
        }
    }

    Environment env(inst, env_seed);
    std::vector<int> obs(K);
    for (int k = 0; k < K; ++k) {
        obs[k] = env.state(k);
        env.advance();
    }
    int point = grid.snap_index(initial_information_state(obs));

    double total = 0.0;
    for (long t = 1; t <= steps; ++t) {
        const int u = policy_arm[point];
        const int y = env.state(u);
        total += inst.arms[u].rewards[y];
        point = grid.succ[point][u][y];
        env.advance();
    }
    return total / static_cast<double>(steps);
}

namespace {

// Prefix sums of decision rewards per run, plus a shared start-state oracle
// batch. Validates requested horizons against the recorded length.
std::vector<double> decision_prefix(const RunRecord& run, long max_h) {
    std::vector<double> prefix(static_cast<size_t>(max_h) + 1, 0.0);
    long t = 0;
    for (const auto& row : run.rows) {
        if (row.t < 1) continue;
        ++t;
        if (t > max_h) break;
        prefix[t] = prefix[t - 1] + row.reward;
    }
    if (t < max_h) throw DomainError("regret: requested horizon exceeds recorded run length");
    return prefix;
}

RegretPoint summarize(std::vector<double>& per_run, long horizon, const char* mode) {
    RegretPoint p;
    p.horizon = horizon;
    p.mode = mode;
    p.n_replicates = static_cast<int>(per_run.size());
    double mean = 0.0;
    for (double r : per_run) mean += r;
    mean /= per_run.size();
    double var = 0.0;
    for (double r : per_run) var += (r - mean) * (r - mean);
    p.regret = mean;
    p.std_error = per_run.size() > 1
                      ? std::sqrt(var / (per_run.size() - 1.0) / per_run.size())
                      : 0.0;
    return p;
}

}  // namespace

std::vector<RegretPoint> exact_regret_curve(const BanditInstance& inst,
                                            const std::vector<RunRecord>& runs,
                                            const std::vector<long>& horizons,
                                            const OracleOptions& opts) {
    if (runs.empty()) throw NoDataError("exact_regret_curve: no runs");
    if (horizons.empty()) throw DomainError("exact_regret_curve: no horizons");
    const long max_h = *std::max_element(horizons.begin(), horizons.end());

    std::vector<TransitionMatrix> model;
    for (const auto& a : inst.arms) model.push_back(a.P);

    // Deduplicate initial information states across runs for one oracle pass.
    std::unordered_map<std::string, int> start_lookup;
    std::vector<InformationState> starts;
    std::vector<int> run_start(runs.size());
    for (size_t r = 0; r < runs.size(); ++r) {
        const auto key = info_key(runs[r].initial_info);
        auto it = start_lookup.find(key);
        if (it == start_lookup.end()) {
            it = start_lookup.emplace(key, static_cast<int>(starts.size())).first;
            starts.push_back(runs[r].initial_info);
        }
        run_start[r] = it->second;
    }
    std::vector<int> hz(horizons.begin(), horizons.end());
    const auto vals = finite_horizon_oracle_batch(inst, model, starts, hz, opts);

    std::vector<std::vector<double>> prefixes;
    prefixes.reserve(runs.size());
    for (const auto& run : runs) prefixes.push_back(decision_prefix(run, max_h));

    std::vector<RegretPoint> out;
    for (size_t j = 0; j < horizons.size(); ++j) {
        std::vector<double> per_run(runs.size());
        for (size_t r = 0; r < runs.size(); ++r) {
            const double opt = vals[static_cast<size_t>(run_start[r]) * horizons.size() + j];
            per_run[r] = opt - prefixes[r][horizons[j]];
        }
        out.push_back(summarize(per_run, horizons[j], "exact"));
    }
    return out;
}

std::vector<RegretPoint> delta_regret_curve(const BanditInstance& inst,
                                            const std::vector<RunRecord>& runs,
                                            const std::vector<long>& horizons,
                                            const SolveTables& true_tables,
                                            const AroeSolution& true_sol) {
    if (runs.empty()) throw NoDataError("delta_regret_curve: no runs");
    if (horizons.empty()) throw DomainError("delta_regret_curve: no horizons");
    const long max_h = *std::max_element(horizons.begin(), horizons.end());

    std::vector<std::vector<double>> cum(runs.size());
    for (size_t r = 0; r < runs.size(); ++r) {
        cum[r].assign(static_cast<size_t>(max_h) + 1, 0.0);
        InformationState info = initial_information_state(runs[r].init_obs);
        long t = 0;
        for (const auto& row : runs[r].rows) {
            if (row.t < 1) continue;
            ++t;
            if (t > max_h) break;
            const double gap = suboptimality_gap(true_tables, true_sol, info, row.arm);
            cum[r][t] = cum[r][t - 1] + gap;
            info = advance_information_state(info, row.arm, row.observation, inst);
        }
        if (t < max_h) throw DomainError("regret: requested horizon exceeds recorded run length");
    }

    std::vector<RegretPoint> out;
    for (long h : horizons) {
        std::vector<double> per_run(runs.size());
        for (size_t r = 0; r < runs.size(); ++r) per_run[r] = cum[r][h];
        out.push_back(summarize(per_run, h, "delta"));
    }
    return out;
}

std::string regret_csv(const std::vector<RegretPoint>& points) {
    std::string out = "T,regret,mode,stderr,n_replicates\n";
    for (const auto& p : points) {
        out += std::to_string(p.horizon);
        out += ',';
        out += fmt_double(p.regret);
        out += ',';
        out += p.mode;
        out += ',';
        out += fmt_double(p.std_error);
        out += ',';
        out += std::to_string(p.n_replicates);
        out += '\n';
    }
    return out;
}

DiagnosticsReport diagnostics(const RunRecord& run, const BanditInstance& inst, double epsilon,
                              double f_at_horizon) {
    DiagnosticsReport rep;
    rep.epsilon = epsilon;
    rep.explore_steps = run.explore_steps;
    rep.exploit_steps = run.exploit_steps;

    double t_max = 0.0;
    long sum_sizes = 0;
    for (const auto& arm : inst.arms) {
        const Mat h = expected_hitting_times(arm.P);
        for (double v : h) t_max = std::max(t_max, v);
        sum_sizes += arm.num_states();
    }
    rep.t_max_constant = t_max + 1.0;
    rep.explore_envelope = static_cast<double>(sum_sizes) * f_at_horizon *
                           (1.0 + rep.t_max_constant);
    rep.explore_within_envelope = rep.explore_steps <= rep.explore_envelope + 1e-9;

    if (!run.est_beliefs.empty()) {
        const bool joint_ok = inst.joint_size() <= 4096;
        InformationState info = initial_information_state(run.init_obs);
        size_t bi = 0;
        for (const auto& row : run.rows) {
            if (row.t < 1) continue;
            if (bi >= run.est_beliefs.size()) break;
            const Belief& est = run.est_beliefs[bi++];
            if (row.phase == Phase::exploit) {
                const Belief truth = belief_of(info, inst);
                const double d = joint_ok ? belief_distance(truth, est)
                                          : factored_distance(truth, est);
                ++rep.belief_checked_steps;
                if (d > epsilon) ++rep.belief_error_events;
            }
            info = advance_information_state(info, row.arm, row.observation, inst);
        }
    }
    return rep;
}

}  // namespace urbp
