#pragma once

// Environment simulation with counter-based common random paths, run
// recording, baseline policies, regret curves (exact oracle-difference and
// gap-sum forms), and per-run diagnostics.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "urbp/oracle.hpp"
#include "urbp/policy.hpp"
#include "urbp/solver.hpp"

namespace urbp {

// All arms evolve every world step regardless of play. Arm k's path is a
// deterministic function of (env_seed, k), so different policies on the same
// seed face identical state paths.
class Environment {
  public:
    Environment(const BanditInstance& inst, uint64_t env_seed);
    int state(int arm) const { return states_[arm]; }
    void advance();
    long time() const { return time_; }

  private:
    const BanditInstance* inst_;
    uint64_t seed_;
    long time_ = 0;
    std::vector<int> states_;
};

struct RunRow {
    long t = 0;  // k - K for init rows, 1..T for decision rows
    int arm = 0; // 0-based
    int observation = 0;
    double reward = 0.0;
    Phase phase = Phase::init;
    uint64_t belief_hash = 0;
};

struct RunRecord {
    std::vector<RunRow> rows;  // K init rows then T decision rows
    double cumulative_reward = 0.0;  // all rows
    double decision_reward = 0.0;    // rows with t >= 1
    long explore_steps = 0;
    long exploit_steps = 0;
    uint64_t env_seed = 0;
    uint64_t agent_seed = 0;
    std::vector<int> init_obs;          // per arm
    InformationState initial_info;      // right after initialization
    std::vector<Belief> est_beliefs;    // per decision step when requested
};

RunRecord simulate(const BanditInstance& inst, Policy& policy, long horizon, uint64_t env_seed,
                   bool keep_beliefs = false);

// CSV with the exact header `t,arm,observation,reward,phase`; arm and
// observation are 1-based in the file.
std::string run_record_csv(const RunRecord& run);

// ---- Baselines ----

class FixedArmPolicy : public Policy {
  public:
    explicit FixedArmPolicy(int arm) : arm_(arm) {}
    void feed_init(int, int) override {}
    int select(long) override { return arm_; }
    void record(int, int) override {}

  private:
    int arm_;
};

class RandomPolicy : public Policy {
  public:
    RandomPolicy(int num_arms, uint64_t seed) : num_arms_(num_arms), seed_(seed) {}
    void feed_init(int, int) override {}
    int select(long t) override;
    void record(int, int) override {}

  private:
    int num_arms_;
    uint64_t seed_;
};

// Plays the arm with the highest immediate expected reward under the true
// model's exact belief.
class MyopicPolicy : public Policy {
  public:
    explicit MyopicPolicy(const BanditInstance& inst);
    void feed_init(int arm, int obs) override;
    int select(long t) override;
    void record(int arm, int obs) override;

  private:
    const BanditInstance* inst_;
    InformationState info_;
    std::vector<int> init_obs_;
};

// Greedy policy of a solved grid: plays the argmax action value at the
// current (exactly tracked) information state. Used to validate the solved
// gain against a long simulated average.
class SolvedGreedyPolicy : public Policy {
  public:
    SolvedGreedyPolicy(const SolveTables& tables, const AroeSolution& sol);
    void feed_init(int arm, int obs) override;
    int select(long t) override;
    void record(int arm, int obs) override;

  private:
    const SolveTables* tables_;
    const AroeSolution* sol_;
    InformationState info_;
    std::vector<int> init_obs_;
};

// Long-run average decision reward of the solved greedy policy, tracking the
// agent state directly on the grid through the successor table (fast path
// for many steps).
double simulated_greedy_average(const BanditInstance& inst, const SolveTables& tables,
                                const AroeSolution& sol, long steps, uint64_t env_seed);

// ---- Regret ----

struct RegretPoint {
    long horizon = 0;
    double regret = 0.0;
    std::string mode;  // "exact" or "delta"
    double std_error = 0.0;
    int n_replicates = 0;
};

// Exact mode: optimal expected T-horizon reward from each run's initial
// information state (oracle) minus the run's realized decision reward,
// averaged over runs.
std::vector<RegretPoint> exact_regret_curve(const BanditInstance& inst,
                                            const std::vector<RunRecord>& runs,
                                            const std::vector<long>& horizons,
                                            const OracleOptions& opts = {});

// Gap-sum mode: cumulative suboptimality gap of the played arms along each
// recorded trajectory, evaluated under the true model's solved grid.
std::vector<RegretPoint> delta_regret_curve(const BanditInstance& inst,
                                            const std::vector<RunRecord>& runs,
                                            const std::vector<long>& horizons,
                                            const SolveTables& true_tables,
                                            const AroeSolution& true_sol);

// CSV with the exact header `T,regret,mode,stderr,n_replicates`.
std::string regret_csv(const std::vector<RegretPoint>& points);

// ---- Diagnostics ----

struct DiagnosticsReport {
    long explore_steps = 0;
    double explore_envelope = 0.0;  // (sum |S^k|) * f(T) * (1 + T_max)
    bool explore_within_envelope = false;
    double t_max_constant = 0.0;
    long exploit_steps = 0;
    long belief_error_events = 0;  // exploit steps with ||true - est||_1 > eps
    double epsilon = 0.0;
    long belief_checked_steps = 0;
};

// f_at_horizon is the exploration schedule's f(T) for the run's horizon.
DiagnosticsReport diagnostics(const RunRecord& run, const BanditInstance& inst, double epsilon,
                              double f_at_horizon);

}  // namespace urbp
