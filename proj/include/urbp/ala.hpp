#pragma once

// The adaptive learning agent: exploration driven by per-(arm, state) visit
// deficits against a logarithmic schedule, exploitation by an optimistic
// index built on the solved average-reward bias of the estimated model.
// Includes the adaptive (slowly growing) schedule variant and the
// finite-partition variant that acts from the snapped grid point's optimal
// set instead of optimizing an index at the exact belief.

#include <functional>
#include <memory>
#include <optional>

#include "urbp/estimation.hpp"
#include "urbp/grid.hpp"
#include "urbp/policy.hpp"
#include "urbp/solver.hpp"

namespace urbp {

// f(t) = L * log t (fixed) or L(t) * log t (adaptive; L nondecreasing with
// L(1) = 1, growing without bound). f(1) = 0 for both.
struct ExplorationSchedule {
    enum class Kind { fixed, adaptive };
    Kind kind = Kind::fixed;
    double L = 1.0;
    std::function<double(double)> L_fn;

    static ExplorationSchedule fixed(double L);
    static ExplorationSchedule adaptive();  // L(t) = 1 + log(1 + log t)
    static ExplorationSchedule adaptive(std::function<double(double)> L_fn);

    double multiplier(long t) const;  // L or L(t)
    double value(long t) const;       // f(t)
    void validate() const;            // probes adaptive L for the invariants
};

enum class TieBreak { deterministic_first, seeded_uniform };
enum class ALAVariant { index_policy, finite_partition };

struct ALAConfig {
    ExplorationSchedule schedule = ExplorationSchedule::fixed(100.0);
    ALAVariant variant = ALAVariant::index_policy;
    int tau0 = 8;              // grid truncation (= partition parameter)
    int index_budget = 16;     // random candidates per index evaluation
    TieBreak tie_break = TieBreak::deterministic_first;
    int resolve_every = 1;     // re-solve cadence in exploit steps (1 = every)
    uint64_t seed = 0;

    double vi_tol = 1e-9;
    long vi_max_iters = 100000;
    double gap_tol = 1e-8;

    // Test hooks: pin the model estimate and/or collapse the index ball.
    std::optional<std::vector<TransitionMatrix>> model_override;
    bool force_radius_zero = false;
};

// One optimistic-index evaluation: the maximum of the one-step action value
// over candidate transition matrices for the played arm within an L1 ball of
// the given radius around the estimate. Candidates: the estimate itself,
// per-target-column corner shifts moving radius/2 row mass, and seeded
// random interior points. origin: 0 = center, 1 = corner, 2 = random.
struct IndexResult {
    double value = 0.0;
    int origin = 0;
};

IndexResult optimistic_index(const SolveTables& tables, const AroeSolution& sol,
                             const InformationState& info, int u, double radius, int budget,
                             uint64_t seed, long t);

class ALAAgent : public Policy {
  public:
    ALAAgent(const BanditInstance& inst, const ALAConfig& cfg);

    void feed_init(int arm, int obs) override;
    int select(long t) override;
    void record(int arm, int obs) override;
    Phase phase() const override { return phase_; }
    std::optional<Belief> estimated_belief() const override;

    const CountTables& counts() const { return tables_; }
    const InformationState& info() const { return info_; }
    const BeliefGrid& grid() const { return grid_; }
    long solves() const { return solves_; }
    const long* index_origin_tally() const { return index_origin_; }  // [3]
    long fp_membership_checks() const { return fp_checks_; }
    long fp_membership_violations() const { return fp_violations_; }
    // Latest solved tables/solution (empty until the first exploit step).
    const std::optional<AroeSolution>& solution() const { return solution_; }
    const SolveTables& solve_tables() const { return solve_tables_; }

  private:
    void ensure_solution(long t);
    EstimatedModel current_estimate() const;

    BanditInstance inst_;  // known rewards/shapes; true dynamics unused
    ALAConfig cfg_;
    BeliefGrid grid_;
    CountTables tables_;
    EstimatedModel model_;
    InformationState info_;
    SolveTables solve_tables_;
    std::optional<AroeSolution> solution_;
    uint64_t solved_version_ = ~0ull;
    long exploits_since_solve_ = 0;
    long solves_ = 0;
    Phase phase_ = Phase::init;
    long t_ = 0;
    int init_fed_ = 0;
    int prev_arm_ = -1;
    int prev_obs_ = -1;
    long index_origin_[3] = {0, 0, 0};
    long fp_checks_ = 0;
    long fp_violations_ = 0;
};

// Smallest truncation parameter (probing tau0 = 2, 3, ... up to cap) whose
// solved bias varies less than max(span(h) / (2 * horizon), floor) across
// probed member states of every aggregated point; falls back to cap.
struct Tau0Selection {
    int tau0 = 0;
    double variation = 0.0;  // worst probed within-aggregate h variation
    double threshold = 0.0;
    bool achieved = false;
};

Tau0Selection select_tau0_for_horizon(const BanditInstance& inst,
                                      const std::vector<TransitionMatrix>& model, long horizon,
                                      int probe_len = 64, int cap = 64, double floor = 1e-9);

}  // namespace urbp
