#pragma once

// Transition-count tables and the indicator-prior estimator the learning
// agent maintains, plus the Monte Carlo concentration diagnostic for the
// estimator's per-entry error at exploitation steps.

#include <cstdint>
#include <utility>
#include <vector>

#include "urbp/markov.hpp"

namespace urbp {

// Per-arm play counts, consecutive-play transition counts, and row visit
// totals. Transitions are recorded only when the same arm was played at two
// consecutive decision steps, so C[i] = sum_j N[i][j] always.
struct CountTables {
    std::vector<int> sizes;
    std::vector<long> plays;                      // N^k: total plays of arm k
    std::vector<std::vector<long>> transitions;   // N^k_{ij}, row-major per arm
    std::vector<std::vector<long>> visits;        // C^k_i
    uint64_t version = 0;                         // bumps when transitions change

    static CountTables zeros(const std::vector<int>& sizes);

    // One decision step: arm was played and obs seen; prev_arm/prev_obs are
    // the previous step's (-1 when there is none). Counts a transition only
    // when prev_arm == arm.
    void record_step(int prev_arm, int arm, int prev_obs, int obs);

    long total_plays() const;
    bool consistent() const;  // C^k_i == sum_j N^k_{ij} everywhere
};

// Raw rows (indicator prior: zero-count cells read 1, unvisited rows read
// uniform) and their row-normalized strictly positive counterpart.
struct EstimatedModel {
    std::vector<Mat> raw;                      // p-bar, rows may not sum to 1
    std::vector<TransitionMatrix> normalized;  // p-hat, strictly positive
    uint64_t version = 0;                      // CountTables.version snapshot
};

EstimatedModel estimate(const CountTables& tables);

// Deficient (arm, state) pairs: visit count strictly below the exploration
// threshold. Sorted lexicographically.
std::vector<std::pair<int, int>> exploration_set(const CountTables& tables, double threshold);

// Monte Carlo check of the estimator's exploitation-step error tails.
// Runs the learning agent n_runs times on `inst`; at every exploitation step
// t it marks, per matrix entry, whether |raw - true| > epsilon and
// |normalized - true| > epsilon. Frequencies (over runs, jointly with "step t
// was an exploitation step") are bucketed per decade of t and per entry and
// compared against mean min(1, c/t^2) envelopes with c_raw = 2 and
// c_norm = 2K + 2 (K = number of arms).
struct ConcentrationBucket {
    int decade = 0;  // t in [10^decade, 10^(decade+1))
    int arm = 0, row = 0, col = 0;
    long t_count = 0;        // decision steps in the bucket
    long exploit_steps = 0;  // total exploitation events over runs
    long exceed_raw = 0;
    long exceed_norm = 0;
    double envelope_raw = 0.0;   // mean over t of min(1, 2/t^2)
    double envelope_norm = 0.0;  // mean over t of min(1, (2K+2)/t^2)
    bool pass_raw = false;
    bool pass_norm = false;
};

struct ConcentrationReport {
    double epsilon = 0.0;
    double exploration_constant = 0.0;
    int horizon = 0;
    int n_runs = 0;
    std::vector<ConcentrationBucket> buckets;
    double pass_fraction_raw = 0.0;
    double pass_fraction_norm = 0.0;
};

ConcentrationReport concentration_report(const BanditInstance& inst, double exploration_constant,
                                         double epsilon, int horizon, int n_runs, uint64_t seed,
                                         int workers = 1);

}  // namespace urbp
