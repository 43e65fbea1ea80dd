#pragma once

// Exact finite-horizon optimal values by backward induction over reachable
// information states. Complexity is controlled by capping each arm's
// staleness counter: beyond the cap the belief row has mixed to within
// numerical precision of the stationary distribution, so states are merged.

#include <vector>

#include "urbp/belief.hpp"
#include "urbp/markov.hpp"

namespace urbp {

struct OracleOptions {
    int tau_cap = 96;           // staleness merge cap
    long max_states = 4000000;  // reachable-state budget
};

// Expected total reward of the optimal T-step policy started at `info`
// (arm states already observed, staleness as given). T = 0 yields 0.
double finite_horizon_oracle(const BanditInstance& inst, const std::vector<TransitionMatrix>& model,
                             const InformationState& info, int horizon,
                             const OracleOptions& opts = {});

double finite_horizon_oracle(const BanditInstance& inst, const InformationState& info, int horizon,
                             const OracleOptions& opts = {});

// Values for every (start, horizon) pair from one backward pass of length
// max(horizons). Result is row-major: value[i * horizons.size() + j] for
// start i, horizon j. Horizons must be nonnegative.
std::vector<double> finite_horizon_oracle_batch(const BanditInstance& inst,
                                                const std::vector<TransitionMatrix>& model,
                                                const std::vector<InformationState>& starts,
                                                const std::vector<int>& horizons,
                                                const OracleOptions& opts = {});

// Expected total T-step reward when every step plays the same arm.
double finite_horizon_fixed_arm(const BanditInstance& inst,
                                const std::vector<TransitionMatrix>& model,
                                const InformationState& info, int horizon, int arm,
                                const OracleOptions& opts = {});

// Oracle value averaged over the post-initialization information states: the
// initialization round observes each arm once, so the start state is
// (s, tau) with tau = (K, ..., 1) and s distributed by the product of
// stationary laws.
double oracle_mean_over_initializations(const BanditInstance& inst,
                                        const std::vector<TransitionMatrix>& model, int horizon,
                                        const OracleOptions& opts = {});

}  // namespace urbp
