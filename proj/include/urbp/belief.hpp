#pragma once

// Information states and factorized beliefs. Because actions never change the
// arm dynamics, the posterior over the joint state is always a product of
// per-arm marginals, and the pair (last observed state, steps since
// observation) per arm is a sufficient statistic.

#include <vector>

#include "urbp/markov.hpp"

namespace urbp {

// Per arm: the last observed state and the number of decision steps since
// that observation (1 = observed on the previous step). After any
// post-initialization play, min_k tau[k] == 1.
struct InformationState {
    std::vector<int> state;
    std::vector<int> tau;
    bool operator==(const InformationState& o) const { return state == o.state && tau == o.tau; }
};

// Product belief: one marginal row per arm.
struct Belief {
    std::vector<Vec> m;
    int num_arms() const { return static_cast<int>(m.size()); }
};

// Marginal of arm k is row state[k] of P_k^{tau[k]}.
Belief belief_of(const InformationState& info, const BanditInstance& inst);
Belief belief_of(const InformationState& info, const std::vector<TransitionMatrix>& model);

// Probability that the *next* state of arm u is y, i.e. (m_u P_u)_y.
double observation_probability(const Belief& b, int y, int u,
                               const std::vector<TransitionMatrix>& model);

// Posterior after playing u and seeing y: arm u collapses to the unit vector
// at y, every other arm advances one step. Throws ImpossibleObservationError
// when observation_probability is ~0 and DomainError on bad indices.
Belief belief_update(const Belief& b, int y, int u, const std::vector<TransitionMatrix>& model);

// Information-state transition: s[u] <- y, tau[u] <- 1, tau[k] += 1 for k != u.
InformationState advance_information_state(const InformationState& info, int u, int y,
                                           const BanditInstance& inst);

// Materialized joint distribution (product of marginals); refuses to build
// joints larger than `cap` entries.
Vec joint_belief(const Belief& b, long cap = 4096);

// || joint(a) - joint(b) ||_1 via materialization. DomainError on shape
// mismatch or cap overflow.
double belief_distance(const Belief& a, const Belief& b, long cap = 4096);

// Sum of per-arm marginal L1 distances: an upper bound on belief_distance
// (product-measure coupling), cheap enough for nearest-point scans.
double factored_distance(const Belief& a, const Belief& b);

// Expected reward of playing u at belief b: dot(m_u, rewards_u).
double expected_reward(const Belief& b, int u, const BanditInstance& inst);

// Canonical information state right after the K initialization plays (arm k
// played at step k, observing obs[k]): tau = (K, K-1, ..., 1).
InformationState initial_information_state(const std::vector<int>& obs);

}  // namespace urbp
