#include "urbp/belief.hpp"

#include <cmath>

namespace urbp {

static void check_info_shape(const InformationState& info, size_t num_arms) {
    if (info.state.size() != num_arms || info.tau.size() != num_arms)
        throw DomainError("information state: arm count mismatch");
    for (size_t k = 0; k < num_arms; ++k)
        if (info.tau[k] < 1) throw DomainError("information state: tau must be >= 1");
}

Belief belief_of(const InformationState& info, const std::vector<TransitionMatrix>& model) {
    check_info_shape(info, model.size());
    Belief b;
    b.m.reserve(model.size());
    for (size_t k = 0; k < model.size(); ++k) {
        if (info.state[k] < 0 || info.state[k] >= model[k].n)
            throw DomainError("information state: state index out of range");
        b.m.push_back(row_after_steps(model[k], info.state[k], info.tau[k]));
    }
    return b;
}

Belief belief_of(const InformationState& info, const BanditInstance& inst) {
    std::vector<TransitionMatrix> model;
    model.reserve(inst.arms.size());
    for (const auto& a : inst.arms) model.push_back(a.P);
    return belief_of(info, model);
}

double observation_probability(const Belief& b, int y, int u,
                               const std::vector<TransitionMatrix>& model) {
    if (u < 0 || u >= b.num_arms()) throw DomainError("observation_probability: bad arm");
    if (y < 0 || y >= model[u].n) throw DomainError("observation_probability: bad state");
    const Vec adv = row_times_mat(b.m[u], model[u].p, model[u].n);
    return adv[y];
}

Belief belief_update(const Belief& b, int y, int u, const std::vector<TransitionMatrix>& model) {
    const double v = observation_probability(b, y, u, model);
    if (v <= 1e-300)
        throw ImpossibleObservationError("belief_update: observation has zero probability");
    Belief out;
    out.m.reserve(b.m.size());
    for (int k = 0; k < b.num_arms(); ++k) {
        if (k == u) {
            Vec e(model[k].n, 0.0);
            e[y] = 1.0;
            out.m.push_back(std::move(e));
        } else {
            out.m.push_back(row_times_mat(b.m[k], model[k].p, model[k].n));
        }
    }
    return out;
}

InformationState advance_information_state(const InformationState& info, int u, int y,
                                           const BanditInstance& inst) {
    check_info_shape(info, inst.arms.size());
    if (u < 0 || u >= inst.num_arms()) throw DomainError("advance: bad arm");
    if (y < 0 || y >= inst.arms[u].num_states()) throw DomainError("advance: bad observation");
    InformationState out = info;
    for (int k = 0; k < inst.num_arms(); ++k) out.tau[k] = info.tau[k] + 1;
    out.state[u] = y;
    out.tau[u] = 1;
    return out;
}

Vec joint_belief(const Belief& b, long cap) {
    long size = 1;
    for (const auto& m : b.m) {
        size *= static_cast<long>(m.size());
        if (size > cap) throw DomainError("joint_belief: joint exceeds cap");
    }
    Vec joint(1, 1.0);
    for (const auto& m : b.m) {
        Vec next;
        next.reserve(joint.size() * m.size());
        for (double j : joint)
            for (double v : m) next.push_back(j * v);
        joint = std::move(next);
    }
    return joint;
}

double belief_distance(const Belief& a, const Belief& b, long cap) {
    if (a.num_arms() != b.num_arms()) throw DomainError("belief_distance: arm count mismatch");
    for (int k = 0; k < a.num_arms(); ++k)
        if (a.m[k].size() != b.m[k].size())
            throw DomainError("belief_distance: marginal shape mismatch");
    return l1_dist(joint_belief(a, cap), joint_belief(b, cap));
}

double factored_distance(const Belief& a, const Belief& b) {
    double s = 0.0;
    for (int k = 0; k < a.num_arms(); ++k) s += l1_dist(a.m[k], b.m[k]);
    return s;
}

double expected_reward(const Belief& b, int u, const BanditInstance& inst) {
    if (u < 0 || u >= inst.num_arms()) throw DomainError("expected_reward: bad arm");
    return dot(b.m[u], inst.arms[u].rewards);
}

InformationState initial_information_state(const std::vector<int>& obs) {
    const int K = static_cast<int>(obs.size());
    if (K == 0) throw DomainError("initial_information_state: no observations");
    InformationState info;
    info.state = obs;
    info.tau.resize(K);
    for (int k = 0; k < K; ++k) info.tau[k] = K - k;  // arm K played last -> tau 1
    // The clock is t = 0 here; the first decision happens at t = 1.
    return info;
}

}  // namespace urbp
