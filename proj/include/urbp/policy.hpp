#pragma once

// Abstract arm-selection policy driven by the simulator: K initialization
// observations (arm k at init step k), then select/record per decision step.

#include <optional>

#include "urbp/belief.hpp"

namespace urbp {

enum class Phase { init, explore, exploit };

const char* phase_name(Phase p);

class Policy {
  public:
    virtual ~Policy() = default;

    // Initialization observation for arm k (called once per arm, in order).
    virtual void feed_init(int arm, int obs) = 0;

    // Choose the arm for decision step t (t = 1, 2, ...).
    virtual int select(long t) = 0;

    // Feedback: the selected arm's observed state.
    virtual void record(int arm, int obs) = 0;

    // Phase of the latest select (explore/exploit for learners).
    virtual Phase phase() const { return Phase::exploit; }

    // Learner's belief estimate at the latest select, if it keeps one.
    virtual std::optional<Belief> estimated_belief() const { return std::nullopt; }
};

}  // namespace urbp
