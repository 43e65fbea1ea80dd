#pragma once

#include <string>
#include <vector>

#include "urbp/markov.hpp"

namespace urbp {

// One verification criterion of the release checklist. `detail` is a short
// human-readable summary of the measured quantities.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// The fixed two-arm, two-state instance used by the behavioral criteria.
// Arm 1 is stationary-worse and listed first so the exploration schedule
// front-loads it; both chains mix fast and all entries lie in [0.2, 0.8].
BanditInstance acceptance_instance();

// Runs the requested criteria (1..9; empty = all) and returns one result
// each, in ascending id order. `scratch_dir` receives the determinism
// criterion's two output trees.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, int workers,
                                            const std::string& scratch_dir);

// "criterion N [PASS|FAIL] <name> - <detail> (N.Ns)"
std::string format_criterion_line(const CriterionResult& r);

}  // namespace urbp
