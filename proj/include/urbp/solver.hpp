#pragma once

// Average-reward solver on the truncated belief grid, with the derived
// suboptimality gaps, partition geometry, and the finite-horizon sandwich
// check used to validate the solution.

#include <optional>
#include <vector>

#include "urbp/grid.hpp"

namespace urbp {

// Model-dependent tables for one solve: marginals, rewards and observation
// kernels at every grid point. The successor table lives on the grid and is
// shared across solves (it is model-independent).
struct SolveTables {
    const BeliefGrid* grid = nullptr;
    const BanditInstance* inst = nullptr;
    std::vector<TransitionMatrix> model;  // one chain per arm
    uint64_t model_version = 0;           // caller-supplied staleness key
    std::vector<Vec> stationary;          // per arm
    // marginal[point][arm]: row of model[arm]^tau (or stationary for
    // aggregated coordinates). Also the observation kernel of playing `arm`.
    std::vector<std::vector<Vec>> marginal;
    // rbar[point*K + u] = expected reward of playing u at the point's belief.
    Vec rbar;

    Belief point_belief(int point) const { return Belief{marginal[point]}; }
};

SolveTables build_tables(const BeliefGrid& grid, const BanditInstance& inst,
                         const std::vector<TransitionMatrix>& model, uint64_t version = 0);
SolveTables build_tables(const BeliefGrid& grid, const BanditInstance& inst);  // true model

struct AroeSolution {
    double gain = 0.0;
    Vec h;  // bias, normalized to 0 at the lexicographically first grid point
    long iterations = 0;
    double span_residual = 0.0;
    int reference = 0;
    uint64_t model_version = 0;
};

// Relative value iteration with the span-seminorm stopping rule. The Bellman
// operator is max_u sum_y m_u(y) [r_u(y) + v(succ(x,u,y))]; the gain is the
// midpoint of the final difference vector. Throws ConvergenceError (carrying
// the last span) at the iteration cap. `warm` seeds the iteration.
// `allow_weak_mixing` suppresses the strict-positivity precondition check.
AroeSolution value_iterate(const SolveTables& tables, double tol = 1e-9, long max_iters = 100000,
                           const Vec* warm = nullptr, bool allow_weak_mixing = false,
                           std::vector<double>* span_history = nullptr);

// One-step action value at a grid point: sum_y m_u(y) [r_u(y) + h(succ)].
double action_value(const SolveTables& t, const AroeSolution& sol, int point, int u);

// Same for an arbitrary information state (successors snapped to the grid).
double action_value(const SolveTables& t, const AroeSolution& sol, const InformationState& info,
                    int u);

// Nonnegative suboptimality gap: max_u' L(x,u') - L(x,u).
double suboptimality_gap(const SolveTables& t, const AroeSolution& sol, int point, int u);
double suboptimality_gap(const SolveTables& t, const AroeSolution& sol,
                         const InformationState& info, int u);

// Arms within gap_tol of optimal, ascending order.
std::vector<int> optimal_action_set(const SolveTables& t, const AroeSolution& sol, int point,
                                    double gap_tol = 1e-8);
std::vector<int> optimal_action_set(const SolveTables& t, const AroeSolution& sol,
                                    const InformationState& info, double gap_tol = 1e-8);

// Partition geometry over the grid: each point is one set (explicit points
// are singletons, aggregates collect the tail tau >= tau0).
struct PartitionSet {
    int index = -1;
    bool aggregate = false;
    Belief center;                 // belief at the set's grid point
    std::vector<int> optimal_set;  // optimal arms at the center
    double diameter = 0.0;         // 0 for singletons; conservative bound otherwise
};

struct Partition {
    const BeliefGrid* grid = nullptr;
    std::vector<PartitionSet> sets;
    double epsilon = 0.0;
    // Per-arm radius of the aggregate coordinate around the stationary row.
    std::vector<double> agg_radius;
    std::vector<std::pair<int, int>> overlap_pairs;  // epsilon-extensions that may overlap

    // Conservative epsilon-extension membership test.
    bool contains(const Belief& psi, int set_index) const;
};

// Builds the partition from a solved grid. Aggregate diameters are probed
// over member tau in [tau0, tau0 + probe_len] plus the stationary limit.
Partition build_partition(const SolveTables& tables, const AroeSolution& sol, double epsilon,
                          int probe_len = 64, double gap_tol = 1e-8);

// Finite-horizon sandwich: for every grid point x and each T in [1, t_max],
// (h - sup h)(x) <= h_T(x) - T*gain <= (h - inf h)(x), where h_T is the exact
// T-step optimal value from a representative of x. Reports the worst
// violation (positive = violated by that much).
struct SandwichReport {
    int t_max = 0;
    double worst_violation = 0.0;  // max over points and T of constraint breach
    long points_checked = 0;
};

SandwichReport check_finite_horizon_sandwich(const SolveTables& tables, const AroeSolution& sol,
                                             int t_max);

}  // namespace urbp
