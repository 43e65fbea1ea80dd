#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "urbp/belief.hpp"
#include "urbp/errors.hpp"
#include "urbp/grid.hpp"
#include "urbp/rng.hpp"

using namespace urbp;

namespace {

BanditInstance two_arm_instance() {
    std::vector<ArmSpec> specs(2);
    specs[0].n = 2;
    specs[0].matrix = {0.7, 0.3, 0.4, 0.6};
    specs[1].n = 2;
    specs[1].matrix = {0.6, 0.4, 0.2, 0.8};
    return validate_instance(specs);
}

}  // namespace

TEST_CASE("initialization leaves a descending tau ladder") {
    const InformationState one = initial_information_state({1});
    CHECK(one.tau == std::vector<int>{1});
    const InformationState two = initial_information_state({0, 1});
    CHECK(two.tau == std::vector<int>{2, 1});
    CHECK(two.state == std::vector<int>{0, 1});
    const InformationState three = initial_information_state({1, 0, 1});
    CHECK(three.tau == std::vector<int>{3, 2, 1});
    CHECK_THROWS_AS(initial_information_state({}), DomainError);
}

TEST_CASE("belief marginals are matrix-power rows") {
    const BanditInstance inst = two_arm_instance();
    InformationState info;
    info.state = {0, 1};
    info.tau = {2, 1};
    const Belief b = belief_of(info, inst);
    CHECK(std::abs(b.m[0][0] - 0.61) < 1e-15);
    CHECK(std::abs(b.m[0][1] - 0.39) < 1e-15);
    CHECK(std::abs(b.m[1][0] - 0.2) < 1e-15);

    info.tau = {10000, 1};
    const Belief far = belief_of(info, inst);
    const Vec pi = stationary_distribution(inst.arms[0].P);
    CHECK(std::abs(far.m[0][0] - pi[0]) < 1e-9);

    info.tau = {0, 1};
    CHECK_THROWS_AS(belief_of(info, inst), DomainError);
}

TEST_CASE("observation probability advances the marginal one step") {
    const BanditInstance inst = two_arm_instance();
    std::vector<TransitionMatrix> model;
    for (const auto& a : inst.arms) model.push_back(a.P);
    InformationState info;
    info.state = {0, 0};
    info.tau = {1, 1};
    const Belief b = belief_of(info, inst);
    // m = (0.7, 0.3); (m P)_1 = 0.7*0.7 + 0.3*0.4 = 0.61.
    CHECK(std::abs(observation_probability(b, 0, 0, model) - 0.61) < 1e-15);
    CHECK(std::abs(observation_probability(b, 1, 0, model) - 0.39) < 1e-15);
}

TEST_CASE("posterior collapse and impossible observations") {
    std::vector<TransitionMatrix> model = {make_transition_matrix({0.0, 1.0, 1.0, 0.0}, 2),
                                           make_transition_matrix({0.5, 0.5, 0.5, 0.5}, 2)};
    Belief b;
    b.m = {{0.0, 1.0}, {0.5, 0.5}};
    // Arm 0 sits in state 2 and must jump to state 1 next.
    const Belief u = belief_update(b, 0, 0, model);
    CHECK(u.m[0][0] == doctest::Approx(1.0));
    CHECK(u.m[0][1] == doctest::Approx(0.0));
    CHECK_THROWS_AS(belief_update(b, 1, 0, model), ImpossibleObservationError);
}

TEST_CASE("information-state advance commutes with belief updates") {
    const BanditInstance inst = random_instance(2, {2, 3}, 0.1, 7);
    std::vector<TransitionMatrix> model;
    for (const auto& a : inst.arms) model.push_back(a.P);
    for (int trial = 0; trial < 50; ++trial) {
        InformationState info;
        for (int k = 0; k < 2; ++k) {
            info.state.push_back(
                static_cast<int>(uniform01(11, trial, k) * inst.arms[k].num_states()));
            info.tau.push_back(1 + static_cast<int>(uniform01(12, trial, k) * 6.0));
        }
        const Belief before = belief_of(info, inst);
        for (int u = 0; u < 2; ++u)
            for (int y = 0; y < inst.arms[u].num_states(); ++y) {
                const Belief via_info =
                    belief_of(advance_information_state(info, u, y, inst), inst);
                const Belief posterior = belief_update(before, y, u, model);
                // Advancing the collapsed posterior one world step matches the
                // belief of the advanced information state.
                for (int k = 0; k < 2; ++k) {
                    const Vec want =
                        k == u ? row_times_mat(posterior.m[k], model[k].p, model[k].n)
                               : posterior.m[k];
                    for (size_t j = 0; j < want.size(); ++j)
                        CHECK(std::abs(via_info.m[k][j] - want[j]) < 1e-12);
                }
            }
    }
}

TEST_CASE("joint beliefs multiply marginals") {
    Belief b;
    b.m = {{0.3, 0.7}, {0.25, 0.75}};
    const Vec j = joint_belief(b);
    REQUIRE(j.size() == 4);
    CHECK(std::abs(j[0] - 0.3 * 0.25) < 1e-15);
    CHECK(std::abs(j[1] - 0.3 * 0.75) < 1e-15);
    CHECK(std::abs(j[2] - 0.7 * 0.25) < 1e-15);
    CHECK(std::abs(j[3] - 0.7 * 0.75) < 1e-15);
    double sum = 0.0;
    for (double v : j) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);

    Belief huge;
    huge.m = {Vec(100, 0.01), Vec(100, 0.01)};
    CHECK_THROWS_AS(joint_belief(huge), DomainError);
}

TEST_CASE("distances: joint vs factored bound") {
    Belief a, b;
    a.m = {{1.0, 0.0}, {1.0, 0.0}};
    b.m = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK(belief_distance(a, b) == doctest::Approx(2.0));
    CHECK(factored_distance(a, b) == doctest::Approx(2.0));
    CHECK(belief_distance(a, a) == doctest::Approx(0.0));

    for (int trial = 0; trial < 200; ++trial) {
        Belief x, y;
        for (int k = 0; k < 2; ++k) {
            Vec mx(3), my(3);
            double sx = 0, sy = 0;
            for (int i = 0; i < 3; ++i) {
                mx[i] = 0.05 + uniform01(21, trial, 10 * k + i);
                my[i] = 0.05 + uniform01(22, trial, 10 * k + i);
                sx += mx[i];
                sy += my[i];
            }
            for (int i = 0; i < 3; ++i) {
                mx[i] /= sx;
                my[i] /= sy;
            }
            x.m.push_back(mx);
            y.m.push_back(my);
        }
        CHECK(belief_distance(x, y) <= factored_distance(x, y) + 1e-12);
    }
}

TEST_CASE("expected reward uses the played arm's marginal") {
    const BanditInstance inst = two_arm_instance();
    Belief b;
    b.m = {{0.7, 0.3}, {0.5, 0.5}};
    CHECK(expected_reward(b, 0, inst) == doctest::Approx(1.3));
    CHECK(expected_reward(b, 1, inst) == doctest::Approx(1.5));
    CHECK_THROWS_AS(expected_reward(b, 2, inst), DomainError);
}

TEST_CASE("grid enumeration matches the closed-form count") {
    const BanditInstance inst = two_arm_instance();
    const BeliefGrid g2 = build_grid(inst, 2);
    CHECK(g2.num_points() == 8);
    CHECK(grid_point_count({2, 2}, 2) == 8);

    for (int tau0 : {1, 2, 3, 5, 9}) {
        const BeliefGrid g = build_grid(inst, tau0);
        CHECK(g.num_points() == grid_point_count({2, 2}, tau0));
        std::set<std::string> names;
        for (int x = 0; x < g.num_points(); ++x) {
            names.insert(g.point_name(x));
            CHECK(g.lookup.at(g.points[x].key()) == x);
        }
        CHECK(static_cast<int>(names.size()) == g.num_points());
    }

    // tau0 = 1 aggregates everything into a single point.
    CHECK(grid_point_count({2, 2}, 1) == 1);
    CHECK(build_grid(inst, 1).num_points() == 1);

    // One arm: tau is pinned at 1, leaving one point per state.
    const BanditInstance solo = random_instance(1, {3}, 0.1, 3);
    CHECK(build_grid(solo, 4).num_points() == 3);
    CHECK(grid_point_count({3}, 4) == 3);

    CHECK_THROWS_AS(build_grid(inst, 500, 100), GridTooLargeError);
}

TEST_CASE("snapping, representatives, and the domain boundary") {
    const BanditInstance inst = two_arm_instance();
    const BeliefGrid g = build_grid(inst, 4);

    InformationState info;
    info.state = {0, 1};
    info.tau = {9, 1};
    const int x = g.snap_index(info);
    CHECK(g.points[x].coords[0].aggregated());
    CHECK(g.points[x].coords[1].state == 1);
    CHECK(g.points[x].coords[1].tau == 1);

    // Round trip through representatives.
    for (int p = 0; p < g.num_points(); ++p)
        CHECK(g.snap_index(g.representative(p, 96)) == p);

    info.tau = {2, 2};  // outside the reachable domain: no arm was just played
    CHECK_THROWS_AS(g.snap_index(info), DomainError);
}

TEST_CASE("successor table agrees with recomputed advances") {
    const BanditInstance inst = two_arm_instance();
    for (int tau0 : {2, 4}) {
        const BeliefGrid g = build_grid(inst, tau0);
        for (int x = 0; x < g.num_points(); ++x) {
            const InformationState rep = g.representative(x, 96);
            for (int u = 0; u < 2; ++u)
                for (int y = 0; y < inst.arms[u].num_states(); ++y) {
                    const int via_table = g.succ[x][u][y];
                    const int recomputed =
                        g.snap_index(advance_information_state(rep, u, y, inst));
                    CHECK(via_table == recomputed);
                }
        }
    }
}
