#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "urbp/ala.hpp"
#include "urbp/errors.hpp"
#include "urbp/estimation.hpp"
#include "urbp/rng.hpp"
#include "urbp/sim.hpp"

using namespace urbp;

namespace {

BanditInstance dominance_instance() {
    std::vector<ArmSpec> specs(2);
    specs[0].n = 2;
    specs[0].matrix = {0.5, 0.5, 0.5, 0.5};
    specs[0].rewards = {2.0, 3.0};
    specs[1].n = 2;
    specs[1].matrix = {0.5, 0.5, 0.5, 0.5};
    specs[1].rewards = {1.0, 2.0};
    return validate_instance(specs);
}

BanditInstance two_arm_instance() {
    std::vector<ArmSpec> specs(2);
    specs[0].n = 2;
    specs[0].matrix = {0.7, 0.3, 0.4, 0.6};
    specs[1].n = 2;
    specs[1].matrix = {0.6, 0.4, 0.2, 0.8};
    return validate_instance(specs);
}

}  // namespace

TEST_CASE("count tables track plays and consecutive-play transitions") {
    CountTables t = CountTables::zeros({2, 3});
    CHECK(t.total_plays() == 0);
    CHECK(t.consistent());
    CHECK(t.version == 0);

    t.record_step(-1, 0, -1, 1);  // first play: no transition
    CHECK(t.plays[0] == 1);
    CHECK(t.version == 0);

    t.record_step(0, 0, 1, 0);  // consecutive same arm: transition 1 -> 0
    CHECK(t.plays[0] == 2);
    CHECK(t.transitions[0][1 * 2 + 0] == 1);
    CHECK(t.visits[0][1] == 1);
    CHECK(t.version == 1);

    t.record_step(0, 1, 0, 2);  // arm switch: play counted, no transition
    CHECK(t.plays[1] == 1);
    CHECK(t.transitions[1] == std::vector<long>(9, 0));
    CHECK(t.version == 1);

    t.record_step(1, 1, 2, 2);
    CHECK(t.transitions[1][2 * 3 + 2] == 1);
    CHECK(t.version == 2);
    CHECK(t.total_plays() == 4);
    CHECK(t.consistent());

    CHECK_THROWS_AS(t.record_step(0, 9, 0, 0), DomainError);
    CHECK_THROWS_AS(t.record_step(0, 0, 5, 0), DomainError);
    CHECK_THROWS_AS(t.record_step(0, 0, 0, -1), DomainError);
}

TEST_CASE("estimator applies the indicator prior") {
    SUBCASE("no data yields uniform normalized rows") {
        const CountTables t = CountTables::zeros({2});
        const EstimatedModel m = estimate(t);
        REQUIRE(m.raw.size() == 1);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(m.raw[0][i * 2 + j] == doctest::Approx(0.5));
                CHECK(m.normalized[0].at(i, j) == doctest::Approx(0.5));
            }
        CHECK(m.normalized[0].strictly_positive);
    }

    SUBCASE("raw rows can exceed unit mass") {
        CountTables t = CountTables::zeros({2});
        t.record_step(-1, 0, -1, 0);
        for (int i = 0; i < 10; ++i) t.record_step(0, 0, 0, 1);
        REQUIRE(t.consistent());
        const EstimatedModel m = estimate(t);
        // Row 0: cell (0,0) has zero count -> reads 1/10; cell (0,1) = 10/10.
        CHECK(m.raw[0][0] == doctest::Approx(0.1));
        CHECK(m.raw[0][1] == doctest::Approx(1.0));
        CHECK(m.normalized[0].at(0, 0) == doctest::Approx(1.0 / 11.0));
        CHECK(m.normalized[0].at(0, 1) == doctest::Approx(10.0 / 11.0));
        // Row 1 is unvisited -> uniform.
        CHECK(m.raw[0][2] == doctest::Approx(0.5));
        CHECK(m.raw[0][3] == doctest::Approx(0.5));
    }

    SUBCASE("fully visited rows are plain empirical frequencies") {
        CountTables t = CountTables::zeros({2});
        t.transitions[0][0] = 3;
        t.transitions[0][1] = 7;
        t.visits[0][0] = 10;
        t.plays[0] = 11;
        const EstimatedModel m = estimate(t);
        CHECK(m.raw[0][0] == doctest::Approx(0.3));
        CHECK(m.raw[0][1] == doctest::Approx(0.7));
        CHECK(m.normalized[0].at(0, 0) == doctest::Approx(0.3));
        CHECK(m.normalized[0].at(0, 1) == doctest::Approx(0.7));
    }

    SUBCASE("version snapshots the count tables") {
        CountTables t = CountTables::zeros({2});
        t.record_step(-1, 0, -1, 0);
        t.record_step(0, 0, 0, 1);
        const EstimatedModel m = estimate(t);
        CHECK(m.version == t.version);
    }
}

TEST_CASE("exploration set lists strictly deficient pairs in order") {
    CountTables t = CountTables::zeros({2, 2});
    t.visits[0][0] = 5;
    t.visits[0][1] = 2;
    t.visits[1][0] = 0;
    t.visits[1][1] = 7;

    const auto w = exploration_set(t, 5.0);
    REQUIRE(w.size() == 2);  // strict <: (0,0) with 5 visits is NOT deficient
    CHECK(w[0] == std::pair<int, int>(0, 1));
    CHECK(w[1] == std::pair<int, int>(1, 0));

    CHECK(exploration_set(t, 0.0).empty());
    CHECK(exploration_set(t, 8.0).size() == 4);
}

TEST_CASE("exploration schedules evaluate f(t) = L(t) log t") {
    const ExplorationSchedule f10 = ExplorationSchedule::fixed(10.0);
    CHECK(f10.value(1) == doctest::Approx(0.0));
    CHECK(f10.value(2) == doctest::Approx(6.9314718055994531));
    CHECK(f10.multiplier(123) == doctest::Approx(10.0));

    const ExplorationSchedule f1 = ExplorationSchedule::fixed(1.0);
    CHECK(f1.value(100) == doctest::Approx(4.6051701859880914));

    const ExplorationSchedule ad = ExplorationSchedule::adaptive();
    CHECK(ad.multiplier(1) == doctest::Approx(1.0));
    CHECK(ad.value(1) == doctest::Approx(0.0));
    // L(t) = 1 + log(1 + log t), nondecreasing and unbounded.
    CHECK(ad.multiplier(100) == doctest::Approx(1.0 + std::log(1.0 + std::log(100.0))));
    CHECK(ad.multiplier(1000) > ad.multiplier(100));
    ad.validate();

    // A decreasing or L(1) != 1 custom rate is rejected.
    CHECK_THROWS_AS(ExplorationSchedule::adaptive([](double) { return 0.5; }).validate(),
                    ConfigError);
    CHECK_THROWS_AS(
        ExplorationSchedule::adaptive([](double t) { return t >= 10 ? 1.0 / t + 1 : 1.0; })
            .validate(),
        ConfigError);
    CHECK_THROWS_AS(ExplorationSchedule::fixed(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(ExplorationSchedule::fixed(-3.0).validate(), ConfigError);
}

TEST_CASE("optimistic index never falls below the plain action value") {
    const BanditInstance inst = two_arm_instance();
    const BeliefGrid grid = build_grid(inst, 6);
    const SolveTables tables = build_tables(grid, inst);
    const AroeSolution sol = value_iterate(tables);
    const InformationState info = initial_information_state({0, 1});

    SUBCASE("zero radius reproduces the action value exactly") {
        for (int u = 0; u < 2; ++u) {
            const IndexResult r = optimistic_index(tables, sol, info, u, 0.0, 16, 7, 10);
            CHECK(r.value == doctest::Approx(action_value(tables, sol, info, u)).epsilon(1e-12));
            CHECK(r.origin == 0);
        }
    }

    SUBCASE("positive radii only increase the index") {
        int improved = 0;
        for (int trial = 0; trial < 500; ++trial) {
            const double radius = 0.02 + 0.3 * u64_to_unit(mix_u64(400, trial));
            const int u = trial % 2;
            const IndexResult r =
                optimistic_index(tables, sol, info, u, radius, 8, mix_u64(7, trial), trial + 2);
            const double base = action_value(tables, sol, info, u);
            CHECK(r.value >= base - 1e-12);
            if (r.value > base + 1e-9) ++improved;
        }
        CHECK(improved > 0);  // perturbing the model must sometimes help
    }

    SUBCASE("a larger radius never hurts") {
        for (int u = 0; u < 2; ++u) {
            const double small =
                optimistic_index(tables, sol, info, u, 0.05, 32, 11, 5).value;
            const double large =
                optimistic_index(tables, sol, info, u, 0.5, 32, 11, 5).value;
            CHECK(large >= small - 1e-9);
        }
    }

    CHECK_THROWS_AS(optimistic_index(tables, sol, info, 0, 0.1, 0, 1, 2), ConfigError);
}

TEST_CASE("agent exploits the dominant arm once deficits are cleared") {
    const BanditInstance inst = dominance_instance();
    ALAConfig cfg;
    cfg.schedule = ExplorationSchedule::fixed(1.0);
    cfg.tau0 = 3;
    cfg.seed = 5;
    // Pin the model to the truth and collapse the index ball so every exploit
    // step must pick the dominant arm (its gap is strictly positive).
    std::vector<TransitionMatrix> truth;
    for (const auto& a : inst.arms) truth.push_back(a.P);
    cfg.model_override = truth;
    cfg.force_radius_zero = true;

    ALAAgent agent(inst, cfg);
    Environment env(inst, 99);
    for (int k = 0; k < 2; ++k) {
        agent.feed_init(k, env.state(k));
        env.advance();
    }
    long exploit_picks_0 = 0, exploit_steps = 0;
    for (long t = 1; t <= 400; ++t) {
        const int arm = agent.select(t);
        if (agent.phase() == Phase::exploit) {
            ++exploit_steps;
            exploit_picks_0 += arm == 0 ? 1 : 0;
        }
        agent.record(arm, env.state(arm));
        env.advance();
    }
    CHECK(exploit_steps > 300);
    CHECK(exploit_picks_0 == exploit_steps);
    CHECK(agent.solves() >= 1);
    CHECK(agent.counts().total_plays() == 402);  // 2 init + 400 decisions
}

TEST_CASE("agent demands initialization before selecting") {
    const BanditInstance inst = two_arm_instance();
    ALAConfig cfg;
    cfg.tau0 = 3;
    ALAAgent agent(inst, cfg);
    CHECK_THROWS_AS(agent.select(1), DomainError);
    agent.feed_init(0, 0);
    CHECK_THROWS_AS(agent.select(1), DomainError);
}

TEST_CASE("exploration keeps the incumbent arm while it stays deficient") {
    const BanditInstance inst = two_arm_instance();
    ALAConfig cfg;
    cfg.schedule = ExplorationSchedule::fixed(100.0);
    cfg.tau0 = 3;
    cfg.seed = 3;
    ALAAgent agent(inst, cfg);
    Environment env(inst, 44);
    for (int k = 0; k < 2; ++k) {
        agent.feed_init(k, env.state(k));
        env.advance();
    }

    // t = 1: f(1) = 0, nothing is deficient, so the step exploits.
    const int first = agent.select(1);
    CHECK(agent.phase() == Phase::exploit);
    agent.record(first, env.state(first));
    env.advance();

    // From t = 2 on, f(t) > 0 and all visit counts are zero: explore, and
    // keep playing the previous arm while it owns a deficient pair.
    std::vector<int> played;
    for (long t = 2; t <= 40; ++t) {
        const int arm = agent.select(t);
        CHECK(agent.phase() == Phase::explore);
        played.push_back(arm);
        agent.record(arm, env.state(arm));
        env.advance();
    }
    CHECK(played.front() == first);
    // A long run of the incumbent before any switch.
    int prefix = 0;
    while (prefix < static_cast<int>(played.size()) && played[prefix] == first) ++prefix;
    CHECK(prefix == static_cast<int>(played.size()));  // with L=100 nothing clears by t=40
}

TEST_CASE("finite-partition variant stays inside the computed optimal sets") {
    const BanditInstance inst = two_arm_instance();
    ALAConfig cfg;
    cfg.variant = ALAVariant::finite_partition;
    cfg.schedule = ExplorationSchedule::fixed(2.0);
    cfg.tau0 = 4;
    cfg.seed = 12;
    ALAAgent agent(inst, cfg);
    Environment env(inst, 7);
    for (int k = 0; k < 2; ++k) {
        agent.feed_init(k, env.state(k));
        env.advance();
    }
    for (long t = 1; t <= 300; ++t) {
        const int arm = agent.select(t);
        agent.record(arm, env.state(arm));
        env.advance();
    }
    CHECK(agent.fp_membership_checks() > 0);
    CHECK(agent.fp_membership_violations() == 0);
}

TEST_CASE("truncation selection reacts to mixing speed") {
    std::vector<ArmSpec> fast(2);
    fast[0].n = 2;
    fast[0].matrix = {0.5, 0.5, 0.5, 0.5};
    fast[1].n = 2;
    fast[1].matrix = {0.55, 0.45, 0.45, 0.55};
    const BanditInstance fast_inst = validate_instance(fast);

    std::vector<ArmSpec> slow(2);
    slow[0].n = 2;
    slow[0].matrix = {0.9, 0.1, 0.1, 0.9};
    slow[1].n = 2;
    slow[1].matrix = {0.85, 0.15, 0.2, 0.8};
    const BanditInstance slow_inst = validate_instance(slow);

    std::vector<TransitionMatrix> fast_model, slow_model;
    for (const auto& a : fast_inst.arms) fast_model.push_back(a.P);
    for (const auto& a : slow_inst.arms) slow_model.push_back(a.P);

    const Tau0Selection a = select_tau0_for_horizon(fast_inst, fast_model, 1000);
    const Tau0Selection b = select_tau0_for_horizon(slow_inst, slow_model, 1000);
    CHECK(a.achieved);
    CHECK(b.achieved);
    CHECK(a.tau0 >= 1);
    CHECK(b.tau0 > a.tau0);  // slow mixing needs a deeper truncation
    CHECK(a.variation <= a.threshold);
    CHECK(b.variation <= b.threshold);

    // Looser horizons allow shallower truncations.
    const Tau0Selection c = select_tau0_for_horizon(slow_inst, slow_model, 10);
    CHECK(c.tau0 <= b.tau0);
}

TEST_CASE("concentration report is deterministic and well-formed") {
    const BanditInstance inst = two_arm_instance();
    const ConcentrationReport rep = concentration_report(inst, 3.0, 0.25, 50, 4, 1234);
    // Decades 0 and 1 (t in 1..50), 2 arms x 4 entries each = 16 buckets.
    CHECK(rep.buckets.size() == 16);
    CHECK(rep.horizon == 50);
    CHECK(rep.n_runs == 4);
    long t_total = 0;
    for (const auto& b : rep.buckets) {
        CHECK((b.decade == 0 || b.decade == 1));
        CHECK(b.exceed_raw <= b.exploit_steps);
        CHECK(b.exceed_norm <= b.exploit_steps);
        CHECK(b.envelope_raw > 0.0);
        CHECK(b.envelope_norm >= b.envelope_raw);
        if (b.arm == 0 && b.row == 0 && b.col == 0) t_total += b.t_count;
    }
    CHECK(t_total == 50);

    const ConcentrationReport again = concentration_report(inst, 3.0, 0.25, 50, 4, 1234);
    CHECK(again.pass_fraction_raw == rep.pass_fraction_raw);
    CHECK(again.pass_fraction_norm == rep.pass_fraction_norm);
    REQUIRE(again.buckets.size() == rep.buckets.size());
    for (size_t i = 0; i < rep.buckets.size(); ++i) {
        CHECK(again.buckets[i].exceed_raw == rep.buckets[i].exceed_raw);
        CHECK(again.buckets[i].exploit_steps == rep.buckets[i].exploit_steps);
    }

    // Worker count must not change the tallies.
    const ConcentrationReport par = concentration_report(inst, 3.0, 0.25, 50, 4, 1234, 4);
    for (size_t i = 0; i < rep.buckets.size(); ++i) {
        CHECK(par.buckets[i].exceed_raw == rep.buckets[i].exceed_raw);
        CHECK(par.buckets[i].exceed_norm == rep.buckets[i].exceed_norm);
        CHECK(par.buckets[i].exploit_steps == rep.buckets[i].exploit_steps);
    }
}
