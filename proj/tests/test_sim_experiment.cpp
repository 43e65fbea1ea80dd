#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "urbp/ala.hpp"
#include "urbp/errors.hpp"
#include "urbp/experiment.hpp"
#include "urbp/hash.hpp"
#include "urbp/rng.hpp"
#include "urbp/sim.hpp"

using namespace urbp;
namespace fs = std::filesystem;

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

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

const char* kTinyConfig = R"json({
  "instance": {
    "arms": [
      {"matrix": [[0.7, 0.3], [0.4, 0.6]]},
      {"matrix": [[0.6, 0.4], [0.2, 0.8]]}
    ]
  },
  "tau0": 4,
  "algorithms": [
    {"name": "learner", "kind": "ala", "L": 2.0, "tau0": 3},
    {"name": "best_fixed", "kind": "fixed_arm", "arm": 2},
    {"name": "coin", "kind": "random"}
  ],
  "horizons": [50, 100],
  "replicates": 2,
  "seed": 77,
  "regret_mode": "both"
})json";

}  // namespace

TEST_CASE("environment paths depend only on the seed") {
    const BanditInstance inst = two_arm_instance();
    Environment a(inst, 42), b(inst, 42), c(inst, 43);
    bool any_diff = false;
    for (int i = 0; i < 200; ++i) {
        CHECK(a.state(0) == b.state(0));
        CHECK(a.state(1) == b.state(1));
        any_diff = any_diff || a.state(0) != c.state(0) || a.state(1) != c.state(1);
        a.advance();
        b.advance();
        c.advance();
    }
    CHECK(a.time() == 200);
    CHECK(any_diff);
}

TEST_CASE("simulation records initialization rows then decision rows") {
    const BanditInstance inst = two_arm_instance();
    FixedArmPolicy p(1);
    const RunRecord rec = simulate(inst, p, 10, 7);
    REQUIRE(rec.rows.size() == 12);
    CHECK(rec.rows[0].t == -1);  // arm 1 of 2: t = k + 1 - K
    CHECK(rec.rows[0].arm == 0);
    CHECK(rec.rows[1].t == 0);
    CHECK(rec.rows[1].arm == 1);
    for (int i = 2; i < 12; ++i) {
        CHECK(rec.rows[i].t == i - 1);
        CHECK(rec.rows[i].arm == 1);
        CHECK(rec.rows[i].phase == Phase::exploit);
    }
    CHECK(rec.init_obs.size() == 2);
    CHECK(rec.initial_info.tau == std::vector<int>{2, 1});
    CHECK(rec.initial_info.state == rec.init_obs);

    double total = 0.0, decision = 0.0;
    for (const auto& r : rec.rows) {
        total += r.reward;
        if (r.t >= 1) decision += r.reward;
    }
    CHECK(rec.cumulative_reward == doctest::Approx(total));
    CHECK(rec.decision_reward == doctest::Approx(decision));

    // Same seed, same record; the environment path is shared by policies.
    FixedArmPolicy q(1);
    const RunRecord rec2 = simulate(inst, q, 10, 7);
    CHECK(rec2.decision_reward == rec.decision_reward);
    FixedArmPolicy other(0);
    const RunRecord rec3 = simulate(inst, other, 10, 7);
    CHECK(rec3.init_obs == rec.init_obs);  // init round is policy-independent
}

TEST_CASE("run CSV uses the documented header and 1-based ids") {
    const BanditInstance inst = two_arm_instance();
    FixedArmPolicy p(0);
    const RunRecord rec = simulate(inst, p, 3, 11);
    const std::string csv = run_record_csv(rec);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,arm,observation,reward,phase");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream fields(line);
        std::string t, arm, obs, reward, phase;
        std::getline(fields, t, ',');
        std::getline(fields, arm, ',');
        std::getline(fields, obs, ',');
        std::getline(fields, reward, ',');
        std::getline(fields, phase, ',');
        CHECK(std::stoi(arm) >= 1);
        CHECK(std::stoi(obs) >= 1);
        CHECK((phase == "init" || phase == "explore" || phase == "exploit"));
    }
    CHECK(rows == 5);
}

TEST_CASE("myopic policy locks onto the dominant arm") {
    const BanditInstance inst = dominance_instance();
    MyopicPolicy p(inst);
    const RunRecord rec = simulate(inst, p, 50, 3);
    for (const auto& r : rec.rows)
        if (r.t >= 1) CHECK(r.arm == 0);
}

TEST_CASE("greedy fast path agrees with the simulated greedy policy") {
    const BanditInstance inst = two_arm_instance();
    const BeliefGrid grid = build_grid(inst, 8);
    const SolveTables tables = build_tables(grid, inst);
    const AroeSolution sol = value_iterate(tables);

    const long T = 2000;
    const uint64_t seed = 31;
    SolvedGreedyPolicy p(tables, sol);
    const RunRecord rec = simulate(inst, p, T, seed);
    const double fast = simulated_greedy_average(inst, tables, sol, T, seed);
    CHECK(std::abs(rec.decision_reward / static_cast<double>(T) - fast) < 1e-12);
}

TEST_CASE("regret curves expose the dominated arm's unit gap") {
    const BanditInstance inst = dominance_instance();
    const BeliefGrid grid = build_grid(inst, 3);
    const SolveTables tables = build_tables(grid, inst);
    const AroeSolution sol = value_iterate(tables);
    const std::vector<long> horizons = {10, 25, 50};

    std::vector<RunRecord> bad_runs, greedy_runs;
    for (int r = 0; r < 40; ++r) {
        FixedArmPolicy bad(1);
        bad_runs.push_back(simulate(inst, bad, 50, mix_u64(900, r)));
        SolvedGreedyPolicy good(tables, sol);
        greedy_runs.push_back(simulate(inst, good, 50, mix_u64(900, r)));
    }

    // Gap-sum mode: the dominated arm pays exactly 1 per step.
    const auto bad_delta = delta_regret_curve(inst, bad_runs, horizons, tables, sol);
    REQUIRE(bad_delta.size() == 3);
    for (size_t i = 0; i < horizons.size(); ++i) {
        CHECK(bad_delta[i].mode == "delta");
        CHECK(bad_delta[i].horizon == horizons[i]);
        CHECK(bad_delta[i].regret == doctest::Approx(static_cast<double>(horizons[i])));
        CHECK(bad_delta[i].std_error == doctest::Approx(0.0));
        CHECK(bad_delta[i].n_replicates == 40);
    }
    const auto good_delta = delta_regret_curve(inst, greedy_runs, horizons, tables, sol);
    for (const auto& pt : good_delta) CHECK(pt.regret == doctest::Approx(0.0));

    // Oracle-difference mode agrees in expectation (i.i.d. arms make the
    // oracle value T * 2.5 exactly, so only realized-reward noise remains).
    const auto bad_exact = exact_regret_curve(inst, bad_runs, horizons);
    for (size_t i = 0; i < horizons.size(); ++i) {
        CHECK(bad_exact[i].mode == "exact");
        const double T = static_cast<double>(horizons[i]);
        CHECK(std::abs(bad_exact[i].regret - T) < 5.0 * bad_exact[i].std_error + 1e-9);
        CHECK(bad_exact[i].std_error > 0.0);
    }
}

TEST_CASE("regret CSV uses the documented header") {
    std::vector<RegretPoint> pts(1);
    pts[0].horizon = 10;
    pts[0].regret = 1.25;
    pts[0].mode = "exact";
    pts[0].std_error = 0.5;
    pts[0].n_replicates = 4;
    const std::string csv = regret_csv(pts);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "T,regret,mode,stderr,n_replicates");
    REQUIRE(std::getline(in, line));
    CHECK(line == "10,1.25,exact,0.5,4");
}

TEST_CASE("diagnostics checks the belief error and the exploration envelope") {
    const BanditInstance inst = two_arm_instance();
    ALAConfig cfg;
    cfg.schedule = ExplorationSchedule::fixed(2.0);
    cfg.tau0 = 6;
    cfg.seed = 9;
    std::vector<TransitionMatrix> truth;
    for (const auto& a : inst.arms) truth.push_back(a.P);
    cfg.model_override = truth;  // estimated beliefs then equal true beliefs
    cfg.force_radius_zero = true;

    ALAAgent agent(inst, cfg);
    const RunRecord rec = simulate(inst, agent, 300, 15, true);
    CHECK(rec.est_beliefs.size() == 300);

    const DiagnosticsReport rep =
        diagnostics(rec, inst, 1e-9, ExplorationSchedule::fixed(2.0).value(300));
    CHECK(rep.exploit_steps + rep.explore_steps == 300);
    CHECK(rep.belief_checked_steps == rep.exploit_steps);
    CHECK(rep.belief_error_events == 0);
    CHECK(rep.t_max_constant > 1.0);
    CHECK(rep.explore_envelope > 0.0);
    CHECK(rep.explore_within_envelope);
    CHECK(static_cast<double>(rep.explore_steps) <= rep.explore_envelope);
}

TEST_CASE("log fit recovers planted coefficients") {
    SUBCASE("pure logarithm") {
        std::vector<std::pair<double, double>> pts;
        for (double T : {100.0, 300.0, 1000.0, 3000.0, 10000.0})
            pts.emplace_back(T, 3.0 * std::log(T) + 1.0);
        const LogFit fit = fit_log_curve(pts);
        CHECK(fit.a == doctest::Approx(3.0));
        CHECK(fit.b == doctest::Approx(1.0));
        CHECK(fit.r2 == doctest::Approx(1.0));
        CHECK(!fit.super_log);
        CHECK(fit.ratio_at_max ==
              doctest::Approx((3.0 * std::log(10000.0) + 1.0) / std::log(10000.0)));
    }
    SUBCASE("constant curve is a degenerate perfect fit") {
        std::vector<std::pair<double, double>> pts = {
            {10, 5.0}, {100, 5.0}, {1000, 5.0}, {10000, 5.0}};
        const LogFit fit = fit_log_curve(pts);
        CHECK(fit.a == doctest::Approx(0.0));
        CHECK(fit.r2 == doctest::Approx(1.0));
    }
    SUBCASE("linear growth is flagged as super-logarithmic") {
        std::vector<std::pair<double, double>> pts;
        for (double T : {100.0, 300.0, 1000.0, 3000.0, 10000.0}) pts.emplace_back(T, 0.5 * T);
        const LogFit fit = fit_log_curve(pts);
        CHECK(fit.super_log);
    }
    SUBCASE("input validation") {
        std::vector<std::pair<double, double>> few = {{10, 1}, {100, 2}, {1000, 3}};
        CHECK_THROWS_AS(fit_log_curve(few), FitError);
        std::vector<std::pair<double, double>> dup = {{10, 1}, {10, 2}, {100, 3}, {1000, 4}};
        CHECK_THROWS_AS(fit_log_curve(dup), FitError);
        std::vector<std::pair<double, double>> neg = {{-1, 1}, {10, 2}, {100, 3}, {1000, 4}};
        CHECK_THROWS_AS(fit_log_curve(neg), FitError);
    }
}

TEST_CASE("config parsing accepts the documented schema") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    CHECK(cfg.arm_specs.size() == 2);
    CHECK(!cfg.generator.has_value());
    CHECK(cfg.tau0 == 4);
    REQUIRE(cfg.algorithms.size() == 3);
    CHECK(cfg.algorithms[0].kind == "ala");
    CHECK(cfg.algorithms[0].ala.schedule.kind == ExplorationSchedule::Kind::fixed);
    CHECK(cfg.algorithms[0].ala.schedule.L == doctest::Approx(2.0));
    CHECK(cfg.algorithms[0].ala.tau0 == 3);
    CHECK(cfg.algorithms[1].kind == "fixed_arm");
    CHECK(cfg.algorithms[1].arm == 1);  // 1-based in JSON, 0-based here
    CHECK(cfg.horizons == std::vector<long>{50, 100});
    CHECK(cfg.replicates == 2);
    CHECK(cfg.seed == 77);
    CHECK(cfg.regret_mode == "both");
    CHECK(cfg.write_runs);  // default
    CHECK(cfg.diagnostics_epsilon == doctest::Approx(0.1));

    const BanditInstance inst = build_instance(cfg);
    CHECK(inst.num_arms() == 2);
    CHECK(inst.arms[0].P.at(0, 0) == doctest::Approx(0.7));
}

TEST_CASE("config parsing rejects malformed inputs") {
    auto must_fail = [](const std::string& text) {
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    };
    must_fail("not json at all");
    must_fail(R"({"horizons": [10]})");  // no instance and no algorithms
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "generator": {"num_arms": 1, "sizes": [2]},
      "algorithms": [{"name": "a", "kind": "random"}], "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random"}], "horizons": [10], "bogus_key": 1})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "no_such_kind"}], "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "fixed_arm", "arm": 2}], "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "fixed_arm", "arm": 0}], "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random"}], "horizons": [10, 10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random"}], "horizons": [100, 10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random"}, {"name": "a", "kind": "myopic"}],
      "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "ala", "auto_tau0": true}], "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "ala", "schedule": "adaptive", "L": 2.0}],
      "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "ala", "schedule": {"kind": "fixed"}}],
      "horizons": [10]})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random"}], "horizons": [10],
      "regret_mode": "sideways"})");
    must_fail(R"({
      "instance": {"arms": [{"matrix": [[0.5,0.5],[0.5,0.5]]}]},
      "algorithms": [{"name": "a", "kind": "random", "shoe_size": 9}], "horizons": [10]})");
}

TEST_CASE("experiments are reproducible byte for byte") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    const fs::path dir_a = fresh_dir("urbp_test_exp_a");
    const fs::path dir_b = fresh_dir("urbp_test_exp_b");

    const ResultsManifest ma = run_experiment(cfg, 2, dir_a.string());
    const ResultsManifest mb = run_experiment(cfg, 1, dir_b.string());
    CHECK(ma.failures.empty());
    CHECK(ma.config_hash == mb.config_hash);
    REQUIRE(ma.files.size() == mb.files.size());
    for (size_t i = 0; i < ma.files.size(); ++i) {
        CHECK(ma.files[i].path == mb.files[i].path);
        CHECK(ma.files[i].fnv1a64_hex == mb.files[i].fnv1a64_hex);
    }

    // Expected artifact classes all present.
    std::set<std::string> paths;
    for (const auto& f : ma.files) paths.insert(f.path);
    CHECK(paths.count("config_echo.json") == 1);
    CHECK(paths.count("regret_learner_exact.csv") == 1);
    CHECK(paths.count("regret_learner_delta.csv") == 1);
    CHECK(paths.count("regret_coin_exact.csv") == 1);
    CHECK(paths.count("plot_regret_exact.svg") == 1);
    CHECK(paths.count("plot_regret_delta.svg") == 1);
    CHECK(paths.count("plot_regret_exact_logx.svg") == 1);
    CHECK(paths.count("runs/learner_rep0.csv") == 1);
    CHECK(paths.count("runs/best_fixed_rep1.csv") == 1);

    // Manifest on disk verifies clean, then detects corruption.
    const ResultsManifest loaded = read_manifest((dir_a / "manifest.json").string());
    CHECK(loaded.config_hash == ma.config_hash);
    CHECK(verify_manifest(loaded).empty());
    {
        std::ofstream f(dir_a / "regret_learner_exact.csv", std::ios::app);
        f << "tampered\n";
    }
    const auto bad = verify_manifest(loaded);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0] == "regret_learner_exact.csv");

    // Re-rendering plots from the manifest reproduces identical bytes.
    const std::string svg_before = slurp(dir_b / "plot_regret_exact.svg");
    const auto written = emit_plots((dir_b / "manifest.json").string());
    CHECK(!written.empty());
    CHECK(slurp(dir_b / "plot_regret_exact.svg") == svg_before);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("experiment seed override changes results but stays deterministic") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    const fs::path dir_a = fresh_dir("urbp_test_seed_a");
    const fs::path dir_b = fresh_dir("urbp_test_seed_b");
    const ResultsManifest ma = run_experiment(cfg, 2, dir_a.string(), 5150);
    const ResultsManifest mb = run_experiment(cfg, 2, dir_b.string(), 5150);
    REQUIRE(ma.files.size() == mb.files.size());
    for (size_t i = 0; i < ma.files.size(); ++i)
        CHECK(ma.files[i].fnv1a64_hex == mb.files[i].fnv1a64_hex);

    const ResultsManifest base = run_experiment(cfg, 2, dir_a.string());
    bool any_difference = false;
    for (const auto& f : base.files)
        for (const auto& g : ma.files)
            if (f.path == g.path && f.fnv1a64_hex != g.fnv1a64_hex) any_difference = true;
    CHECK(any_difference);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("finite-partition algorithm can pick its truncation automatically") {
    const char* text = R"json({
      "instance": {
        "arms": [
          {"matrix": [[0.7, 0.3], [0.4, 0.6]]},
          {"matrix": [[0.6, 0.4], [0.2, 0.8]]}
        ]
      },
      "algorithms": [
        {"name": "fp", "kind": "ala_fp", "auto_tau0": true, "L": 2.0}
      ],
      "horizons": [60],
      "replicates": 1,
      "seed": 3,
      "regret_mode": "delta",
      "write_runs": false
    })json";
    const ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.algorithms[0].auto_tau0);
    const fs::path dir = fresh_dir("urbp_test_fp_auto");
    const ResultsManifest m = run_experiment(cfg, 1, dir.string());
    CHECK(m.failures.empty());
    bool saw_regret = false;
    for (const auto& f : m.files) saw_regret = saw_regret || f.path == "regret_fp_delta.csv";
    CHECK(saw_regret);
    fs::remove_all(dir);
}

TEST_CASE("SVG rendering is deterministic and validates input") {
    std::vector<PlotSeries> series(1);
    series[0].label = "demo";
    for (long T : {10, 100, 1000}) {
        RegretPoint p;
        p.horizon = T;
        p.regret = std::log(static_cast<double>(T));
        p.std_error = 0.1;
        p.n_replicates = 3;
        p.mode = "exact";
        series[0].points.push_back(p);
    }
    const std::string a = render_regret_svg(series, "demo title", false);
    const std::string b = render_regret_svg(series, "demo title", false);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("demo title") != std::string::npos);
    CHECK(a.find("#1f77b4") != std::string::npos);
    const std::string logx = render_regret_svg(series, "demo title", true);
    CHECK(logx != a);

    CHECK_THROWS_AS(render_regret_svg({}, "empty", false), NoDataError);
    std::vector<PlotSeries> hollow(1);
    hollow[0].label = "hollow";
    CHECK_THROWS_AS(render_regret_svg(hollow, "empty", false), NoDataError);
}

TEST_CASE("file hashing matches the reference implementation") {
    const fs::path p = fs::temp_directory_path() / "urbp_test_hash.bin";
    {
        std::ofstream f(p, std::ios::binary);
        f << "foobar";
    }
    CHECK(hex64(hash_file(p.string())) == "85944171f73967e8");
    CHECK(hash_file(p.string()) == fnv1a64("foobar"));
    fs::remove(p);
    CHECK_THROWS_AS(hash_file(p.string()), Error);
}
