#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "urbp/acceptance.hpp"
#include "urbp/belief.hpp"
#include "urbp/errors.hpp"
#include "urbp/experiment.hpp"
#include "urbp/grid.hpp"
#include "urbp/linalg.hpp"
#include "urbp/markov.hpp"
#include "urbp/oracle.hpp"
#include "urbp/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

std::string fmt17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_validate(const std::string& config_path) {
    const urbp::ExperimentConfig cfg = urbp::load_config_file(config_path);
    const urbp::BanditInstance inst = urbp::build_instance(cfg);
    std::cout << "valid: " << inst.num_arms() << " arm(s)\n";
    for (int k = 0; k < inst.num_arms(); ++k) {
        const auto& arm = inst.arms[k];
        const auto cert = urbp::ergodicity_certificate(arm.P);
        std::cout << "  arm " << (k + 1) << ": " << arm.num_states()
                  << " states, stationary mean reward "
                  << fmt17(urbp::dot(cert.pi, arm.rewards)) << ", rho " << fmt17(cert.rho)
                  << ", C " << fmt17(cert.C) << "\n";
    }
    std::cout << "algorithms: " << cfg.algorithms.size() << ", horizons: " << cfg.horizons.size()
              << ", replicates: " << cfg.replicates << "\n";
    return kExitOk;
}

int cmd_solve(const std::string& config_path, int tau0_override, const std::string& out_path) {
    const urbp::ExperimentConfig cfg = urbp::load_config_file(config_path);
    const urbp::BanditInstance inst = urbp::build_instance(cfg);
    const int tau0 = tau0_override > 0 ? tau0_override : cfg.tau0;
    const urbp::BeliefGrid grid = urbp::build_grid(inst, tau0);
    const urbp::SolveTables tables = urbp::build_tables(grid, inst);
    const urbp::AroeSolution sol = urbp::value_iterate(tables);
    std::cout << "grid points: " << grid.num_points() << " (tau0 = " << tau0 << ")\n";
    std::cout << "gain: " << fmt17(sol.gain) << "\n";
    std::cout << "iterations: " << sol.iterations << ", span residual: "
              << fmt17(sol.span_residual) << "\n";

    std::string csv = "point,gain,h";
    for (int u = 0; u < inst.num_arms(); ++u) csv += ",delta_arm" + std::to_string(u + 1);
    csv += "\n";
    for (int x = 0; x < grid.num_points(); ++x) {
        csv += grid.point_name(x) + "," + fmt17(sol.gain) + "," + fmt17(sol.h[x]);
        for (int u = 0; u < inst.num_arms(); ++u)
            csv += "," + fmt17(urbp::suboptimality_gap(tables, sol, x, u));
        csv += "\n";
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw urbp::Error("cannot write " + out_path);
    out << csv;
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_oracle(const std::string& config_path, long horizon) {
    const urbp::ExperimentConfig cfg = urbp::load_config_file(config_path);
    const urbp::BanditInstance inst = urbp::build_instance(cfg);
    const int K = inst.num_arms();
    if (inst.joint_size() > 4096)
        throw urbp::DomainError("oracle: too many initial observation combinations");

    std::vector<urbp::Vec> stationary;
    for (const auto& arm : inst.arms) stationary.push_back(urbp::stationary_distribution(arm.P));

    std::vector<urbp::InformationState> starts;
    std::vector<double> weights;
    std::vector<int> combo(K, 0);
    for (;;) {
        starts.push_back(urbp::initial_information_state(combo));
        double w = 1.0;
        for (int k = 0; k < K; ++k) w *= stationary[k][combo[k]];
        weights.push_back(w);
        int k = K - 1;
        while (k >= 0 && ++combo[k] == inst.arms[k].num_states()) combo[k--] = 0;
        if (k < 0) break;
    }

    std::vector<urbp::TransitionMatrix> model;
    for (const auto& a : inst.arms) model.push_back(a.P);
    const std::vector<double> values =
        urbp::finite_horizon_oracle_batch(inst, model, starts, {static_cast<int>(horizon)});

    double mean = 0.0;
    for (size_t i = 0; i < starts.size(); ++i) {
        std::string label;
        for (int k = 0; k < K; ++k)
            label += (k ? "," : "") + std::to_string(starts[i].state[k] + 1);
        std::cout << "init (" << label << "): " << fmt17(values[i]) << "  weight "
                  << fmt17(weights[i]) << "\n";
        mean += weights[i] * values[i];
    }
    std::cout << "stationary-weighted mean over horizon " << horizon << ": " << fmt17(mean)
              << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, int workers, const std::string& out_dir,
            long long seed, bool seed_set) {
    const urbp::ExperimentConfig cfg = urbp::load_config_file(config_path);
    std::optional<uint64_t> seed_override;
    if (seed_set) seed_override = static_cast<uint64_t>(seed);
    const urbp::ResultsManifest m = urbp::run_experiment(cfg, workers, out_dir, seed_override);
    std::cout << "wrote " << m.files.size() << " file(s) to " << m.output_dir << " in "
              << fmt17(m.wall_clock_seconds) << "s\n";
    for (const auto& f : m.failures)
        std::cout << "failure: " << f.algorithm << " rep " << f.replicate << ": " << f.error
                  << "\n";
    return m.failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_plot(const std::string& manifest_path) {
    for (const auto& p : urbp::emit_plots(manifest_path)) std::cout << "wrote " << p << "\n";
    return kExitOk;
}

int cmd_check(const std::vector<int>& only, int workers, const std::string& scratch) {
    const auto results = urbp::run_acceptance(only, workers, scratch);
    bool all_ok = true;
    for (const auto& r : results) {
        std::cout << urbp::format_criterion_line(r) << "\n";
        all_ok = all_ok && r.passed;
    }
    return all_ok ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"urbp: simulator and solver for adaptive learning in restless bandits"};
    app.require_subcommand(1);

    std::string config_path, out_path, manifest_path, scratch = "acceptance_out";
    int workers = default_workers();
    int tau0_override = 0;
    long horizon = 1000;
    long long seed = 0;
    std::vector<int> only;

    auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
    validate->add_option("config", config_path, "JSON config path")->required();

    auto* solve = app.add_subcommand("solve", "Solve the average-reward equation on the grid");
    solve->add_option("config", config_path, "JSON config path")->required();
    solve->add_option("--tau0", tau0_override, "Override the grid truncation depth");
    std::string solution_out = "solution.csv";
    solve->add_option("--out", solution_out, "Solution CSV path");

    auto* oracle = app.add_subcommand("oracle", "Exact finite-horizon optimal values");
    oracle->add_option("config", config_path, "JSON config path")->required();
    oracle->add_option("--horizon", horizon, "Horizon T")->required();

    auto* run = app.add_subcommand("run", "Run the configured experiment");
    run->add_option("config", config_path, "JSON config path")->required();
    run->add_option("--workers", workers, "Worker threads");
    run->add_option("--out", out_path, "Output directory override");
    const auto* seed_opt = run->add_option("--seed", seed, "Base seed override");

    auto* plot = app.add_subcommand("plot", "Re-render plots from a results manifest");
    plot->add_option("manifest", manifest_path, "manifest.json path")->required();

    auto* check = app.add_subcommand("check", "Run the acceptance criteria");
    check->add_option("--only", only, "Subset of criteria ids (1-9)")->delimiter(',');
    check->add_option("--workers", workers, "Worker threads");
    check->add_option("--out", scratch, "Scratch directory for the determinism check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(config_path);
        if (solve->parsed()) return cmd_solve(config_path, tau0_override, solution_out);
        if (oracle->parsed()) return cmd_oracle(config_path, horizon);
        if (run->parsed()) return cmd_run(config_path, workers, out_path, seed, seed_opt->count() > 0);
        if (plot->parsed()) return cmd_plot(manifest_path);
        if (check->parsed()) return cmd_check(only, workers, scratch);
    } catch (const urbp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const urbp::RowSumError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const urbp::NegativeEntryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const urbp::ErgodicityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const urbp::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
