#pragma once

// Experiment driver: JSON config ingestion, seeded replicate sweeps over
// algorithms on a worker pool, CSV/plot persistence, a hashed results
// manifest, and the logarithmic-growth fit used by the acceptance checks.

#include <optional>
#include <string>
#include <vector>

#include "urbp/ala.hpp"
#include "urbp/sim.hpp"

namespace urbp {

struct AlgorithmSpec {
    std::string name;
    std::string kind;  // ala | ala_fp | fixed_arm | random | myopic
    int arm = 0;       // fixed_arm only (0-based internally, 1-based in JSON)
    ALAConfig ala;     // ala / ala_fp
    bool auto_tau0 = false;  // ala_fp: pick tau0 for the largest horizon
};

struct GeneratorSpec {
    int num_arms = 0;
    std::vector<int> sizes;
    double floor = 0.1;
    uint64_t seed = 1;
};

struct ExperimentConfig {
    std::vector<ArmSpec> arm_specs;          // explicit instance, or
    std::optional<GeneratorSpec> generator;  // generated instance
    int tau0 = 8;                            // solver truncation for solve/delta
    std::vector<AlgorithmSpec> algorithms;
    std::vector<long> horizons;  // ascending
    int replicates = 1;
    uint64_t seed = 1;
    std::string output_dir = "out";
    std::string regret_mode = "exact";  // exact | delta | both
    bool write_runs = true;
    double diagnostics_epsilon = 0.1;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
BanditInstance build_instance(const ExperimentConfig& cfg);

struct ManifestFile {
    std::string path;  // relative to the output directory
    std::string fnv1a64_hex;
};

struct RunFailure {
    std::string algorithm;
    int replicate = -1;
    std::string error;
};

struct ResultsManifest {
    std::string config_hash;
    std::string code_version;
    std::vector<ManifestFile> files;
    std::vector<RunFailure> failures;
    double wall_clock_seconds = 0.0;
    std::string output_dir;
};

ResultsManifest run_experiment(const ExperimentConfig& cfg, int workers = 1,
                               const std::string& out_override = "",
                               std::optional<uint64_t> seed_override = std::nullopt);

void write_manifest(const ResultsManifest& m, const std::string& path);
ResultsManifest read_manifest(const std::string& path);
// Recomputes every listed file hash; returns mismatched paths.
std::vector<std::string> verify_manifest(const ResultsManifest& m);

// Least-squares fit R ~ a * log T + b, with the competing linear fit used to
// flag super-logarithmic growth.
struct LogFit {
    double a = 0.0;
    double b = 0.0;
    double r2 = 0.0;
    double ratio_at_max = 0.0;  // R(T_max) / log(T_max)
    bool super_log = false;     // linear model fits strictly better
};

LogFit fit_log_curve(const std::vector<std::pair<double, double>>& points);

// Deterministic standalone SVG: one curve (with stderr band) per series.
struct PlotSeries {
    std::string label;
    std::vector<RegretPoint> points;
};

std::string render_regret_svg(const std::vector<PlotSeries>& series, const std::string& title,
                              bool log_x);

// Re-renders plots from the regret CSVs listed in a manifest; returns the
// paths written.
std::vector<std::string> emit_plots(const std::string& manifest_path);

uint64_t hash_file(const std::string& path);  // FNV-1a of the raw bytes

}  // namespace urbp
