#include "urbp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "urbp/errors.hpp"
#include "urbp/hash.hpp"
#include "urbp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace urbp {

namespace {

constexpr const char* kCodeVersion = "urbp 1.0.0";

std::string fmt_g6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) config_fail("unknown key \"" + it.key() + "\" in " + where);
}

}  // namespace

namespace {
ExperimentConfig parse_config_checked(const json& j);
}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        config_fail(std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_config_checked(j);
    } catch (const json::exception& e) {
        config_fail(std::string("bad value type: ") + e.what());
    }
}

namespace {
ExperimentConfig parse_config_checked(const json& j) {
    if (!j.is_object()) config_fail("top level must be an object");
    check_keys(j,
               {"instance", "tau0", "algorithms", "horizons", "replicates", "seed", "output_dir",
                "regret_mode", "write_runs", "diagnostics_epsilon"},
               "top level");

    ExperimentConfig cfg;
    if (!j.contains("instance")) config_fail("missing \"instance\"");
    const json& ji = j["instance"];
    check_keys(ji, {"arms", "generator"}, "instance");
    if (ji.contains("arms") == ji.contains("generator"))
        config_fail("instance needs exactly one of \"arms\" or \"generator\"");
    if (ji.contains("arms")) {
        for (const json& ja : ji["arms"]) {
            check_keys(ja, {"matrix", "rewards"}, "instance.arms[]");
            if (!ja.contains("matrix")) config_fail("arm missing \"matrix\"");
            const json& jm = ja["matrix"];
            const int n = static_cast<int>(jm.size());
            if (n < 1) config_fail("empty arm matrix");
            ArmSpec spec;
            spec.n = n;
            spec.matrix.assign(static_cast<size_t>(n) * n, 0.0);
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(jm[i].size()) != n) config_fail("arm matrix is not square");
                for (int c = 0; c < n; ++c) mat_at(spec.matrix, n, i, c) = jm[i][c].get<double>();
            }
            if (ja.contains("rewards")) {
                for (const json& r : ja["rewards"]) spec.rewards.push_back(r.get<double>());
                if (static_cast<int>(spec.rewards.size()) != n)
                    config_fail("rewards length must match the matrix size");
            }
            cfg.arm_specs.push_back(std::move(spec));
        }
        if (cfg.arm_specs.empty()) config_fail("instance.arms is empty");
    } else {
        const json& jg = ji["generator"];
        check_keys(jg, {"num_arms", "sizes", "floor", "seed"}, "instance.generator");
        GeneratorSpec g;
        g.num_arms = jg.value("num_arms", 0);
        if (jg.contains("sizes"))
            for (const json& s : jg["sizes"]) g.sizes.push_back(s.get<int>());
        g.floor = jg.value("floor", 0.1);
        g.seed = jg.value("seed", 1ull);
        if (g.num_arms < 1) config_fail("generator.num_arms must be >= 1");
        if (static_cast<int>(g.sizes.size()) != g.num_arms)
            config_fail("generator.sizes length must equal num_arms");
        if (!(g.floor > 0.0)) config_fail("generator.floor must be positive");
        cfg.generator = g;
    }

    cfg.tau0 = j.value("tau0", 8);
    if (cfg.tau0 < 1) config_fail("tau0 must be >= 1");

    if (!j.contains("algorithms") || j["algorithms"].empty())
        config_fail("missing or empty \"algorithms\"");
    std::set<std::string> names;
    for (const json& ja : j["algorithms"]) {
        check_keys(ja,
                   {"name", "kind", "L", "schedule", "tau0", "index_budget", "tie_break",
                    "resolve_every", "arm", "auto_tau0"},
                   "algorithms[]");
        AlgorithmSpec a;
        a.kind = ja.value("kind", "");
        if (a.kind != "ala" && a.kind != "ala_fp" && a.kind != "fixed_arm" && a.kind != "random" &&
            a.kind != "myopic")
            config_fail("unknown algorithm kind \"" + a.kind + "\"");
        a.name = ja.value("name", a.kind);
        if (!names.insert(a.name).second) config_fail("duplicate algorithm name \"" + a.name + "\"");
        if (a.kind == "ala" || a.kind == "ala_fp") {
            const std::string sched = ja.value("schedule", "fixed");
            if (sched == "adaptive") {
                if (ja.contains("L")) config_fail("\"L\" conflicts with schedule \"adaptive\"");
                a.ala.schedule = ExplorationSchedule::adaptive();
            } else if (sched == "fixed") {
                a.ala.schedule = ExplorationSchedule::fixed(ja.value("L", 100.0));
            } else {
                config_fail("schedule must be \"fixed\" or \"adaptive\"");
            }
            a.ala.tau0 = ja.value("tau0", cfg.tau0);
            a.ala.index_budget = ja.value("index_budget", 16);
            a.ala.resolve_every = ja.value("resolve_every", 1);
            const std::string tie = ja.value("tie_break", "deterministic");
            if (tie == "deterministic")
                a.ala.tie_break = TieBreak::deterministic_first;
            else if (tie == "seeded")
                a.ala.tie_break = TieBreak::seeded_uniform;
            else
                config_fail("tie_break must be \"deterministic\" or \"seeded\"");
            a.ala.variant =
                a.kind == "ala_fp" ? ALAVariant::finite_partition : ALAVariant::index_policy;
            a.auto_tau0 = ja.value("auto_tau0", false);
            if (a.auto_tau0 && a.kind != "ala_fp")
                config_fail("auto_tau0 is only supported for kind \"ala_fp\"");
        } else if (a.kind == "fixed_arm") {
            if (!ja.contains("arm")) config_fail("fixed_arm needs \"arm\" (1-based)");
            a.arm = ja["arm"].get<int>() - 1;
            if (a.arm < 0) config_fail("fixed_arm arm must be >= 1");
        }
        cfg.algorithms.push_back(std::move(a));
    }

    if (!j.contains("horizons") || j["horizons"].empty()) config_fail("missing \"horizons\"");
    for (const json& h : j["horizons"]) cfg.horizons.push_back(h.get<long>());
    for (size_t i = 0; i < cfg.horizons.size(); ++i) {
        if (cfg.horizons[i] < 1) config_fail("horizons must be >= 1");
        if (i > 0 && cfg.horizons[i] <= cfg.horizons[i - 1])
            config_fail("horizons must be strictly ascending");
    }

    cfg.replicates = j.value("replicates", 1);
    if (cfg.replicates < 1) config_fail("replicates must be >= 1");
    cfg.seed = j.value("seed", 1ull);
    cfg.output_dir = j.value("output_dir", "out");
    cfg.regret_mode = j.value("regret_mode", "exact");
    if (cfg.regret_mode != "exact" && cfg.regret_mode != "delta" && cfg.regret_mode != "both")
        config_fail("regret_mode must be exact, delta, or both");
    cfg.write_runs = j.value("write_runs", true);
    cfg.diagnostics_epsilon = j.value("diagnostics_epsilon", 0.1);

    // Validate the instance and arm references eagerly, before any run.
    const BanditInstance inst = build_instance(cfg);
    for (const auto& a : cfg.algorithms)
        if (a.kind == "fixed_arm" && a.arm >= inst.num_arms())
            config_fail("fixed_arm arm exceeds the number of arms");
    return cfg;
}
}  // namespace

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

BanditInstance build_instance(const ExperimentConfig& cfg) {
    if (cfg.generator)
        return random_instance(cfg.generator->num_arms, cfg.generator->sizes,
                               cfg.generator->floor, cfg.generator->seed);
    return validate_instance(cfg.arm_specs);
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.generator) {
        j["instance"]["generator"] = {{"num_arms", cfg.generator->num_arms},
                                      {"sizes", cfg.generator->sizes},
                                      {"floor", cfg.generator->floor},
                                      {"seed", cfg.generator->seed}};
    } else {
        json arms = json::array();
        for (const auto& spec : cfg.arm_specs) {
            json rows = json::array();
            for (int i = 0; i < spec.n; ++i) {
                json row = json::array();
                for (int c = 0; c < spec.n; ++c) row.push_back(mat_at(spec.matrix, spec.n, i, c));
                rows.push_back(row);
            }
            json arm = {{"matrix", rows}};
            if (!spec.rewards.empty()) arm["rewards"] = spec.rewards;
            arms.push_back(arm);
        }
        j["instance"]["arms"] = arms;
    }
    j["tau0"] = cfg.tau0;
    json algs = json::array();
    for (const auto& a : cfg.algorithms) {
        json ja = {{"name", a.name}, {"kind", a.kind}};
        if (a.kind == "ala" || a.kind == "ala_fp") {
            if (a.ala.schedule.kind == ExplorationSchedule::Kind::adaptive)
                ja["schedule"] = "adaptive";
            else
                ja["L"] = a.ala.schedule.L;
            ja["tau0"] = a.ala.tau0;
            ja["index_budget"] = a.ala.index_budget;
            ja["resolve_every"] = a.ala.resolve_every;
            ja["tie_break"] =
                a.ala.tie_break == TieBreak::deterministic_first ? "deterministic" : "seeded";
            if (a.auto_tau0) ja["auto_tau0"] = true;
        } else if (a.kind == "fixed_arm") {
            ja["arm"] = a.arm + 1;
        }
        algs.push_back(ja);
    }
    j["algorithms"] = algs;
    j["horizons"] = cfg.horizons;
    j["replicates"] = cfg.replicates;
    j["seed"] = cfg.seed;
    j["regret_mode"] = cfg.regret_mode;
    j["write_runs"] = cfg.write_runs;
    j["diagnostics_epsilon"] = cfg.diagnostics_epsilon;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::unique_ptr<Policy> make_policy(const AlgorithmSpec& a, const BanditInstance& inst,
                                    uint64_t agent_seed) {
    if (a.kind == "ala" || a.kind == "ala_fp") {
        ALAConfig cfg = a.ala;
        cfg.seed = agent_seed;
        return std::make_unique<ALAAgent>(inst, cfg);
    }
    if (a.kind == "fixed_arm") return std::make_unique<FixedArmPolicy>(a.arm);
    if (a.kind == "random") return std::make_unique<RandomPolicy>(inst.num_arms(), agent_seed);
    if (a.kind == "myopic") return std::make_unique<MyopicPolicy>(inst);
    throw ConfigError("unknown algorithm kind " + a.kind);
}

}  // namespace

uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("hash_file: cannot open " + path);
    uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    return h;
}

ResultsManifest run_experiment(const ExperimentConfig& cfg_in, int workers,
                               const std::string& out_override,
                               std::optional<uint64_t> seed_override) {
    const auto t_start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = cfg_in;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override) cfg.seed = *seed_override;
    if (workers < 1) workers = 1;

    const BanditInstance inst = build_instance(cfg);
    const long max_h = cfg.horizons.back();

    // Resolve auto tau0 before dispatch so every replicate agrees.
    std::vector<TransitionMatrix> true_model;
    for (const auto& a : inst.arms) true_model.push_back(a.P);
    for (auto& a : cfg.algorithms)
        if (a.auto_tau0) a.ala.tau0 = select_tau0_for_horizon(inst, true_model, max_h).tau0;

    fs::create_directories(cfg.output_dir);
    if (cfg.write_runs) fs::create_directories(cfg.output_dir + "/runs");

    const int A = static_cast<int>(cfg.algorithms.size());
    const int R = cfg.replicates;
    std::vector<std::vector<std::optional<RunRecord>>> runs(A);
    for (auto& v : runs) v.resize(R);

    ResultsManifest manifest;
    manifest.code_version = kCodeVersion;
    manifest.output_dir = cfg.output_dir;
    std::mutex fail_mutex;

    std::atomic<int> next_task{0};
    const int total_tasks = A * R;
    auto worker_fn = [&]() {
        for (;;) {
            const int task = next_task.fetch_add(1);
            if (task >= total_tasks) return;
            const int ai = task / R;
            const int rep = task % R;
            const uint64_t env_seed = mix_u64(cfg.seed, 101, static_cast<uint64_t>(rep));
            const uint64_t agent_seed =
                mix_u64(cfg.seed, 202, static_cast<uint64_t>(ai), static_cast<uint64_t>(rep));
            try {
                auto policy = make_policy(cfg.algorithms[ai], inst, agent_seed);
                RunRecord rec = simulate(inst, *policy, max_h, env_seed, false);
                rec.agent_seed = agent_seed;
                runs[ai][rep] = std::move(rec);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                manifest.failures.push_back({cfg.algorithms[ai].name, rep, e.what()});
            }
        }
    };
    {
        std::vector<std::thread> pool;
        const int n_threads = std::min(workers, total_tasks);
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    auto add_file = [&](const std::string& rel, const std::string& content) {
        write_text_file(cfg.output_dir + "/" + rel, content);
        manifest.files.push_back({rel, hex64(fnv1a64(content))});
    };

    // Canonical config echo; its hash identifies the experiment.
    const std::string config_echo = config_to_json(cfg).dump(2) + "\n";
    manifest.config_hash = hex64(fnv1a64(config_echo));
    add_file("config_echo.json", config_echo);

    if (cfg.write_runs)
        for (int ai = 0; ai < A; ++ai)
            for (int rep = 0; rep < R; ++rep)
                if (runs[ai][rep])
                    add_file("runs/" + cfg.algorithms[ai].name + "_rep" + std::to_string(rep) +
                                 ".csv",
                             run_record_csv(*runs[ai][rep]));

    // Solve the true model once if gap-sum regret is requested (or needed as
    // an exact-mode fallback).
    std::optional<BeliefGrid> true_grid;
    std::optional<SolveTables> true_tables;
    std::optional<AroeSolution> true_sol;
    auto ensure_true_solution = [&]() {
        if (true_sol) return;
        true_grid = build_grid(inst, cfg.tau0);
        true_tables = build_tables(*true_grid, inst, true_model, 0);
        true_sol = value_iterate(*true_tables);
    };

    std::vector<PlotSeries> exact_series, delta_series;
    for (int ai = 0; ai < A; ++ai) {
        std::vector<RunRecord> ok;
        for (int rep = 0; rep < R; ++rep)
            if (runs[ai][rep]) ok.push_back(*runs[ai][rep]);
        if (ok.empty()) continue;
        const std::string& name = cfg.algorithms[ai].name;

        bool want_exact = cfg.regret_mode == "exact" || cfg.regret_mode == "both";
        bool want_delta = cfg.regret_mode == "delta" || cfg.regret_mode == "both";
        if (want_exact) {
            try {
                auto pts = exact_regret_curve(inst, ok, cfg.horizons);
                add_file("regret_" + name + "_exact.csv", regret_csv(pts));
                exact_series.push_back({name, std::move(pts)});
            } catch (const OracleTooLargeError& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                manifest.failures.push_back(
                    {name, -1, std::string("exact regret fell back to delta: ") + e.what()});
                want_delta = true;
            }
        }
        if (want_delta) {
            ensure_true_solution();
            auto pts = delta_regret_curve(inst, ok, cfg.horizons, *true_tables, *true_sol);
            add_file("regret_" + name + "_delta.csv", regret_csv(pts));
            delta_series.push_back({name, std::move(pts)});
        }
    }

    if (!exact_series.empty()) {
        add_file("plot_regret_exact.svg",
                 render_regret_svg(exact_series, "Regret vs horizon (exact)", false));
        add_file("plot_regret_exact_logx.svg",
                 render_regret_svg(exact_series, "Regret vs horizon (exact)", true));
    }
    if (!delta_series.empty()) {
        add_file("plot_regret_delta.svg",
                 render_regret_svg(delta_series, "Regret vs horizon (delta)", false));
        add_file("plot_regret_delta_logx.svg",
                 render_regret_svg(delta_series, "Regret vs horizon (delta)", true));
    }

    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(manifest, cfg.output_dir + "/manifest.json");
    return manifest;
}

void write_manifest(const ResultsManifest& m, const std::string& path) {
    json j;
    j["config_hash"] = m.config_hash;
    j["code_version"] = m.code_version;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    json files = json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"fnv1a64", f.fnv1a64_hex}});
    j["files"] = files;
    json fails = json::array();
    for (const auto& f : m.failures)
        fails.push_back(
            {{"algorithm", f.algorithm}, {"replicate", f.replicate}, {"error", f.error}});
    j["failures"] = fails;
    write_text_file(path, j.dump(2) + "\n");
}

ResultsManifest read_manifest(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    ResultsManifest m;
    m.config_hash = j.value("config_hash", "");
    m.code_version = j.value("code_version", "");
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    for (const json& f : j.value("files", json::array()))
        m.files.push_back({f.value("path", ""), f.value("fnv1a64", "")});
    for (const json& f : j.value("failures", json::array()))
        m.failures.push_back(
            {f.value("algorithm", ""), f.value("replicate", -1), f.value("error", "")});
    m.output_dir = fs::path(path).parent_path().string();
    if (m.output_dir.empty()) m.output_dir = ".";
    return m;
}

std::vector<std::string> verify_manifest(const ResultsManifest& m) {
    std::vector<std::string> bad;
    for (const auto& f : m.files) {
        const std::string full = m.output_dir + "/" + f.path;
        try {
            if (hex64(hash_file(full)) != f.fnv1a64_hex) bad.push_back(f.path);
        } catch (const Error&) {
            bad.push_back(f.path);
        }
    }
    return bad;
}

LogFit fit_log_curve(const std::vector<std::pair<double, double>>& points_in) {
    if (points_in.size() < 4) throw FitError("fit_log_curve: need at least 4 points");
    auto points = points_in;
    std::sort(points.begin(), points.end());
    for (size_t i = 1; i < points.size(); ++i)
        if (points[i].first == points[i - 1].first)
            throw FitError("fit_log_curve: duplicate horizon values");
    if (points.front().first <= 0.0) throw FitError("fit_log_curve: horizons must be positive");

    const size_t n = points.size();
    auto ols = [n](const std::vector<double>& x, const std::vector<double>& y, double& a,
                   double& b) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        const double denom = n * sxx - sx * sx;
        if (std::abs(denom) < 1e-12) throw FitError("fit_log_curve: degenerate design");
        a = (n * sxy - sx * sy) / denom;
        b = (sy - a * sx) / n;
        double ssr = 0;
        for (size_t i = 0; i < n; ++i) {
            const double e = y[i] - (a * x[i] + b);
            ssr += e * e;
        }
        return ssr;
    };

    std::vector<double> lx(n), tx(n), y(n);
    for (size_t i = 0; i < n; ++i) {
        lx[i] = std::log(points[i].first);
        tx[i] = points[i].first;
        y[i] = points[i].second;
    }
    LogFit fit;
    const double ssr_log = ols(lx, y, fit.a, fit.b);
    double la, lb;
    const double ssr_lin = ols(tx, y, la, lb);
    double mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    double sst = 0;
    for (double v : y) sst += (v - mean) * (v - mean);
    fit.r2 = sst > 0 ? 1.0 - ssr_log / sst : 1.0;
    fit.super_log = ssr_lin + 1e-12 < ssr_log;
    fit.ratio_at_max = points.back().second / std::log(points.back().first);
    return fit;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

double map_coord(double v, double v0, double v1, double p0, double p1) {
    if (v1 - v0 < 1e-300) return (p0 + p1) / 2.0;
    return p0 + (v - v0) / (v1 - v0) * (p1 - p0);
}

}  // namespace

std::string render_regret_svg(const std::vector<PlotSeries>& series, const std::string& title,
                              bool log_x) {
    if (series.empty()) throw NoDataError("render_regret_svg: no series");
    for (const auto& s : series)
        if (s.points.empty())
            throw NoDataError("render_regret_svg: series \"" + s.label + "\" has no points");
    const double W = 720, H = 480, L = 72, Rm = 24, Tm = 44, Bm = 56;

    double x_min = 1e300, x_max = -1e300, y_min = 0.0, y_max = -1e300;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            const double x = log_x ? std::log10(static_cast<double>(p.horizon))
                                   : static_cast<double>(p.horizon);
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, p.regret - p.std_error);
            y_max = std::max(y_max, p.regret + p.std_error);
        }
    if (y_max <= y_min) y_max = y_min + 1.0;
    const double y_pad = 0.05 * (y_max - y_min);
    y_max += y_pad;
    if (y_min < 0.0) y_min -= y_pad;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"480\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" +
           title + (log_x ? " [log x]" : "") + "</text>\n";

    auto px = [&](double x) { return map_coord(x, x_min, x_max, L, W - Rm); };
    auto py = [&](double y) { return map_coord(y, y_min, y_max, H - Bm, Tm); };

    // Frame and ticks.
    svg += "<rect x=\"" + fmt_g6(L) + "\" y=\"" + fmt_g6(Tm) + "\" width=\"" +
           fmt_g6(W - L - Rm) + "\" height=\"" + fmt_g6(H - Tm - Bm) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    const int n_ticks = 6;
    for (int i = 0; i < n_ticks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / (n_ticks - 1);
        const double gx = px(fx);
        const double label = log_x ? std::pow(10.0, fx) : fx;
        svg += "<line x1=\"" + fmt_g6(gx) + "\" y1=\"" + fmt_g6(H - Bm) + "\" x2=\"" + fmt_g6(gx) +
               "\" y2=\"" + fmt_g6(H - Bm + 5) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt_g6(gx) + "\" y=\"" + fmt_g6(H - Bm + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_g6(label) + "</text>\n";

        const double fy = y_min + (y_max - y_min) * i / (n_ticks - 1);
        const double gy = py(fy);
        svg += "<line x1=\"" + fmt_g6(L - 5) + "\" y1=\"" + fmt_g6(gy) + "\" x2=\"" + fmt_g6(L) +
               "\" y2=\"" + fmt_g6(gy) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt_g6(L - 8) + "\" y=\"" + fmt_g6(gy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_g6(fy) + "</text>\n";
    }
    svg += "<text x=\"" + fmt_g6((L + W - Rm) / 2) + "\" y=\"" + fmt_g6(H - 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">horizon T" +
           std::string(log_x ? " (log scale)" : "") + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt_g6((Tm + H - Bm) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " +
           fmt_g6((Tm + H - Bm) / 2) + ")\">regret</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        const auto& pts = series[si].points;
        if (pts.empty()) continue;

        // Standard-error band.
        std::string band = "<polygon fill=\"" + std::string(color) +
                           "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (const auto& p : pts) {
            const double x = log_x ? std::log10(static_cast<double>(p.horizon))
                                   : static_cast<double>(p.horizon);
            band += fmt_g6(px(x)) + "," + fmt_g6(py(p.regret + p.std_error)) + " ";
        }
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
            const double x = log_x ? std::log10(static_cast<double>(it->horizon))
                                   : static_cast<double>(it->horizon);
            band += fmt_g6(px(x)) + "," + fmt_g6(py(it->regret - it->std_error)) + " ";
        }
        band += "\"/>\n";
        svg += band;

        std::string line = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                           "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : pts) {
            const double x = log_x ? std::log10(static_cast<double>(p.horizon))
                                   : static_cast<double>(p.horizon);
            line += fmt_g6(px(x)) + "," + fmt_g6(py(p.regret)) + " ";
        }
        line += "\"/>\n";
        svg += line;
        for (const auto& p : pts) {
            const double x = log_x ? std::log10(static_cast<double>(p.horizon))
                                   : static_cast<double>(p.horizon);
            svg += "<circle cx=\"" + fmt_g6(px(x)) + "\" cy=\"" + fmt_g6(py(p.regret)) +
                   "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }

        // Legend entry.
        const double ly = Tm + 16 + 18 * static_cast<double>(si);
        svg += "<line x1=\"" + fmt_g6(L + 10) + "\" y1=\"" + fmt_g6(ly) + "\" x2=\"" +
               fmt_g6(L + 34) + "\" y2=\"" + fmt_g6(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt_g6(L + 40) + "\" y=\"" + fmt_g6(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + series[si].label +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::string> emit_plots(const std::string& manifest_path) {
    const ResultsManifest m = read_manifest(manifest_path);
    // Collect regret CSVs per mode: files named regret_<algorithm>_<mode>.csv.
    std::vector<std::pair<std::string, PlotSeries>> entries;  // (mode, series)
    for (const auto& f : m.files) {
        const std::string& p = f.path;
        if (p.rfind("regret_", 0) != 0 || p.size() < 12 || p.substr(p.size() - 4) != ".csv")
            continue;
        const std::string stem = p.substr(7, p.size() - 11);  // <alg>_<mode>
        std::string mode, alg;
        for (const char* cand : {"exact", "delta"}) {
            const std::string suffix = std::string("_") + cand;
            if (stem.size() > suffix.size() &&
                stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
                mode = cand;
                alg = stem.substr(0, stem.size() - suffix.size());
            }
        }
        if (mode.empty()) continue;

        PlotSeries s;
        s.label = alg;
        std::istringstream in(read_text_file(m.output_dir + "/" + p));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            RegretPoint pt;
            std::istringstream ls(line);
            std::string field;
            std::getline(ls, field, ',');
            pt.horizon = std::stol(field);
            std::getline(ls, field, ',');
            pt.regret = std::stod(field);
            std::getline(ls, field, ',');
            pt.mode = field;
            std::getline(ls, field, ',');
            pt.std_error = std::stod(field);
            std::getline(ls, field, ',');
            pt.n_replicates = std::stoi(field);
            s.points.push_back(pt);
        }
        if (!s.points.empty()) entries.emplace_back(mode, std::move(s));
    }
    if (entries.empty()) throw NoDataError("emit_plots: manifest lists no regret curves");

    std::vector<std::string> written;
    for (const char* mode : {"exact", "delta"}) {
        std::vector<PlotSeries> group;
        for (auto& [mo, s] : entries)
            if (mo == mode) group.push_back(s);
        if (group.empty()) continue;
        const std::string title = std::string("Regret vs horizon (") + mode + ")";
        const std::string base = m.output_dir + "/plot_regret_" + mode;
        write_text_file(base + ".svg", render_regret_svg(group, title, false));
        write_text_file(base + "_logx.svg", render_regret_svg(group, title, true));
        written.push_back(base + ".svg");
        written.push_back(base + "_logx.svg");
    }
    return written;
}

}  // namespace urbp
