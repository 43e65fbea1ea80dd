#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "urbp/ala.hpp"
#include "urbp/errors.hpp"
#include "urbp/estimation.hpp"
#include "urbp/rng.hpp"
#include "urbp/sim.hpp"

namespace urbp {

namespace {

struct Tally {
    std::vector<long> exceed_raw;   // per (decade, entry)
    std::vector<long> exceed_norm;  // per (decade, entry)
    std::vector<long> exploit;      // per decade

    explicit Tally(size_t n_buckets, size_t n_decades)
        : exceed_raw(n_buckets, 0), exceed_norm(n_buckets, 0), exploit(n_decades, 0) {}

    void merge(const Tally& o) {
        for (size_t i = 0; i < exceed_raw.size(); ++i) exceed_raw[i] += o.exceed_raw[i];
        for (size_t i = 0; i < exceed_norm.size(); ++i) exceed_norm[i] += o.exceed_norm[i];
        for (size_t i = 0; i < exploit.size(); ++i) exploit[i] += o.exploit[i];
    }
};

}  // namespace

ConcentrationReport concentration_report(const BanditInstance& inst, double exploration_constant,
                                         double epsilon, int horizon, int n_runs, uint64_t seed,
                                         int workers) {
    if (horizon < 1 || n_runs < 1) throw DomainError("concentration_report: bad arguments");
    if (!(epsilon > 0.0)) throw DomainError("concentration_report: epsilon must be positive");
    if (workers < 1) workers = 1;

    const int K = inst.num_arms();
    std::vector<int> entry_offset(K + 1, 0);
    for (int k = 0; k < K; ++k) {
        const int n = inst.arms[k].num_states();
        entry_offset[k + 1] = entry_offset[k] + n * n;
    }
    const int n_entries = entry_offset[K];

    // Decade d covers t in [10^d, 10^(d+1)).
    int n_decades = 1;
    {
        long hi = 10;
        while (hi <= horizon) {
            ++n_decades;
            hi *= 10;
        }
    }
    std::vector<long> decade_lo(n_decades), decade_hi(n_decades);
    {
        long lo = 1;
        for (int d = 0; d < n_decades; ++d) {
            decade_lo[d] = lo;
            decade_hi[d] = std::min<long>(horizon, lo * 10 - 1);
            lo *= 10;
        }
    }
    std::vector<int> decade_of(static_cast<size_t>(horizon) + 1, 0);
    for (int d = 0; d < n_decades; ++d)
        for (long t = decade_lo[d]; t <= decade_hi[d]; ++t) decade_of[static_cast<size_t>(t)] = d;

    const size_t n_buckets = static_cast<size_t>(n_decades) * n_entries;
    Tally total(n_buckets, n_decades);
    std::mutex merge_mutex;
    std::atomic<int> next_run{0};

    auto worker_fn = [&]() {
        Tally local(n_buckets, n_decades);
        for (;;) {
            const int run = next_run.fetch_add(1);
            if (run >= n_runs) break;

            Environment env(inst, mix_u64(seed, 101, static_cast<uint64_t>(run)));
            ALAConfig cfg;
            cfg.schedule = ExplorationSchedule::fixed(exploration_constant);
            cfg.tau0 = 4;
            cfg.seed = mix_u64(seed, 202, static_cast<uint64_t>(run));
            ALAAgent agent(inst, cfg);
            for (int k = 0; k < K; ++k) {
                agent.feed_init(k, env.state(k));
                env.advance();
            }
            for (long t = 1; t <= horizon; ++t) {
                const int arm = agent.select(t);
                if (agent.phase() == Phase::exploit) {
                    const int d = decade_of[static_cast<size_t>(t)];
                    ++local.exploit[d];
                    const EstimatedModel em = estimate(agent.counts());
                    for (int k = 0; k < K; ++k) {
                        const int n = inst.arms[k].num_states();
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) {
                                const double truth = inst.arms[k].P.at(i, j);
                                const size_t b = static_cast<size_t>(d) * n_entries +
                                                 entry_offset[k] + i * n + j;
                                if (std::abs(mat_at(em.raw[k], n, i, j) - truth) > epsilon)
                                    ++local.exceed_raw[b];
                                if (std::abs(em.normalized[k].at(i, j) - truth) > epsilon)
                                    ++local.exceed_norm[b];
                            }
                    }
                }
                agent.record(arm, env.state(arm));
                env.advance();
            }
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        total.merge(local);
    };
    {
        std::vector<std::thread> pool;
        const int n_threads = std::min(workers, n_runs);
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    ConcentrationReport report;
    report.epsilon = epsilon;
    report.exploration_constant = exploration_constant;
    report.horizon = horizon;
    report.n_runs = n_runs;

    const double c_raw = 2.0;
    const double c_norm = 2.0 * K + 2.0;
    long pass_raw = 0, pass_norm = 0;
    for (int d = 0; d < n_decades; ++d) {
        const long t_count = decade_hi[d] - decade_lo[d] + 1;
        double env_raw = 0.0, env_norm = 0.0;
        for (long t = decade_lo[d]; t <= decade_hi[d]; ++t) {
            const double t2 = static_cast<double>(t) * static_cast<double>(t);
            env_raw += std::min(1.0, c_raw / t2);
            env_norm += std::min(1.0, c_norm / t2);
        }
        env_raw /= static_cast<double>(t_count);
        env_norm /= static_cast<double>(t_count);

        for (int k = 0; k < K; ++k) {
            const int n = inst.arms[k].num_states();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    ConcentrationBucket b;
                    b.decade = d;
                    b.arm = k;
                    b.row = i;
                    b.col = j;
                    b.t_count = t_count;
                    b.exploit_steps = total.exploit[d];
                    const size_t idx =
                        static_cast<size_t>(d) * n_entries + entry_offset[k] + i * n + j;
                    b.exceed_raw = total.exceed_raw[idx];
                    b.exceed_norm = total.exceed_norm[idx];
                    b.envelope_raw = env_raw;
                    b.envelope_norm = env_norm;
                    const double denom = static_cast<double>(n_runs) * t_count;
                    b.pass_raw = b.exceed_raw / denom <= env_raw + 1e-12;
                    b.pass_norm = b.exceed_norm / denom <= env_norm + 1e-12;
                    pass_raw += b.pass_raw ? 1 : 0;
                    pass_norm += b.pass_norm ? 1 : 0;
                    report.buckets.push_back(b);
                }
        }
    }
    const double nb = static_cast<double>(report.buckets.size());
    report.pass_fraction_raw = pass_raw / nb;
    report.pass_fraction_norm = pass_norm / nb;
    return report;
}

}  // namespace urbp
