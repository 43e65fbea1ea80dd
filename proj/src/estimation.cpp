#include "urbp/estimation.hpp"

#include "urbp/errors.hpp"

namespace urbp {

CountTables CountTables::zeros(const std::vector<int>& sizes) {
    CountTables t;
    t.sizes = sizes;
    const int K = static_cast<int>(sizes.size());
    t.plays.assign(K, 0);
    t.transitions.resize(K);
    t.visits.resize(K);
    for (int k = 0; k < K; ++k) {
        if (sizes[k] < 1) throw DomainError("CountTables: arm with no states");
        t.transitions[k].assign(static_cast<size_t>(sizes[k]) * sizes[k], 0);
        t.visits[k].assign(sizes[k], 0);
    }
    return t;
}

void CountTables::record_step(int prev_arm, int arm, int prev_obs, int obs) {
    const int K = static_cast<int>(sizes.size());
    if (arm < 0 || arm >= K) throw DomainError("record_step: arm out of range");
    if (obs < 0 || obs >= sizes[arm]) throw DomainError("record_step: observation out of range");
    ++plays[arm];
    if (prev_arm == arm) {
        if (prev_obs < 0 || prev_obs >= sizes[arm])
            throw DomainError("record_step: previous observation out of range");
        ++transitions[arm][static_cast<size_t>(prev_obs) * sizes[arm] + obs];
        ++visits[arm][prev_obs];
        ++version;
    }
}

long CountTables::total_plays() const {
    long s = 0;
    for (long p : plays) s += p;
    return s;
}

bool CountTables::consistent() const {
    for (size_t k = 0; k < sizes.size(); ++k)
        for (int i = 0; i < sizes[k]; ++i) {
            long row = 0;
            for (int j = 0; j < sizes[k]; ++j)
                row += transitions[k][static_cast<size_t>(i) * sizes[k] + j];
            if (row != visits[k][i]) return false;
        }
    return true;
}

EstimatedModel estimate(const CountTables& tables) {
    EstimatedModel em;
    em.version = tables.version;
    const int K = static_cast<int>(tables.sizes.size());
    em.raw.resize(K);
    em.normalized.reserve(K);
    for (int k = 0; k < K; ++k) {
        const int n = tables.sizes[k];
        Mat raw(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            const long c = tables.visits[k][i];
            const double denom = (c == 0) ? static_cast<double>(n) : static_cast<double>(c);
            for (int j = 0; j < n; ++j) {
                const long cnt = tables.transitions[k][static_cast<size_t>(i) * n + j];
                const double num = (cnt == 0) ? 1.0 : static_cast<double>(cnt);
                mat_at(raw, n, i, j) = num / denom;
            }
        }
        em.raw[k] = raw;
        // Row-normalize; rows are strictly positive by the indicator prior,
        // so this always yields a valid strictly positive matrix.
        Mat norm = raw;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += mat_at(norm, n, i, j);
            for (int j = 0; j < n; ++j) mat_at(norm, n, i, j) /= s;
        }
        em.normalized.push_back(make_transition_matrix(norm, n, 1e-9));
    }
    return em;
}

std::vector<std::pair<int, int>> exploration_set(const CountTables& tables, double threshold) {
    std::vector<std::pair<int, int>> w;
    for (size_t k = 0; k < tables.sizes.size(); ++k)
        for (int i = 0; i < tables.sizes[k]; ++i)
            if (static_cast<double>(tables.visits[k][i]) < threshold)
                w.emplace_back(static_cast<int>(k), i);
    return w;
}

}  // namespace urbp
