#include "urbp/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "urbp/rng.hpp"

namespace urbp {

TransitionMatrix make_transition_matrix(const Mat& raw, int n, double tol) {
    if (n <= 0 || raw.size() != static_cast<size_t>(n) * n)
        throw DomainError("transition matrix: bad shape");
    TransitionMatrix M;
    M.n = n;
    M.p = raw;
    M.strictly_positive = true;
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = mat_at(M.p, n, i, j);
            if (!std::isfinite(v)) throw NumericalError("transition matrix: non-finite entry");
            if (v < 0.0)
                throw NegativeEntryError("transition matrix: negative entry at (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
            if (v <= 0.0) M.strictly_positive = false;
            sum += v;
        }
        if (std::fabs(sum - 1.0) > tol)
            throw RowSumError("transition matrix: row " + std::to_string(i) + " sums to " +
                              std::to_string(sum));
        for (int j = 0; j < n; ++j) mat_at(M.p, n, i, j) /= sum;
    }
    return M;
}

double matrix_l1_distance(const TransitionMatrix& a, const TransitionMatrix& b) {
    if (a.n != b.n) throw DomainError("matrix_l1_distance: shape mismatch");
    double worst = 0.0;
    for (int i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.n; ++j) s += std::fabs(a.at(i, j) - b.at(i, j));
        worst = std::max(worst, s);
    }
    return worst;
}

double beta_constant() {
    static const double value = [] {
        const long N = 1000000;
        // Sum smallest terms first to keep the truncation error at the bottom
        // of the accumulator, then add the Euler-Maclaurin tail.
        double s = 0.0;
        for (long t = N; t >= 1; --t) s += 1.0 / (static_cast<double>(t) * t);
        const double dn = static_cast<double>(N);
        s += 1.0 / dn - 1.0 / (2.0 * dn * dn) + 1.0 / (6.0 * dn * dn * dn);
        return s;  // 1.64493...
    }();
    return value;
}

bool is_ergodic(const TransitionMatrix& P) {
    const int n = P.n;
    const double eps = 1e-15;
    // Strong connectivity: forward and backward reachability from state 0.
    auto reach = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v) {
                const double w = forward ? P.at(u, v) : P.at(v, u);
                if (w > eps && !seen[v]) {
                    seen[v] = 1;
                    q.push(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reach(true) || !reach(false)) return false;
    // Aperiodicity: gcd of (dist[u] + 1 - dist[v]) over support edges, with
    // BFS distances from state 0.
    std::vector<long> dist(n, -1);
    std::queue<int> q;
    q.push(0);
    dist[0] = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v)
            if (P.at(u, v) > eps && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    long g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (P.at(u, v) > eps) g = std::gcd(g, std::labs(dist[u] + 1 - dist[v]));
    return g == 1;
}

Vec stationary_distribution(const TransitionMatrix& P) {
    const int n = P.n;
    if (n == 1) return {1.0};
    // Solve pi (P - I) = 0 with the normalization sum(pi) = 1: transpose the
    // system, replace the last equation by the normalization row.
    Mat A(static_cast<size_t>(n) * n, 0.0);
    Vec b(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            mat_at(A, n, i, j) = P.at(j, i) - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) mat_at(A, n, n - 1, j) = 1.0;
    b[n - 1] = 1.0;
    Vec pi = gauss_solve(A, b, n);
    for (double& v : pi) v = std::max(v, 0.0);
    double s = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& v : pi) v /= s;
    const Vec piP = row_times_mat(pi, P.p, n);
    if (l1_dist(piP, pi) > 1e-10)
        throw ConvergenceError("stationary_distribution: residual above 1e-10",
                               l1_dist(piP, pi));
    return pi;
}

Mat expected_hitting_times(const TransitionMatrix& P) {
    const int n = P.n;
    Mat H(static_cast<size_t>(n) * n, 0.0);
    const Vec pi = stationary_distribution(P);
    for (int target = 0; target < n; ++target) {
        if (n == 1) {
            mat_at(H, n, 0, 0) = 1.0;
            continue;
        }
        // First-passage system over the non-target states:
        // x_i = 1 + sum_{l != target} p_il x_l
        const int m = n - 1;
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (i != target) idx.push_back(i);
        Mat A(static_cast<size_t>(m) * m, 0.0);
        Vec b(m, 1.0);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c)
                mat_at(A, m, r, c) = (r == c ? 1.0 : 0.0) - P.at(idx[r], idx[c]);
        const Vec x = gauss_solve(A, b, m);
        for (int r = 0; r < m; ++r) mat_at(H, n, idx[r], target) = x[r];
        mat_at(H, n, target, target) = 1.0 / pi[target];  // expected return time
    }
    return H;
}

Vec row_after_steps(const TransitionMatrix& P, int s, long tau) {
    if (s < 0 || s >= P.n || tau < 0) throw DomainError("row_after_steps: bad arguments");
    Vec v(P.n, 0.0);
    v[s] = 1.0;
    if (tau <= 48) {
        for (long t = 0; t < tau; ++t) v = row_times_mat(v, P.p, P.n);
        return v;
    }
    const Mat pw = mat_pow(P.p, P.n, tau);
    return row_times_mat(v, pw, P.n);
}

double ErgodicityCertificate::c1(double t) const {
    const double th = static_cast<double>(t_hat);
    if (!(rho > 0.0 && rho < 1.0)) return th;
    const double rt = (t > 1e12) ? 0.0 : std::pow(rho, t);
    return th + C * (std::pow(rho, th) - rt) / (1.0 - rho);
}

ErgodicityCertificate ergodicity_certificate(const TransitionMatrix& P, int window) {
    ErgodicityCertificate cert;
    cert.pi = stationary_distribution(P);
    cert.window = window;
    cert.d.assign(window + 1, 0.0);
    const int n = P.n;
    // d(t) = max_x || e_x P^t - pi ||_1, computed by iterating every row.
    std::vector<Vec> rows(n);
    for (int x = 0; x < n; ++x) {
        rows[x].assign(n, 0.0);
        rows[x][x] = 1.0;
        cert.d[0] = std::max(cert.d[0], l1_dist(rows[x], cert.pi));
    }
    for (int t = 1; t <= window; ++t) {
        for (int x = 0; x < n; ++x) {
            rows[x] = row_times_mat(rows[x], P.p, n);
            cert.d[t] = std::max(cert.d[t], l1_dist(rows[x], cert.pi));
        }
    }
    // Worst one-step contraction ratio over the window; floors handle chains
    // that mix instantly (all later d are ~0).
    double rho = 0.0;
    for (int t = 0; t < window; ++t)
        if (cert.d[t] > 1e-13) rho = std::max(rho, cert.d[t + 1] / cert.d[t]);
    rho = std::max(rho, 1e-6);
    if (rho >= 1.0 - 1e-12)
        throw ErgodicityError("ergodicity_certificate: no contraction measured (rho >= 1)");
    cert.rho = rho;
    // Fit the constant only where d(t) is above rounding noise; past that
    // point the quotient d(t) / rho^t measures noise, not the chain.
    double C = cert.d[0];
    for (int t = 1; t <= window; ++t)
        if (cert.d[t] > 1e-13) C = std::max(C, cert.d[t] / std::pow(rho, t));
    cert.C = C;
    // Envelope must cover every probed point with tiny slack (it does by
    // construction; this guards the floating-point path).
    for (int t = 1; t <= window; ++t)
        if (cert.d[t] > cert.C * std::pow(cert.rho, t) + 1e-9)
            throw ErgodicityError("ergodicity_certificate: envelope violated at t=" +
                                  std::to_string(t));
    cert.t_hat = (cert.C <= 1.0)
                     ? 0
                     : static_cast<long>(std::ceil(std::log(1.0 / cert.C) / std::log(cert.rho)));
    cert.t_hat = std::max(cert.t_hat, 0L);
    const double th = static_cast<double>(cert.t_hat);
    cert.c1_infinity = th + cert.C * std::pow(cert.rho, th) / (1.0 - cert.rho);
    return cert;
}

std::pair<double, double> product_difference_bound(const Vec& a, const Vec& b) {
    if (a.size() != b.size() || a.empty())
        throw DomainError("product_difference_bound: size mismatch");
    double pa = 1.0, pb = 1.0, rhs = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0.0 || a[i] > 1.0 || b[i] < 0.0 || b[i] > 1.0)
            throw DomainError("product_difference_bound: entries must lie in [0,1]");
        pa *= a[i];
        pb *= b[i];
        rhs += std::fabs(a[i] - b[i]);
    }
    return {std::fabs(pa - pb), rhs};
}

BanditInstance validate_instance(const std::vector<ArmSpec>& specs, double row_tol) {
    if (specs.empty()) throw DomainError("validate_instance: no arms");
    BanditInstance inst;
    inst.constants.beta = beta_constant();
    inst.constants.pi_min = 1.0;
    for (size_t k = 0; k < specs.size(); ++k) {
        const auto& spec = specs[k];
        ArmModel arm;
        arm.P = make_transition_matrix(spec.matrix, spec.n, row_tol);
        if (!is_ergodic(arm.P))
            throw ErgodicityError("arm " + std::to_string(k + 1) + ": chain is not ergodic");
        if (spec.rewards.empty()) {
            // Numeric state labels double as rewards: state i pays i+1.
            arm.rewards.resize(spec.n);
            for (int i = 0; i < spec.n; ++i) arm.rewards[i] = static_cast<double>(i + 1);
        } else {
            if (spec.rewards.size() != static_cast<size_t>(spec.n))
                throw DomainError("arm " + std::to_string(k + 1) + ": reward count mismatch");
            arm.rewards = spec.rewards;
        }
        for (double r : arm.rewards) {
            if (!(r >= 0.0)) throw DomainError("rewards must be nonnegative");
            inst.constants.r_max = std::max(inst.constants.r_max, r);
        }
        arm.labels.resize(spec.n);
        for (int i = 0; i < spec.n; ++i)
            arm.labels[i] = "a" + std::to_string(k + 1) + "s" + std::to_string(i);
        const Vec pi = stationary_distribution(arm.P);
        for (double v : pi) inst.constants.pi_min = std::min(inst.constants.pi_min, v);
        inst.constants.s_max = std::max(inst.constants.s_max, spec.n);
        inst.arms.push_back(std::move(arm));
    }
    return inst;
}

BanditInstance random_instance(int num_arms, const std::vector<int>& sizes, double floor,
                               uint64_t seed) {
    if (num_arms <= 0 || sizes.size() != static_cast<size_t>(num_arms))
        throw DomainError("random_instance: bad shape");
    std::vector<ArmSpec> specs;
    for (int k = 0; k < num_arms; ++k) {
        const int n = sizes[k];
        if (floor * n >= 1.0) throw DomainError("random_instance: floor too large for size");
        ArmSpec spec;
        spec.n = n;
        spec.matrix.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            // Exponential spacings give a Dirichlet row, then mix toward
            // uniform so every entry is >= floor.
            Vec g(n);
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                const double u = uniform01(seed, 1000 + k, i, j);
                g[j] = -std::log(1.0 - u * (1.0 - 1e-12));
                s += g[j];
            }
            const double lam = floor * n;  // fraction of mass pinned uniform
            for (int j = 0; j < n; ++j)
                mat_at(spec.matrix, n, i, j) = lam / n + (1.0 - lam) * g[j] / s;
        }
        specs.push_back(std::move(spec));
    }
    return validate_instance(specs);
}

}  // namespace urbp
