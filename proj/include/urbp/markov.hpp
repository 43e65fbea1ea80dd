#pragma once

// Finite ergodic Markov chain machinery for the bandit arms: validation,
// stationary distributions, first-passage times and a measured geometric
// mixing certificate with its perturbation-sensitivity constant.

#include <cstdint>
#include <string>
#include <vector>

#include "urbp/linalg.hpp"

namespace urbp {

struct TransitionMatrix {
    int n = 0;
    Mat p;  // row-major, rows sum to 1
    bool strictly_positive = false;

    double at(int i, int j) const { return mat_at(p, n, i, j); }
    Vec row(int i) const { return Vec(p.begin() + static_cast<size_t>(i) * n,
                                      p.begin() + static_cast<size_t>(i + 1) * n); }
};

// Validate and normalize a raw row-major matrix. Rows must sum to 1 within
// `tol` (then they are renormalized exactly); entries must be nonnegative.
TransitionMatrix make_transition_matrix(const Mat& raw, int n, double tol = 1e-12);

// Max-absolute-row-sum distance between two chains on the same state space.
double matrix_l1_distance(const TransitionMatrix& a, const TransitionMatrix& b);

struct ArmModel {
    std::vector<std::string> labels;  // "a{arm}s{i}" by default; per-arm spaces are disjoint
    TransitionMatrix P;
    Vec rewards;  // nonnegative, one per state
    int num_states() const { return P.n; }
};

// Global constants of an instance used by the diagnostic envelopes.
struct InstanceConstants {
    double beta = 0.0;   // sum over t>=1 of 1/t^2 (truncated series + tail correction)
    double pi_min = 0.0; // min stationary probability across arms and states
    double r_max = 0.0;  // max reward across arms and states
    int s_max = 0;       // max number of states across arms
};

struct BanditInstance {
    std::vector<ArmModel> arms;
    InstanceConstants constants;
    int num_arms() const { return static_cast<int>(arms.size()); }
    // Product of state-space sizes, capped to avoid overflow.
    long joint_size() const {
        long s = 1;
        for (const auto& a : arms) {
            s *= a.num_states();
            if (s > (1L << 40)) return 1L << 40;
        }
        return s;
    }
};

// sum_{t=1..inf} 1/t^2, computed as the first 10^6 terms plus an
// Euler-Maclaurin tail correction; equals 1.64493... (pi^2/6).
double beta_constant();

// Raw per-arm inputs for building an instance.
struct ArmSpec {
    Mat matrix;  // row-major n x n
    int n = 0;
    Vec rewards;  // empty -> numeric labels 1..n
};

// Validates every arm (stochasticity, ergodicity), fills labels and numeric
// rewards where omitted, and computes the instance constants.
// Throws RowSumError / NegativeEntryError / ErgodicityError / DomainError.
BanditInstance validate_instance(const std::vector<ArmSpec>& specs, double row_tol = 1e-12);

// Irreducible + aperiodic test on the support graph of P.
bool is_ergodic(const TransitionMatrix& P);

// Unique stationary distribution of an ergodic chain (linear solve, residual
// checked at 1e-10; ConvergenceError if the polish fails to meet it).
Vec stationary_distribution(const TransitionMatrix& P);

// E[first passage time i -> j] for all pairs; the diagonal holds expected
// return times (1/pi_i).
Mat expected_hitting_times(const TransitionMatrix& P);

// Measured geometric mixing envelope: d(t) = max_x ||e_x P^t - pi||_1 over a
// probe window, tightest C * rho^t covering it, and the induced
// perturbation-sensitivity constants.
struct ErgodicityCertificate {
    Vec pi;
    double rho = 0.0;     // measured worst-case one-step contraction, in (0, 1)
    double C = 0.0;       // envelope constant, >= d(0)
    int window = 0;       // probe horizon used for the measurement
    Vec d;                // d[t] for t = 0..window
    double c1_infinity = 0.0;  // limit of c1(t) below
    long t_hat = 0;            // ceil(log_rho 1/C), clamped at 0

    // Sensitivity constant: a chain whose matrix is within delta (L1, induced)
    // of P has t-step distributions within c1(t) * delta of P's.
    double c1(double t) const;
};

// Builds and self-checks the certificate (envelope must cover every probed t
// with 1e-9 slack, else ErgodicityError).
ErgodicityCertificate ergodicity_certificate(const TransitionMatrix& P, int window = 64);

// |prod a_k - prod b_k| <= sum |a_k - b_k| for entries in [0,1].
// Returns (lhs, rhs); DomainError outside the unit interval.
std::pair<double, double> product_difference_bound(const Vec& a, const Vec& b);

// Row `s` of P^tau (distribution after tau steps from state s).
Vec row_after_steps(const TransitionMatrix& P, int s, long tau);

// Convenience: deterministically generated ergodic instance with all entries
// >= floor (used by tests and the config generator).
BanditInstance random_instance(int num_arms, const std::vector<int>& sizes, double floor,
                               uint64_t seed);

}  // namespace urbp
