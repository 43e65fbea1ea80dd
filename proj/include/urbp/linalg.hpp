#pragma once

// Small dense helpers for the tiny matrices used throughout (arm chains are a
// handful of states). Row-major storage, no external dependency.

#include <cmath>
#include <cstddef>
#include <vector>

#include "urbp/errors.hpp"

namespace urbp {

using Vec = std::vector<double>;
using Mat = std::vector<double>;  // row-major n x n

inline double& mat_at(Mat& m, int n, int i, int j) { return m[static_cast<size_t>(i) * n + j]; }
inline double mat_at(const Mat& m, int n, int i, int j) { return m[static_cast<size_t>(i) * n + j]; }

// out = v * M (row vector times matrix)
inline Vec row_times_mat(const Vec& v, const Mat& m, int n) {
    Vec out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const double* row = &m[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) out[j] += vi * row[j];
    }
    return out;
}

inline Mat mat_mul(const Mat& a, const Mat& b, int n) {
    Mat out(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double aik = mat_at(a, n, i, k);
            if (aik == 0.0) continue;
            const double* brow = &b[static_cast<size_t>(k) * n];
            double* orow = &out[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Mat mat_identity(int n) {
    Mat out(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) mat_at(out, n, i, i) = 1.0;
    return out;
}

// M^p by binary exponentiation.
inline Mat mat_pow(const Mat& m, int n, long p) {
    Mat result = mat_identity(n);
    Mat base = m;
    while (p > 0) {
        if (p & 1) result = mat_mul(result, base, n);
        base = mat_mul(base, base, n);
        p >>= 1;
    }
    return result;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l1_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

// Solve A x = b in place by Gaussian elimination with partial pivoting.
// Throws NumericalError on a (numerically) singular system.
inline Vec gauss_solve(Mat a, Vec b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::fabs(mat_at(a, n, col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(mat_at(a, n, r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best < 1e-14)
            throw NumericalError("gauss_solve: singular system (pivot " + std::to_string(best) + ")");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(mat_at(a, n, col, j), mat_at(a, n, piv, j));
            std::swap(b[col], b[piv]);
        }
        const double d = mat_at(a, n, col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = mat_at(a, n, r, col) / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) mat_at(a, n, r, j) -= f * mat_at(a, n, col, j);
            b[r] -= f * b[col];
        }
    }
    Vec x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= mat_at(a, n, i, j) * x[j];
        x[i] = s / mat_at(a, n, i, i);
    }
    return x;
}

}  // namespace urbp
