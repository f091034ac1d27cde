#pragma once

/// Small dense linear algebra for kernel and budget work: row-major flat
/// matrices, lower Cholesky, triangular solves, and power iteration for the
/// top eigenvalue of a symmetric PSD matrix.

#include <cmath>
#include <cstddef>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/rng.hpp"

namespace mlft {

/// In-place lower Cholesky of a symmetric positive definite matrix; returns
/// false (leaving a partial factor) if a pivot is not strictly positive.
inline bool cholesky_lower(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
        for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
    }
    return true;
}

/// Solve L y = b with L lower triangular.
inline std::vector<double> forward_solve(const std::vector<double>& L, std::size_t n,
                                         const std::vector<double>& b) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
        y[i] = s / L[i * n + i];
    }
    return y;
}

/// Solve L^T x = y with L lower triangular.
inline std::vector<double> backward_solve(const std::vector<double>& L, std::size_t n,
                                          const std::vector<double>& y) {
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
        x[i] = s / L[i * n + i];
    }
    return x;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
/// deterministic seeded start, to the given relative tolerance.
inline double power_iteration_sym(const std::vector<double>& a, std::size_t n, double rel_tol,
                                  std::uint64_t seed, int max_iters = 100000) {
    if (n == 0) return 0.0;
    Rng rng(mix_seed({seed, 0x706f776572ULL}));
    std::vector<double> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
    double prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * v[j];
            w[i] = s;
        }
        double lam = 0.0, nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lam += v[i] * w[i];
            nrm += w[i] * w[i];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
        if (it > 0 && std::abs(lam - prev) <= rel_tol * std::abs(lam)) return lam;
        prev = lam;
    }
    return prev;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace mlft
