// Reference implementations used only by the tests. Everything here is
// written independently of the library internals: direct DFT sums, dense
// Jacobi eigensolves, Gauss-Jordan inverses, and a self-consistent-field
// ground-state iteration. Dense and slow on purpose.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

// Unnormalized forward transform X_k = sum_j x_j exp(-2*pi*i*j*k/n).
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * kPi * static_cast<double>(j * k % n) / static_cast<double>(n);
            acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * kPi * static_cast<double>(j * k % n) / static_cast<double>(n);
            acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc / static_cast<double>(n);
    }
    return out;
}

// Dense matrix of a linear map via unit impulses; column j is op(e_j).
inline std::vector<double> dense_from_op(
    std::size_t n_in, std::size_t n_out,
    const std::function<std::vector<double>(const std::vector<double>&)>& op) {
    std::vector<double> a(n_out * n_in, 0.0);
    for (std::size_t j = 0; j < n_in; ++j) {
        std::vector<double> e(n_in, 0.0);
        e[j] = 1.0;
        const std::vector<double> col = op(e);
        if (col.size() != n_out) throw std::runtime_error("dense_from_op: size mismatch");
        for (std::size_t i = 0; i < n_out; ++i) a[i * n_in + j] = col[i];
    }
    return a;
}

// In-place Gauss-Jordan inverse with partial pivoting.
inline std::vector<double> gauss_jordan_inverse(std::vector<double> a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300)
            throw std::runtime_error("gauss_jordan_inverse: singular");
        if (piv != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        const double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    return inv;
}

inline std::vector<double> matvec(const std::vector<double>& a, const std::vector<double>& x,
                                  std::size_t n) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += a[i * n + j] * x[j];
    return y;
}

struct EigResult {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column k is the k-th eigenvector
};

// Cyclic Jacobi eigensolve for a symmetric matrix.
inline EigResult jacobi_eig(std::vector<double> a, std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
    }
    EigResult r;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (diag[order[j]] < diag[order[i]]) std::swap(order[i], order[j]);
    r.values.resize(n);
    r.vectors.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = diag[order[k]];
        for (std::size_t i = 0; i < n; ++i) r.vectors[i * n + k] = v[i * n + order[k]];
    }
    return r;
}

// 1-D periodic second-difference operator -u'' on n points, spacing h,
// assembled densely: (A u)_i = (2 u_i - u_{i-1} - u_{i+1}) / h^2.
inline std::vector<double> laplace_1d(std::size_t n, double h) {
    std::vector<double> a(n * n, 0.0);
    const double s = 1.0 / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] = 2.0 * s;
        a[i * n + ((i + 1) % n)] -= s;
        a[i * n + ((i + n - 1) % n)] -= s;
    }
    return a;
}

// Ground state of (-d2/dx2 + v + beta u^2) u = mu u under h * sum u^2 = 1,
// positive-mean sign convention, by damped self-consistent iteration with a
// dense eigensolve at every step.
inline std::vector<double> scf_ground_state(const std::vector<double>& v, double h, double beta,
                                            double tol = 1e-13) {
    const std::size_t n = v.size();
    std::vector<double> u(n, 1.0);
    const std::vector<double> lap = laplace_1d(n, h);
    for (int iter = 0; iter < 2000; ++iter) {
        std::vector<double> a = lap;
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] += v[i] + beta * u[i] * u[i];
        const EigResult eig = jacobi_eig(a, n);
        std::vector<double> w(n);
        double nrm2 = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = eig.vectors[i * n + 0];
            nrm2 += w[i] * w[i];
            mean += w[i];
        }
        const double scale = (mean >= 0 ? 1.0 : -1.0) / std::sqrt(h * nrm2);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= scale;
            delta = std::max(delta, std::abs(w[i] - u[i]));
            u[i] = 0.5 * (u[i] + w[i]);
        }
        if (delta < tol) return u;
    }
    throw std::runtime_error("scf_ground_state: no convergence");
}

}  // namespace oracle
