#pragma once

/// The three parametric solvers F_l and their parameter samplers:
///  - NLS ground states via normalized gradient flow (semi-implicit Fourier
///    treatment of the Laplacian, explicit potential/nonlinearity, renormalize
///    every step),
///  - viscous Burgers via Lie splitting of a Godunov convection step and an
///    explicit-Euler diffusion step,
///  - the diagonal of the inverse of the 2-D operator -Lap_h + diag(v) via a
///    dense symmetric factorization.
/// Plus the per-problem sample centering.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/fft.hpp"
#include "mlft/rng.hpp"

namespace mlft {

enum class Problem { nls, burgers, elliptic };

inline const char* problem_name(Problem p) {
    switch (p) {
        case Problem::nls: return "nls";
        case Problem::burgers: return "burgers";
        default: return "elliptic";
    }
}

// ---------------------------------------------------------------------------
// NLS (Gross-Pitaevskii ground states)
// ---------------------------------------------------------------------------

struct NlsParams {
    double beta = 100.0;  // dispersion coefficient, > 0 in the paper regime
    double tau = 1.0;     // gradient-flow step
    double tol = 1e-10;   // max-node-change convergence threshold
    int max_iters = 100000;
};

struct NlsPotentialDist {
    int k_terms = 4;
    double alpha = 0.1;
    double amp_lo = -400.0, amp_hi = -200.0;
    double omega_lo = 40.0, omega_hi = 80.0;
    double inv_sigma_lo = 10.0, inv_sigma_hi = 20.0;
    double phase_lo = 0.0, phase_hi = 2.0 * 3.14159265358979323846;
};

/// Periodic distance on the unit torus, in [-1/2, 1/2).
inline double periodic_dist(double x, double c) {
    const double d = x - c;
    return d - std::floor(d + 0.5);
}

/// v(x) = sum_k A_k (alpha + cos(2 pi w_k x + phi_k)) * exp(-d(x,c_k)^2/(2 s_k^2)) / (sqrt(2 pi) s_k).
/// Draw order per term: A_k, w_k, 1/s_k, phi_k, c_k.
inline Field sample_nls_potential(const NlsPotentialDist& dist, Grid grid, std::uint64_t seed) {
    if (grid.dim != 1) throw ConfigError("nls potential: unsupported dimension " + std::to_string(grid.dim));
    const double pi = 3.14159265358979323846;
    Rng rng(seed);
    Field v(grid);
    for (int k = 0; k < dist.k_terms; ++k) {
        const double A = rng.uniform(dist.amp_lo, dist.amp_hi);
        const double w = rng.uniform(dist.omega_lo, dist.omega_hi);
        const double inv_s = rng.uniform(dist.inv_sigma_lo, dist.inv_sigma_hi);
        const double phi = rng.uniform(dist.phase_lo, dist.phase_hi);
        const double c = rng.uniform();
        const double s = 1.0 / inv_s;
        const double env = 1.0 / (std::sqrt(2.0 * pi) * s);
        for (int i = 0; i < grid.n; ++i) {
            const double x = i * grid.h();
            const double d = periodic_dist(x, c);
            v.a[i] += A * (dist.alpha + std::cos(2.0 * pi * w * x + phi)) * env *
                      std::exp(-d * d / (2.0 * s * s));
        }
    }
    return v;
}

/// Discrete Gross-Pitaevskii energy h * sum( |D+ u|^2/2 + v u^2/2 + beta u^4/4 ).
inline double nls_energy(const Field& v, const Field& u, double beta) {
    const int n = u.grid.n;
    const double h = u.grid.h();
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        const double du = (u.a[(i + 1) % n] - u.a[i]) / h;
        e += 0.5 * du * du + 0.5 * v.a[i] * u.a[i] * u.a[i] +
             0.25 * beta * u.a[i] * u.a[i] * u.a[i] * u.a[i];
    }
    return e * h;
}

struct NlsTrace {
    std::vector<double> energies;  // one entry per accepted iteration
    int iterations = 0;
};

/// Ground state of -u'' + v u + beta u^3 = mu u with mass h*sum(u^2) = 1 and
/// mean(u) > 0, from the normalized gradient flow started at u = 1.
inline Field solve_nls(const Field& v, const NlsParams& p, NlsTrace* trace = nullptr) {
    if (v.grid.dim != 1) throw SolverError("nls: unsupported dimension");
    const int n = v.grid.n;
    const double h = v.grid.h();
    const double pi = 3.14159265358979323846;

    // eigenvalues of -Lap_h (3-point periodic) under the DFT
    std::vector<double> lam(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(pi * k / n);
        lam[k] = 4.0 * s * s / (h * h);
    }

    Field u(v.grid, 1.0);  // unit mass: h * n = 1
    std::vector<cplx> uh(n), wh(n);
    std::vector<double> w(n);
    double residual = 0.0;
    for (int it = 0; it < p.max_iters; ++it) {
        for (int i = 0; i < n; ++i) w[i] = v.a[i] * u.a[i] + p.beta * u.a[i] * u.a[i] * u.a[i];
        for (int i = 0; i < n; ++i) {
            uh[i] = cplx(u.a[i], 0.0);
            wh[i] = cplx(w[i], 0.0);
        }
        fourier_forward(uh);
        fourier_forward(wh);
        for (int k = 0; k < n; ++k) uh[k] = (uh[k] - p.tau * wh[k]) / (1.0 + p.tau * lam[k]);
        fourier_inverse(uh);

        double mass = 0.0, mean = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = uh[i].real();
            mass += x * x;
            mean += x;
        }
        mass *= h;
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw SolverError("nls: gradient flow diverged at iteration " + std::to_string(it));
        const double scale = (mean < 0.0 ? -1.0 : 1.0) / std::sqrt(mass);

        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double next = uh[i].real() * scale;
            residual = std::max(residual, std::abs(next - u.a[i]));
            u.a[i] = next;
        }
        if (trace) {
            trace->energies.push_back(nls_energy(v, u, p.beta));
            trace->iterations = it + 1;
        }
        if (residual < p.tol) return u;
    }
    throw SolverError("nls: no convergence after " + std::to_string(p.max_iters) +
                      " iterations, last residual " + std::to_string(residual));
}

// ---------------------------------------------------------------------------
// Viscous Burgers
// ---------------------------------------------------------------------------

struct BurgersParams {
    double kappa = 0.005;
    double t_term = 0.1;
    double dt_factor = 10.0;  // dt = dt_factor * h^2
    int k_steps = 40;         // steps of the piecewise-constant initial data
};

/// Step-function initial data: value A_k ~ N(0,1) on [(k-1)/K, k/K).
inline Field sample_burgers_initial(int k_steps, Grid grid, std::uint64_t seed) {
    if (grid.dim != 1) throw ConfigError("burgers initial: unsupported dimension");
    if (k_steps < 1 || grid.n % k_steps != 0)
        throw ConfigError("burgers initial: resolution mismatch, k_steps " + std::to_string(k_steps) +
                          " does not divide n " + std::to_string(grid.n));
    Rng rng(seed);
    Field v(grid);
    const int per = grid.n / k_steps;
    for (int k = 0; k < k_steps; ++k) {
        const double A = rng.normal();
        for (int i = 0; i < per; ++i) v.a[static_cast<std::size_t>(k) * per + i] = A;
    }
    return v;
}

namespace detail {

// Exact Godunov flux for f(u) = u^2/2.
inline double godunov_flux(double a, double b) {
    auto f = [](double u) { return 0.5 * u * u; };
    if (a <= b) {
        if (a <= 0.0 && 0.0 <= b) return 0.0;
        return std::min(f(a), f(b));
    }
    return std::max(f(a), f(b));
}

}  // namespace detail

/// Advance the initial data v to t_term by first-order Lie splitting:
/// Godunov finite-volume convection then explicit-Euler diffusion each step.
inline Field solve_burgers(const Field& v, const BurgersParams& p) {
    if (v.grid.dim != 1) throw SolverError("burgers: unsupported dimension");
    if (p.kappa * p.dt_factor > 0.5)
        throw ConfigError("burgers: diffusion stability requires kappa*dt_factor <= 1/2");
    const int n = v.grid.n;
    const double h = v.grid.h();
    const double dt_full = p.dt_factor * h * h;

    Field u = v;
    std::vector<double> flux(n), next(n);
    double t = 0.0;
    int step = 0;
    while (t < p.t_term - 1e-15) {
        const double dt = std::min(dt_full, p.t_term - t);
        double umax = 0.0;
        for (int i = 0; i < n; ++i) umax = std::max(umax, std::abs(u.a[i]));
        if (umax * dt / h > 1.0)
            throw SolverError("burgers: CFL violated at step " + std::to_string(step) +
                              " (max|u| = " + std::to_string(umax) + ")");
        // convection: flux[i] sits at the right face of cell i
        for (int i = 0; i < n; ++i) flux[i] = detail::godunov_flux(u.a[i], u.a[(i + 1) % n]);
        for (int i = 0; i < n; ++i)
            next[i] = u.a[i] - dt / h * (flux[i] - flux[(i - 1 + n) % n]);
        // diffusion
        for (int i = 0; i < n; ++i)
            u.a[i] = next[i] + p.kappa * dt / (h * h) *
                                   (next[(i + 1) % n] - 2.0 * next[i] + next[(i - 1 + n) % n]);
        t += dt;
        ++step;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Elliptic diagonal-of-inverse
// ---------------------------------------------------------------------------

struct EllipticParams {
    int k_terms = 6;
    double c_shift = 100.0;
    double amp_sigma = 20.0;
    double phase_lo = 0.0, phase_hi = 2.0 * 3.14159265358979323846;
};

/// v(x,y) = sum_k A_k cos(2^k pi (x+y) + phi_k) + sum_k B_k cos(2^k pi (2x-y) + psi_k) + C.
/// Draw order: all (A_k, phi_k), then all (B_k, psi_k).
inline Field sample_elliptic_potential(const EllipticParams& p, Grid grid, std::uint64_t seed) {
    if (grid.dim != 2) throw ConfigError("elliptic potential: unsupported dimension");
    const double pi = 3.14159265358979323846;
    Rng rng(seed);
    const int K = p.k_terms;
    std::vector<double> A(K), phi(K), B(K), psi(K);
    for (int k = 0; k < K; ++k) {
        A[k] = p.amp_sigma * rng.normal();
        phi[k] = rng.uniform(p.phase_lo, p.phase_hi);
    }
    for (int k = 0; k < K; ++k) {
        B[k] = p.amp_sigma * rng.normal();
        psi[k] = rng.uniform(p.phase_lo, p.phase_hi);
    }
    Field v(grid);
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) {
            const double x = i * grid.h(), y = j * grid.h();
            double s = p.c_shift;
            for (int k = 0; k < K; ++k) {
                const double f = std::pow(2.0, k + 1) * pi;  // k runs 1..K in the formula
                s += A[k] * std::cos(f * (x + y) + phi[k]);
                s += B[k] * std::cos(f * (2.0 * x - y) + psi[k]);
            }
            v.at(i, j) = s;
        }
    return v;
}

/// Diagonal of (-Lap_h + diag(v))^{-1} on an n x n periodic grid via dense
/// Cholesky; (A^{-1})_{pp} = |L^{-1} e_p|^2 needs only forward solves.
inline Field solve_diag_inverse(const Field& v) {
    if (v.grid.dim != 2) throw SolverError("elliptic: unsupported dimension");
    const int n = v.grid.n;
    const std::size_t N = v.grid.size();
    const double ih2 = static_cast<double>(n) * n;  // 1/h^2

    std::vector<double> A(N * N, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * n + j;
            A[p * N + p] += 4.0 * ih2 + v.at(i, j);
            const std::size_t nb[4] = {static_cast<std::size_t>((i + 1) % n) * n + j,
                                       static_cast<std::size_t>((i - 1 + n) % n) * n + j,
                                       static_cast<std::size_t>(i) * n + (j + 1) % n,
                                       static_cast<std::size_t>(i) * n + (j - 1 + n) % n};
            for (std::size_t q : nb) A[p * N + q] -= ih2;  // accumulates when neighbors coincide (n = 2)
        }

    // in-place lower Cholesky
    for (std::size_t k = 0; k < N; ++k) {
        double d = A[k * N + k];
        for (std::size_t j = 0; j < k; ++j) d -= A[k * N + j] * A[k * N + j];
        if (!(d > 0.0))
            throw SolverError("elliptic: indefinite operator, Cholesky failed at row " + std::to_string(k));
        const double lkk = std::sqrt(d);
        A[k * N + k] = lkk;
        for (std::size_t i = k + 1; i < N; ++i) {
            double s = A[i * N + k];
            for (std::size_t j = 0; j < k; ++j) s -= A[i * N + j] * A[k * N + j];
            A[i * N + k] = s / lkk;
        }
    }

    Field u(v.grid);
    std::vector<double> y(N);
    for (std::size_t p = 0; p < N; ++p) {
        // forward-solve L y = e_p; y is zero above row p
        double acc = 0.0;
        for (std::size_t i = p; i < N; ++i) {
            double s = (i == p) ? 1.0 : 0.0;
            for (std::size_t j = p; j < i; ++j) s -= A[i * N + j] * y[j];
            y[i] = s / A[i * N + i];
            acc += y[i] * y[i];
        }
        u.a[p] = acc;
    }
    return u;
}

/// Centering constant for the elliptic diagonal-of-inverse at constant
/// potential C on an n x n grid: mean of 1/(eigenvalue + C) over the periodic
/// 5-point Laplacian spectrum.
inline double elliptic_center_constant(int n, double C) {
    const double pi = 3.14159265358979323846;
    double s = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            const double si = std::sin(i * pi / n), sj = std::sin(j * pi / n);
            s += 1.0 / (4.0 * n * n * (si * si + sj * sj) + C);
        }
    return s / (static_cast<double>(n) * n);
}

// ---------------------------------------------------------------------------
// Centering
// ---------------------------------------------------------------------------

/// Center a sample pair for training: nls -> (v, u-1); burgers -> unchanged;
/// elliptic -> (v - C, u - Ctilde(level_n, C)).
inline std::pair<Field, Field> center_sample(Problem problem, int level_n, const Field& v,
                                             const Field& u, double elliptic_c = 100.0) {
    switch (problem) {
        case Problem::nls: {
            Field uc = u;
            for (double& x : uc.a) x -= 1.0;
            return {v, uc};
        }
        case Problem::burgers:
            return {v, u};
        default: {
            Field vc = v, uc = u;
            const double ct = elliptic_center_constant(level_n, elliptic_c);
            for (double& x : vc.a) x -= elliptic_c;
            for (double& x : uc.a) x -= ct;
            return {vc, uc};
        }
    }
}

}  // namespace mlft
