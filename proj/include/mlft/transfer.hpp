#pragma once

/// Restriction and interpolation operators between nested periodic grids.
/// Fourier restriction keeps modes strictly below the coarse Nyquist per axis
/// (the Nyquist mode itself is zeroed, keeping the operator an orthogonal
/// projection); average restriction takes block means.  Interpolation is
/// periodic piecewise-linear or periodic Catmull-Rom cubic, tensor-product in
/// two dimensions.

#include <vector>

#include "mlft/core.hpp"
#include "mlft/fft.hpp"

namespace mlft {

enum class Restriction { fourier, average };
enum class Interpolation { cubic, linear };

struct TransferKind {
    Restriction restriction = Restriction::fourier;
    Interpolation interpolation = Interpolation::cubic;
};

namespace detail {

inline void check_divides(int n_coarse, int n_fine) {
    if (n_coarse < 1 || n_fine < 1 || n_fine % n_coarse != 0)
        throw ConfigError("transfer: resolution mismatch, " + std::to_string(n_coarse) +
                          " does not divide " + std::to_string(n_fine));
}

// Signed mode index of bin k on an n-grid.
inline int signed_mode(int k, int n) { return 2 * k <= n ? k : k - n; }

inline std::vector<double> fourier_restrict_1d(const std::vector<double>& f, int nc) {
    const int n = static_cast<int>(f.size());
    std::vector<cplx> F = fourier_forward_real(f);
    std::vector<cplx> G(nc, cplx(0.0, 0.0));
    const double scale = static_cast<double>(nc) / n;
    for (int k = 0; k < nc; ++k) {
        const int ks = signed_mode(k, nc);
        if (2 * std::abs(ks) < nc) G[k] = F[(ks + n) % n] * scale;
    }
    return fourier_inverse_real(std::move(G));
}

// 2-D transform helpers operating on row-major n*n arrays.
inline void fft2(std::vector<cplx>& a, int n, bool inverse) {
    std::vector<cplx> tmp(n);
    for (int i = 0; i < n; ++i) {  // rows
        for (int j = 0; j < n; ++j) tmp[j] = a[static_cast<std::size_t>(i) * n + j];
        if (inverse)
            fourier_inverse(tmp);
        else
            fourier_forward(tmp);
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = tmp[j];
    }
    for (int j = 0; j < n; ++j) {  // columns
        for (int i = 0; i < n; ++i) tmp[i] = a[static_cast<std::size_t>(i) * n + j];
        if (inverse)
            fourier_inverse(tmp);
        else
            fourier_forward(tmp);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = tmp[i];
    }
}

inline std::vector<double> fourier_restrict_2d(const std::vector<double>& f, int n, int nc) {
    std::vector<cplx> F(f.begin(), f.end());
    fft2(F, n, false);
    std::vector<cplx> G(static_cast<std::size_t>(nc) * nc, cplx(0.0, 0.0));
    const double scale = static_cast<double>(nc) / n * (static_cast<double>(nc) / n);
    for (int k1 = 0; k1 < nc; ++k1) {
        const int s1 = signed_mode(k1, nc);
        if (2 * std::abs(s1) >= nc) continue;
        for (int k2 = 0; k2 < nc; ++k2) {
            const int s2 = signed_mode(k2, nc);
            if (2 * std::abs(s2) >= nc) continue;
            const int i = (s1 + n) % n, j = (s2 + n) % n;
            G[static_cast<std::size_t>(k1) * nc + k2] = F[static_cast<std::size_t>(i) * n + j] * scale;
        }
    }
    fft2(G, nc, true);
    std::vector<double> out(G.size());
    for (std::size_t i = 0; i < G.size(); ++i) out[i] = G[i].real();
    return out;
}

// Catmull-Rom weights for offset t in [0,1) over nodes (i-1, i, i+1, i+2).
inline void catmull_rom_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t + 2.0 * t2 - t3);
    w[1] = 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3);
    w[2] = 0.5 * (t + 4.0 * t2 - 3.0 * t3);
    w[3] = 0.5 * (-t2 + t3);
}

// Interpolate rows of a (rows x nc) array up to n_fine columns, periodic.
inline std::vector<double> interp_axis(const std::vector<double>& f, int rows, int nc, int nf,
                                       Interpolation kind) {
    const int D = nf / nc;
    std::vector<double> out(static_cast<std::size_t>(rows) * nf);
    for (int r = 0; r < rows; ++r) {
        const double* src = f.data() + static_cast<std::size_t>(r) * nc;
        double* dst = out.data() + static_cast<std::size_t>(r) * nf;
        for (int i = 0; i < nc; ++i) {
            for (int d = 0; d < D; ++d) {
                const double t = static_cast<double>(d) / D;
                double val;
                if (kind == Interpolation::linear) {
                    val = (1.0 - t) * src[i] + t * src[(i + 1) % nc];
                } else {
                    double w[4];
                    catmull_rom_weights(t, w);
                    val = w[0] * src[(i - 1 + nc) % nc] + w[1] * src[i] +
                          w[2] * src[(i + 1) % nc] + w[3] * src[(i + 2) % nc];
                }
                dst[i * D + d] = val;
            }
        }
    }
    return out;
}

}  // namespace detail

/// Restrict a fine-grid field to n_coarse nodes per axis.
inline Field restrict_field(const Field& f, Restriction kind, int n_coarse) {
    detail::check_divides(n_coarse, f.grid.n);
    if (n_coarse < 4) throw ConfigError("transfer: target grid too coarse, n_coarse must be >= 4");
    const int n = f.grid.n;
    Grid cg(f.grid.dim, n_coarse);
    if (kind == Restriction::fourier) {
        if (f.grid.dim == 1) return Field(cg, detail::fourier_restrict_1d(f.a, n_coarse));
        return Field(cg, detail::fourier_restrict_2d(f.a, n, n_coarse));
    }
    // block means aligned to coarse nodes
    const int D = n / n_coarse;
    Field out(cg);
    if (f.grid.dim == 1) {
        for (int i = 0; i < n_coarse; ++i) {
            double s = 0.0;
            for (int d = 0; d < D; ++d) s += f.a[static_cast<std::size_t>(i) * D + d];
            out.a[i] = s / D;
        }
    } else {
        for (int i = 0; i < n_coarse; ++i)
            for (int j = 0; j < n_coarse; ++j) {
                double s = 0.0;
                for (int di = 0; di < D; ++di)
                    for (int dj = 0; dj < D; ++dj)
                        s += f.at(i * D + di, j * D + dj);
                out.at(i, j) = s / (static_cast<double>(D) * D);
            }
    }
    return out;
}

/// Interpolate a coarse-grid field up to n_fine nodes per axis.
inline Field interpolate_field(const Field& f, Interpolation kind, int n_fine) {
    detail::check_divides(f.grid.n, n_fine);
    const int nc = f.grid.n;
    Grid fg(f.grid.dim, n_fine);
    if (f.grid.dim == 1) return Field(fg, detail::interp_axis(f.a, 1, nc, n_fine, kind));
    // axis 1 (columns) first, then axis 0 via transposes
    std::vector<double> half = detail::interp_axis(f.a, nc, nc, n_fine, kind);
    std::vector<double> half_t(half.size());
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < n_fine; ++j)
            half_t[static_cast<std::size_t>(j) * nc + i] = half[static_cast<std::size_t>(i) * n_fine + j];
    std::vector<double> full_t = detail::interp_axis(half_t, n_fine, nc, n_fine, kind);
    Field out(fg);
    for (int j = 0; j < n_fine; ++j)
        for (int i = 0; i < n_fine; ++i)
            out.at(i, j) = full_t[static_cast<std::size_t>(j) * n_fine + i];
    return out;
}

}  // namespace mlft
