#pragma once

/// Internal discrete Fourier transforms: an iterative radix-2 FFT for
/// power-of-two lengths and a direct O(n^2) summation fallback for everything
/// else (the 40/320-style grid families).  Forward is unnormalized
/// (sum_j a_j e^{-2*pi*i*j*k/n}); inverse carries the 1/n.

#include <complex>
#include <vector>

#include "mlft/core.hpp"

namespace mlft {

using cplx = std::complex<double>;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace detail {

inline void fft_radix2(std::vector<cplx>& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / len * (inverse ? 1.0 : -1.0);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline void dft_direct(std::vector<cplx>& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    const double pi = 3.14159265358979323846;
    std::vector<cplx> out(a.size());
    for (int k = 0; k < n; ++k) {
        cplx s(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
            const double ang = 2.0 * pi * static_cast<double>((long long)j * k % n) / n *
                               (inverse ? 1.0 : -1.0);
            s += a[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = s;
    }
    a.swap(out);
}

}  // namespace detail

/// In-place unnormalized forward transform.
inline void fourier_forward(std::vector<cplx>& a) {
    if (is_pow2(static_cast<int>(a.size())))
        detail::fft_radix2(a, false);
    else
        detail::dft_direct(a, false);
}

/// In-place inverse transform including the 1/n normalization.
inline void fourier_inverse(std::vector<cplx>& a) {
    if (is_pow2(static_cast<int>(a.size())))
        detail::fft_radix2(a, true);
    else
        detail::dft_direct(a, true);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (cplx& x : a) x *= inv;
}

/// Forward transform of a real 1-D field.
inline std::vector<cplx> fourier_forward_real(const std::vector<double>& f) {
    std::vector<cplx> a(f.begin(), f.end());
    fourier_forward(a);
    return a;
}

/// Inverse transform keeping only the real part (inputs known conjugate-symmetric).
inline std::vector<double> fourier_inverse_real(std::vector<cplx> a) {
    fourier_inverse(a);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
    return out;
}

}  // namespace mlft
