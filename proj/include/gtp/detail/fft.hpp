#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gtp::detail {

using cplx = std::complex<double>;

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline int ilog2(int p) {
    int k = 0;
    while ((1 << k) < p) ++k;
    return k;
}

/// In-place iterative radix-2 FFT. `sign` is the exponent sign: -1 forward,
/// +1 inverse. The inverse includes the 1/n factor.
inline void fft_pow2(cplx* a, int n, int sign) {
    if (n & (n - 1))
        throw std::invalid_argument("fft_pow2: length must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.14159265358979323846 / len;
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
    if (sign > 0) {
        const double inv = 1.0 / n;
        for (int i = 0; i < n; ++i) a[i] *= inv;
    }
}

/// 2D FFT of a P x P row-major grid (row-column decomposition).
inline void fft2_pow2(std::vector<cplx>& g, int P, int sign) {
    std::vector<cplx> col(P);
    for (int r = 0; r < P; ++r) fft_pow2(g.data() + static_cast<std::size_t>(r) * P, P, sign);
    for (int c = 0; c < P; ++c) {
        for (int r = 0; r < P; ++r) col[r] = g[static_cast<std::size_t>(r) * P + c];
        fft_pow2(col.data(), P, sign);
        for (int r = 0; r < P; ++r) g[static_cast<std::size_t>(r) * P + c] = col[r];
    }
}

}  // namespace gtp::detail
