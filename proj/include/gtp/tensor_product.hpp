#pragma once

#include <thread>
#include <vector>

#include "gtp/conversion.hpp"
#include "gtp/detail/fft.hpp"
#include "gtp/types.hpp"

namespace gtp {

namespace detail {

/// Chunked deterministic parallel loop: fn(i) for i in [0, n). Each index is
/// processed exactly once; results must be written to disjoint slots.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Degrees whose block holds any nonzero entry.
inline std::vector<int> support_degrees(const IrrepsVector& x) {
    std::vector<int> s;
    for (int l = 0; l <= x.L; ++l) {
        const double* b = x.block(l);
        for (int i = 0; i < 2 * l + 1; ++i)
            if (b[i] != 0.0) {
                s.push_back(l);
                break;
            }
    }
    return s;
}

/// Output degrees reachable from two support sets under the triangle and
/// parity selection rules.
inline std::vector<bool> feasible_degrees(const std::vector<int>& sa,
                                          const std::vector<int>& sb,
                                          int L_out) {
    std::vector<bool> ok(L_out + 1, false);
    for (int la : sa)
        for (int lb : sb) {
            const int lo = std::abs(la - lb), hi = la + lb;
            for (int l = lo; l <= std::min(hi, L_out); l += 2) ok[l] = true;
        }
    return ok;
}

/// Zero every block whose degree the selection rules forbid, so forced
/// zeros come out exact rather than as FFT roundoff.
inline void zero_infeasible_blocks(IrrepsVector& out,
                                   const std::vector<bool>& ok) {
    for (int l = 0; l <= out.L; ++l) {
        if (ok[l]) continue;
        double* b = out.block(l);
        std::fill(b, b + 2 * l + 1, 0.0);
    }
}

}  // namespace detail

/// Full linear 2D convolution of two coefficient grids of equal bandwidth L;
/// the result spans [-2L, 2L]. Grids are zero-padded to the next power of
/// two >= 4L+1, transformed, multiplied pointwise, and transformed back.
inline FourierCoeffs2D conv2d_fft(const FourierCoeffs2D& a,
                                  const FourierCoeffs2D& b,
                                  OpCounter* counter = nullptr) {
    if (a.L != b.L) throw std::domain_error("conv2d_fft: grid size mismatch");
    const int L = a.L;
    const int P = detail::next_pow2(4 * L + 1);
    const int lg = detail::ilog2(P);

    auto embed = [&](const FourierCoeffs2D& g) {
        std::vector<detail::cplx> w(static_cast<std::size_t>(P) * P, 0.0);
        for (int u = -L; u <= L; ++u)
            for (int v = -L; v <= L; ++v)
                w[static_cast<std::size_t>((u + P) % P) * P + (v + P) % P] =
                    g.at(u, v);
        return w;
    };
    std::vector<detail::cplx> wa = embed(a), wb = embed(b);
    detail::fft2_pow2(wa, P, -1);
    detail::fft2_pow2(wb, P, -1);
    for (std::size_t i = 0; i < wa.size(); ++i) wa[i] *= wb[i];
    detail::fft2_pow2(wa, P, +1);

    if (counter) {
        counter->fft_points += 3ull * P * P * lg;
        counter->madds += static_cast<std::uint64_t>(P) * P;
    }
    FourierCoeffs2D out(2 * L);
    for (int u = -2 * L; u <= 2 * L; ++u)
        for (int v = -2 * L; v <= 2 * L; ++v)
            out.at(u, v) = wa[static_cast<std::size_t>((u + P) % P) * P + (v + P) % P];
    return out;
}

/// Full Gaunt tensor product: coefficients of the product of the two
/// spherical functions represented by x and y, truncated at L_out.
/// Pipeline: SH -> Fourier for both operands, FFT convolution, Fourier -> SH.
inline IrrepsVector gaunt_full_tp(const IrrepsVector& x, const IrrepsVector& y,
                                  int L_out, TableCache& tables,
                                  OpCounter* counter = nullptr) {
    if (L_out < 0 || L_out > x.L + y.L)
        throw std::domain_error("gaunt_full_tp: L_out exceeds combined degree");
    const int Lc = std::max(x.L, y.L);
    const ConversionTable& tf = tables.get(Lc);
    const FourierCoeffs2D fa = sh_to_fourier(x, tf, counter);
    const FourierCoeffs2D fb = sh_to_fourier(y, tf, counter);
    const FourierCoeffs2D fc = conv2d_fft(fa, fb, counter);
    const ConversionTable& tb = tables.get(2 * Lc);
    IrrepsVector out = fourier_to_sh(fc, tb, std::min(L_out, 2 * Lc), counter);
    out = out.resized(L_out);
    detail::zero_infeasible_blocks(
        out, detail::feasible_degrees(detail::support_degrees(x),
                                      detail::support_degrees(y), L_out));
    return out;
}

/// Weighted Gaunt tensor product with the w_{l1} * w_{l2} * w_l degree
/// reparameterization: input weights are applied before basis conversion,
/// output weights after back-conversion.
inline IrrepsVector gaunt_weighted_tp(const IrrepsVector& x,
                                      const IrrepsVector& y,
                                      const DegreeWeights& wx,
                                      const DegreeWeights& wy,
                                      const DegreeWeights& wout, int L_out,
                                      TableCache& tables,
                                      OpCounter* counter = nullptr) {
    if (wx.L != x.L || wy.L != y.L || wout.L != L_out)
        throw std::domain_error("gaunt_weighted_tp: weight length mismatch");
    IrrepsVector xs = x, ys = y;
    xs.scale_by_degree(wx.w);
    ys.scale_by_degree(wy.w);
    IrrepsVector out = gaunt_full_tp(xs, ys, L_out, tables, counter);
    out.scale_by_degree(wout.w);
    return out;
}

/// Gaunt product of a single (l1, l2) pair of blocks, returning the degree
/// l_out block. Selection-rule violations give an exact zero block.
inline std::vector<double> gaunt_single_tp(const std::vector<double>& x_l1,
                                           int l1,
                                           const std::vector<double>& y_l2,
                                           int l2, int l_out,
                                           TableCache& tables) {
    if (static_cast<int>(x_l1.size()) != 2 * l1 + 1 ||
        static_cast<int>(y_l2.size()) != 2 * l2 + 1)
        throw std::domain_error("gaunt_single_tp: block length mismatch");
    std::vector<double> out(2 * l_out + 1, 0.0);
    if (l_out < std::abs(l1 - l2) || l_out > l1 + l2 || ((l1 + l2 + l_out) & 1))
        return out;
    IrrepsVector x(l1), y(l2);
    std::copy(x_l1.begin(), x_l1.end(), x.block(l1));
    std::copy(y_l2.begin(), y_l2.end(), y.block(l2));
    const IrrepsVector full = gaunt_full_tp(x, y, l_out, tables);
    std::copy(full.block(l_out), full.block(l_out) + 2 * l_out + 1, out.begin());
    return out;
}

/// Batched weighted Gaunt tensor product. Channel-wise pairs channel c of X
/// with channel c of Y; channel-mixing combines all (c1, c2) pairs with the
/// mode's weight tensor. Batch entries are independent and may be processed
/// in parallel; results are bit-identical to the sequential order.
inline FeatureBatch gaunt_tp_batch(const FeatureBatch& X, const FeatureBatch& Y,
                                   const ChannelMode& mode,
                                   const DegreeWeights& wx,
                                   const DegreeWeights& wy,
                                   const DegreeWeights& wout, int L_out,
                                   TableCache& tables, int threads = 1) {
    if (X.B != Y.B || X.C != Y.C || X.L != Y.L)
        throw std::domain_error("gaunt_tp_batch: shape mismatch");
    if (mode.kind == ChannelMode::kChannelMixing &&
        static_cast<int>(mode.mix.size()) != X.C * X.C * X.C)
        throw std::domain_error("gaunt_tp_batch: mixing tensor must be C^3");
    // warm the tables before any worker needs them
    tables.get(X.L);
    tables.get(2 * X.L);

    FeatureBatch out(X.B, X.C, L_out);
    detail::parallel_for(X.B, threads, [&](std::size_t b) {
        const int bi = static_cast<int>(b);
        if (mode.kind == ChannelMode::kChannelWise) {
            for (int c = 0; c < X.C; ++c)
                out.set(bi, c,
                        gaunt_weighted_tp(X.get(bi, c), Y.get(bi, c), wx, wy,
                                          wout, L_out, tables));
            return;
        }
        // one weighted product per (c1, c2), then the weighted combination
        std::vector<IrrepsVector> prod(static_cast<std::size_t>(X.C) * X.C);
        for (int c1 = 0; c1 < X.C; ++c1)
            for (int c2 = 0; c2 < X.C; ++c2)
                prod[static_cast<std::size_t>(c1) * X.C + c2] =
                    gaunt_weighted_tp(X.get(bi, c1), Y.get(bi, c2), wx, wy,
                                      wout, L_out, tables);
        for (int c = 0; c < X.C; ++c) {
            IrrepsVector acc(L_out);
            for (int c1 = 0; c1 < X.C; ++c1)
                for (int c2 = 0; c2 < X.C; ++c2) {
                    const double w = mode.mix_at(X.C, c, c1, c2);
                    const auto& p = prod[static_cast<std::size_t>(c1) * X.C + c2];
                    for (std::size_t i = 0; i < acc.data.size(); ++i)
                        acc.data[i] += w * p.data[i];
                }
            out.set(bi, c, acc);
        }
    });
    return out;
}

}  // namespace gtp
