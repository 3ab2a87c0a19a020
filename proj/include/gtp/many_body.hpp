#pragma once

#include <vector>

#include "gtp/tensor_product.hpp"

namespace gtp {

/// Evaluation order for iterated products.
enum class MultiTpStrategy {
    kBalancedTree,  ///< divide and conquer (default)
    kLeftFold,      ///< sequential pairwise accumulation
    kFusedFreq,     ///< one FFT per operand at the final bandwidth
};

namespace detail {

/// Convolution step of the iterated product: operands are padded to a
/// common bandwidth, convolved, and the result cropped to the exact content
/// bandwidth La + Lb (no truncation: the crop only discards indices the
/// product provably cannot populate).
inline FourierCoeffs2D conv_step(const FourierCoeffs2D& a,
                                 const FourierCoeffs2D& b,
                                 OpCounter* counter) {
    const int Lc = std::max(a.L, b.L);
    const FourierCoeffs2D fa = a.L == Lc ? a : a.resized(Lc);
    const FourierCoeffs2D fb = b.L == Lc ? b : b.resized(Lc);
    return conv2d_fft(fa, fb, counter).resized(a.L + b.L);
}

inline FourierCoeffs2D combine_tree(const std::vector<FourierCoeffs2D>& grids,
                                    std::size_t lo, std::size_t hi,
                                    OpCounter* counter) {
    if (hi - lo == 1) return grids[lo];
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    return conv_step(combine_tree(grids, lo, mid, counter),
                     combine_tree(grids, mid, hi, counter), counter);
}

}  // namespace detail

/// Coefficients of the product of n spherical functions, truncated to
/// L_out. Intermediate grids carry the full running bandwidth.
inline IrrepsVector multi_tp(const std::vector<IrrepsVector>& operands,
                             int L_out, TableCache& tables,
                             MultiTpStrategy strategy = MultiTpStrategy::kBalancedTree,
                             OpCounter* counter = nullptr) {
    if (operands.empty()) throw std::domain_error("multi_tp: empty operand list");
    int L_total = 0;
    for (const auto& op : operands) L_total += op.L;
    if (L_out < 0 || L_out > L_total)
        throw std::domain_error("multi_tp: L_out exceeds combined degree");
    if (operands.size() == 1) return operands.front().resized(L_out);

    std::vector<FourierCoeffs2D> grids;
    grids.reserve(operands.size());
    for (const auto& op : operands)
        grids.push_back(sh_to_fourier(op, tables.get(op.L), counter));

    FourierCoeffs2D prod;
    switch (strategy) {
        case MultiTpStrategy::kBalancedTree:
            prod = detail::combine_tree(grids, 0, grids.size(), counter);
            break;
        case MultiTpStrategy::kLeftFold: {
            prod = grids.front();
            for (std::size_t i = 1; i < grids.size(); ++i)
                prod = detail::conv_step(prod, grids[i], counter);
            break;
        }
        case MultiTpStrategy::kFusedFreq: {
            // stay in the frequency domain: one forward FFT per operand at
            // the final padding, one inverse at the end
            const int P = detail::next_pow2(2 * L_total + 1);
            const int lg = detail::ilog2(P);
            std::vector<detail::cplx> acc(static_cast<std::size_t>(P) * P, 1.0);
            std::vector<detail::cplx> w(acc.size());
            for (const auto& g : grids) {
                std::fill(w.begin(), w.end(), detail::cplx(0.0));
                for (int u = -g.L; u <= g.L; ++u)
                    for (int v = -g.L; v <= g.L; ++v)
                        w[static_cast<std::size_t>((u + P) % P) * P +
                          (v + P) % P] = g.at(u, v);
                detail::fft2_pow2(w, P, -1);
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= w[i];
                if (counter) counter->fft_points += 1ull * P * P * lg;
            }
            detail::fft2_pow2(acc, P, +1);
            if (counter) counter->fft_points += 1ull * P * P * lg;
            prod = FourierCoeffs2D(L_total);
            for (int u = -L_total; u <= L_total; ++u)
                for (int v = -L_total; v <= L_total; ++v)
                    prod.at(u, v) = acc[static_cast<std::size_t>((u + P) % P) * P +
                                        (v + P) % P];
            break;
        }
    }

    IrrepsVector out = fourier_to_sh(prod, tables.get(L_total), L_out, counter);

    // fold the selection rules across all operands
    std::vector<int> feas = detail::support_degrees(operands.front());
    for (std::size_t i = 1; i < operands.size(); ++i) {
        const auto ok = detail::feasible_degrees(
            feas, detail::support_degrees(operands[i]), L_total);
        feas.clear();
        for (int l = 0; l < static_cast<int>(ok.size()); ++l)
            if (ok[l]) feas.push_back(l);
    }
    std::vector<bool> okmask(out.L + 1, false);
    for (int l : feas)
        if (l <= out.L) okmask[l] = true;
    detail::zero_infeasible_blocks(out, okmask);
    return out;
}

/// nu-fold product of a feature with itself, each copy scaled per degree by
/// wx first.
inline IrrepsVector self_product(const IrrepsVector& x, int nu,
                                 const DegreeWeights& wx, int L_out,
                                 TableCache& tables,
                                 MultiTpStrategy strategy = MultiTpStrategy::kBalancedTree,
                                 OpCounter* counter = nullptr) {
    if (nu < 1) throw std::domain_error("self_product: nu must be >= 1");
    if (nu > 16) throw std::domain_error("self_product: nu beyond practical cap");
    if (wx.L != x.L) throw std::domain_error("self_product: weight length mismatch");
    IrrepsVector xs = x;
    xs.scale_by_degree(wx.w);
    return multi_tp(std::vector<IrrepsVector>(nu, xs), L_out, tables, strategy,
                    counter);
}

}  // namespace gtp
