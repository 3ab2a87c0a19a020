#pragma once

#include <vector>

#include "gtp/so3.hpp"
#include "gtp/tensor_product.hpp"
#include "gtp/types.hpp"

namespace gtp {

/// Filter weights h_l per degree (radial/type dependence already folded in
/// by the caller).
struct FilterWeights {
    std::vector<double> h;  ///< h[l], l = 0..L_f

    int degree() const { return static_cast<int>(h.size()) - 1; }
};

/// Geometry of one directed edge, with the cached rotation that maps the
/// unit edge direction onto (0, 1, 0).
struct EdgeGeometry {
    Vec3 ri, rj;
    Vec3 unit;
    double dist = 0;
    EulerAnglesZYZ rot;
};

inline EdgeGeometry edge_frame(const Vec3& ri, const Vec3& rj) {
    EdgeGeometry e;
    e.ri = ri;
    e.rj = rj;
    const Vec3 d = rj - ri;
    e.dist = d.norm();
    if (e.dist <= 1e-9)
        throw std::domain_error("edge_frame: degenerate edge (coincident points)");
    e.unit = {d.x / e.dist, d.y / e.dist, d.z / e.dist};
    e.rot = rotation_to_y_axis(e.unit);
    return e;
}

/// Equivariant convolution of node features with a spherical-harmonic
/// filter along an edge, via the aligned-frame fast path: rotate features
/// into the frame where the edge is (0,1,0), multiply by the filter (sparse
/// in that frame: only m = 0, hence only v = 0 Fourier entries), rotate
/// back. Equals gaunt_weighted_tp of the features with the filter's SH
/// vector scaled by h per degree.
inline IrrepsVector equiv_convolution(const IrrepsVector& x_j,
                                      const EdgeGeometry& e,
                                      const FilterWeights& h, int L_out,
                                      TableCache& tables,
                                      OpCounter* counter = nullptr) {
    const int Lf = h.degree();
    if (Lf < 0) throw std::domain_error("equiv_convolution: empty filter");
    if (L_out > x_j.L + Lf)
        throw std::domain_error("equiv_convolution: L_out exceeds combined degree");

    const WignerDBlocks D = wigner_d_blocks(std::max(x_j.L, L_out), e.rot);
    const IrrepsVector xr = D.apply(x_j);

    // aligned filter: coefficients h_l * Y^(l)_0(0,1,0) on the m = 0 line
    std::vector<double> slice(Lf + 1);
    for (int l = 0; l <= Lf; ++l) slice[l] = h.h[l] * sh_pole_value(l);

    const int Lc = std::max(x_j.L, Lf);
    const ConversionTable& tf = tables.get(Lc);
    const FourierCoeffs2D fa = sh_to_fourier(xr, tf, counter);
    const FourierCoeffs2D fb = sh_to_fourier_sparse_filter(slice, tf, counter);
    const FourierCoeffs2D fc = conv2d_fft(fa, fb, counter);
    IrrepsVector out = fourier_to_sh(fc, tables.get(2 * Lc),
                                     std::min(L_out, 2 * Lc), counter)
                           .resized(L_out);

    std::vector<int> sf;
    for (int l = 0; l <= Lf; ++l)
        if (slice[l] != 0.0) sf.push_back(l);
    detail::zero_infeasible_blocks(
        out, detail::feasible_degrees(detail::support_degrees(x_j), sf, L_out));
    return D.apply_inverse(out);
}

/// Sum of messages in deterministic input order. An empty sequence yields
/// the zero vector of the caller-specified degree.
inline IrrepsVector aggregate_messages(const std::vector<IrrepsVector>& messages,
                                       int L) {
    if (messages.empty()) return IrrepsVector(L);
    IrrepsVector acc(messages.front().L);
    for (const auto& m : messages) {
        if (m.L != acc.L)
            throw std::domain_error("aggregate_messages: degree mismatch");
        for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += m.data[i];
    }
    return acc;
}

}  // namespace gtp
