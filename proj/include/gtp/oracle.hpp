#pragma once

#include <complex>
#include <vector>

#include "gtp/conversion.hpp"
#include "gtp/so3.hpp"
#include "gtp/types.hpp"

namespace gtp::oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x,
                           std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (t * p0 - p1) / (t * t - 1.0);
            const double dt = p0 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * pp * pp);
    }
}

/// Triple-product integral of real spherical harmonics by numerical
/// quadrature: Gauss-Legendre in cos(theta), uniform trapezoid in psi.
/// Exact to ~1e-12 for the band-limited integrand; independent of the
/// coefficient formulas it is used to check.
inline double gaunt_coeff_quadrature(int l1, int m1, int l2, int m2, int l3,
                                     int m3) {
    if (l1 > 16 || l2 > 16 || l3 > 16)
        throw std::domain_error("gaunt_coeff_quadrature: degree beyond 16");
    const int lsum = l1 + l2 + l3;
    const int ntheta = 2 * lsum + 2;
    const int npsi = 4 * lsum + 5;
    std::vector<double> gx, gw;
    gauss_legendre(ntheta, gx, gw);
    double acc = 0.0;
    for (int i = 0; i < ntheta; ++i) {
        const double theta = std::acos(gx[i]);
        double row = 0.0;
        for (int j = 0; j < npsi; ++j) {
            const double psi = 2.0 * kPi * j / npsi;
            row += eval_real_sh(l1, m1, theta, psi) *
                   eval_real_sh(l2, m2, theta, psi) *
                   eval_real_sh(l3, m3, theta, psi);
        }
        acc += gw[i] * row;
    }
    return acc * 2.0 * kPi / npsi;
}

/// Direct O(L^4) linear 2D convolution; ground truth for conv2d_fft.
inline FourierCoeffs2D conv2d_direct(const FourierCoeffs2D& a,
                                     const FourierCoeffs2D& b) {
    if (a.L != b.L) throw std::domain_error("conv2d_direct: grid size mismatch");
    const int L = a.L;
    FourierCoeffs2D out(2 * L);
    for (int u1 = -L; u1 <= L; ++u1)
        for (int v1 = -L; v1 <= L; ++v1) {
            const std::complex<double> f1 = a.at(u1, v1);
            if (f1 == std::complex<double>(0.0)) continue;
            for (int u2 = -L; u2 <= L; ++u2)
                for (int v2 = -L; v2 <= L; ++v2)
                    out.at(u1 + u2, v1 + v2) += f1 * b.at(u2, v2);
        }
    return out;
}

/// Explicit Gaunt tensor product: quadruple sum over degrees and orders
/// with gaunt_coefficient, optionally with the w_{l1} w_{l2} w_l weighting.
inline IrrepsVector gaunt_tp_reference(const IrrepsVector& x,
                                       const IrrepsVector& y, int L_out,
                                       const DegreeWeights* wx = nullptr,
                                       const DegreeWeights* wy = nullptr,
                                       const DegreeWeights* wout = nullptr) {
    IrrepsVector out(L_out);
    for (int l = 0; l <= L_out; ++l)
        for (int m = -l; m <= l; ++m) {
            double acc = 0.0;
            for (int l1 = 0; l1 <= x.L; ++l1)
                for (int m1 = -l1; m1 <= l1; ++m1)
                    for (int l2 = 0; l2 <= y.L; ++l2)
                        for (int m2 = -l2; m2 <= l2; ++m2) {
                            double g = gaunt_coefficient(l1, m1, l2, m2, l, m);
                            if (g == 0.0) continue;
                            if (wx) g *= wx->w[l1];
                            if (wy) g *= wy->w[l2];
                            acc += g * x.at(l1, m1) * y.at(l2, m2);
                        }
            if (wout) acc *= wout->w[l];
            out.at(l, m) = acc;
        }
    return out;
}

/// Explicit Clebsch-Gordan full tensor product on real-basis features. Each
/// degree block is taken to the complex basis, coupled with the standard CG
/// coefficients, and taken back; odd l1+l2-l paths come back imaginary in
/// the real basis and contribute through the fixed intertwiner gauge.
inline IrrepsVector cg_tp_reference(const IrrepsVector& x,
                                    const IrrepsVector& y, int L_out) {
    using cd = std::complex<double>;
    // complex coefficients per degree: c_a = sum_m U_{m,a} x_m
    auto to_complex = [](const IrrepsVector& v) {
        std::vector<std::vector<cd>> c(v.L + 1);
        for (int l = 0; l <= v.L; ++l) {
            c[l].assign(2 * l + 1, 0.0);
            for (int a = -l; a <= l; ++a) {
                cd acc = 0.0;
                for (int m : {-std::abs(a), std::abs(a)}) {
                    acc += detail::real_sh_complex_coeff(m, a) * v.at(l, m);
                    if (a == 0) break;
                }
                c[l][a + l] = acc;
            }
        }
        return c;
    };
    const auto cx = to_complex(x), cy = to_complex(y);

    IrrepsVector out(L_out);
    for (int l1 = 0; l1 <= x.L; ++l1)
        for (int l2 = 0; l2 <= y.L; ++l2)
            for (int l = std::abs(l1 - l2); l <= std::min(l1 + l2, L_out); ++l) {
                std::vector<cd> path(2 * l + 1, 0.0);
                for (int m1 = -l1; m1 <= l1; ++m1)
                    for (int m2 = -l2; m2 <= l2; ++m2) {
                        const int m = m1 + m2;
                        if (std::abs(m) > l) continue;
                        path[m + l] += clebsch_gordan(l1, m1, l2, m2, l, m) *
                                       cx[l1][m1 + l1] * cy[l2][m2 + l2];
                    }
                // back to the real basis: r_m = sum_a conj(U_{m,a}) path_a
                const bool odd = ((l1 + l2 + l) & 1) != 0;
                for (int m = -l; m <= l; ++m) {
                    cd acc = 0.0;
                    for (int a : {-std::abs(m), std::abs(m)}) {
                        acc += std::conj(detail::real_sh_complex_coeff(m, a)) *
                               path[a + l];
                        if (m == 0) break;
                    }
                    out.at(l, m) += odd ? acc.imag() : acc.real();
                }
            }
    return out;
}

/// Sequential left-fold of gaunt_tp_reference at full intermediate
/// bandwidth; ground truth for multi_tp.
inline IrrepsVector many_body_reference(const std::vector<IrrepsVector>& ops,
                                        int L_out) {
    if (ops.empty()) throw std::domain_error("many_body_reference: empty operand list");
    int L_total = 0;
    for (const auto& op : ops) L_total += op.L;
    if (L_out > L_total)
        throw std::domain_error("many_body_reference: L_out exceeds combined degree");
    IrrepsVector acc = ops.front();
    int running = ops.front().L;
    for (std::size_t i = 1; i < ops.size(); ++i) {
        running += ops[i].L;
        acc = gaunt_tp_reference(acc, ops[i], running);
    }
    return acc.resized(L_out);
}

}  // namespace gtp::oracle
