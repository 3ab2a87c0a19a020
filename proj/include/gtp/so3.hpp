#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "gtp/detail/bigint.hpp"
#include "gtp/types.hpp"

namespace gtp {

namespace detail {

/// Fully normalized associated Legendre values Pbar_l^m(x) (Condon-Shortley
/// phase excluded) such that
///   Y_{l,0}      = Pbar_l^0(cos theta)
///   Y_{l,|m|!=0} = sqrt(2) * Pbar_l^|m|(cos theta) * cos/sin(|m| psi).
/// `s` is sin(theta) >= 0. Returns a triangular table, index l*(l+1)/2 + m.
inline std::vector<double> legendre_normalized_all(int L, double x, double s) {
    std::vector<double> p((L + 1) * (L + 2) / 2, 0.0);
    auto idx = [](int l, int m) { return l * (l + 1) / 2 + m; };
    p[0] = 0.28209479177387814;  // 1/(2 sqrt(pi))
    for (int m = 0; m <= L; ++m) {
        if (m > 0)
            p[idx(m, m)] =
                p[idx(m - 1, m - 1)] * s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        if (m + 1 <= L)
            p[idx(m + 1, m)] = p[idx(m, m)] * x * std::sqrt(2.0 * m + 3.0);
        for (int l = m + 2; l <= L; ++l) {
            const double a =
                std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
            const double b = std::sqrt(
                ((double(l - 1) * (l - 1) - double(m) * m)) /
                (4.0 * double(l - 1) * (l - 1) - 1.0));
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    return p;
}

/// Internal coordinates place the spherical-harmonic pole on the library's
/// y axis: (x_int, y_int, z_int) = (z, x, y).
inline Vec3 to_internal(const Vec3& r) { return {r.z, r.x, r.y}; }
inline Vec3 from_internal(const Vec3& r) { return {r.y, r.z, r.x}; }

constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

}  // namespace detail

/// Value of Y_{l,0} on its symmetry axis (the pole).
inline double sh_pole_value(int l) {
    return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
}

/// Real orthonormal spherical harmonic Y^(l)_m(theta, psi), Condon-Shortley
/// phase absorbed: cos(m psi) terms for m > 0, sin(|m| psi) for m < 0.
inline double eval_real_sh(int l, int m, const SphericalPoint& p) {
    if (l < 0) throw std::domain_error("eval_real_sh: negative degree");
    if (std::abs(m) > l) throw std::domain_error("eval_real_sh: |m| > l");
    const double x = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const int mu = std::abs(m);
    const auto tab = detail::legendre_normalized_all(l, x, std::abs(s));
    const double pl = tab[l * (l + 1) / 2 + mu];
    if (m == 0) return pl;
    const double t = m > 0 ? std::cos(mu * p.psi) : std::sin(mu * p.psi);
    return detail::kSqrt2 * pl * t;
}

inline double eval_real_sh(int l, int m, double theta, double psi) {
    return eval_real_sh(l, m, SphericalPoint{theta, psi});
}

/// Spherical coordinates of a unit vector in the library convention
/// (pole on +y, azimuth measured from +z towards +x).
inline SphericalPoint spherical_from_unit(const Vec3& r) {
    const Vec3 q = detail::to_internal(r);
    const double z = std::clamp(q.z, -1.0, 1.0);
    double psi = std::atan2(q.y, q.x);
    if (psi < 0) psi += 2 * kPi;
    return {std::acos(z), psi};
}

inline Vec3 unit_from_spherical(const SphericalPoint& p) {
    const double st = std::sin(p.theta);
    return detail::from_internal(
        {st * std::cos(p.psi), st * std::sin(p.psi), std::cos(p.theta)});
}

/// All real spherical harmonics up to degree L at a unit vector. The
/// degree-1 block in m = (-1, 0, 1) order is sqrt(3/4pi) * (x, y, z).
inline IrrepsVector eval_sh_vector(int L, const Vec3& r) {
    if (std::abs(r.norm() - 1.0) > 1e-9)
        throw std::domain_error("eval_sh_vector: input is not unit-norm");
    const SphericalPoint p = spherical_from_unit(r);
    const double x = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const auto tab = detail::legendre_normalized_all(L, x, std::abs(s));
    auto idx = [](int l, int m) { return l * (l + 1) / 2 + m; };
    IrrepsVector out(L);
    for (int l = 0; l <= L; ++l) out.at(l, 0) = tab[idx(l, 0)];
    double cm = 1.0, sm = 0.0;  // cos(m psi), sin(m psi)
    const double cp = std::cos(p.psi), sp = std::sin(p.psi);
    for (int m = 1; m <= L; ++m) {
        const double c = cm * cp - sm * sp;
        const double sn = sm * cp + cm * sp;
        cm = c;
        sm = sn;
        for (int l = m; l <= L; ++l) {
            const double v = detail::kSqrt2 * tab[idx(l, m)];
            out.at(l, m) = v * cm;
            out.at(l, -m) = v * sm;
        }
    }
    return out;
}

/// Exact Wigner 3-j symbol. Evaluated from the factorial formula with exact
/// big-integer arithmetic (the alternating k-sum cancels catastrophically in
/// floating point beyond l ~ 15); the only roundoff is the final conversion.
inline double wigner_3j(int l1, int l2, int l3, int m1, int m2, int m3) {
    if (l1 < 0 || l2 < 0 || l3 < 0)
        throw std::domain_error("wigner_3j: negative degree");
    if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3)
        throw std::domain_error("wigner_3j: |m| > l");
    if (m1 + m2 + m3 != 0) return 0.0;
    if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return 0.0;

    const int A = l1 + l2 - l3;
    const int B = l1 - m1;
    const int C = l2 + m2;
    const int E = l3 - l2 + m1;
    const int F = l3 - l1 - m2;
    const int K = std::max({0, -E, -F});
    const int N = std::min({A, B, C});
    if (K > N) return 0.0;

    // sum_k (-1)^k / [k!(A-k)!(B-k)!(C-k)!(E+k)!(F+k)!] over the common
    // denominator D = N! A! B! C! (E+N)! (F+N)!
    detail::BigUint pos(0), neg(0);
    for (int k = K; k <= N; ++k) {
        detail::BigUint t(1);
        t.mul_range(k + 1, N);
        t.mul_range(A - k + 1, A);
        t.mul_range(B - k + 1, B);
        t.mul_range(C - k + 1, C);
        t.mul_range(E + k + 1, E + N);
        t.mul_range(F + k + 1, F + N);
        if (k & 1)
            neg.add(t);
        else
            pos.add(t);
    }
    const int c = pos.cmp(neg);
    if (c == 0) return 0.0;
    detail::BigUint sum = (c > 0) ? pos : neg;
    sum.sub(c > 0 ? neg : pos);

    detail::BigUint den = detail::factorial_big(N);
    den.mul_range(2, A);
    den.mul_range(2, B);
    den.mul_range(2, C);
    den.mul_range(2, E + N);
    den.mul_range(2, F + N);

    // prefactor sqrt(Rn / Rd)
    detail::BigUint rn = detail::factorial_big(A);
    rn.mul_range(2, l1 - l2 + l3);
    rn.mul_range(2, -l1 + l2 + l3);
    rn.mul_range(2, l1 - m1);
    rn.mul_range(2, l1 + m1);
    rn.mul_range(2, l2 - m2);
    rn.mul_range(2, l2 + m2);
    rn.mul_range(2, l3 - m3);
    rn.mul_range(2, l3 + m3);
    detail::BigUint rd = detail::factorial_big(l1 + l2 + l3 + 1);

    long es = 0, ed = 0, en = 0, erd = 0;
    const double ms = sum.to_double_exp(es);
    const double md = den.to_double_exp(ed);
    const double mn = rn.to_double_exp(en);
    const double mrd = rd.to_double_exp(erd);

    double ratio = mn / mrd;
    long e = en - erd;
    if (e & 1) {
        ratio *= 2.0;
        e -= 1;
    }
    double val = std::sqrt(ratio) * (ms / md);
    val = std::ldexp(val, static_cast<int>(e / 2 + es - ed));
    if (c < 0) val = -val;
    if ((l1 - l2 - m3) & 1) val = -val;
    return val;
}

/// Clebsch-Gordan coefficient <l1 m1; l2 m2 | l m> (Condon-Shortley).
inline double clebsch_gordan(int l1, int m1, int l2, int m2, int l, int m) {
    if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m) > l)
        throw std::domain_error("clebsch_gordan: |m| > l");
    const double w = wigner_3j(l1, l2, l, m1, m2, -m);
    double v = std::sqrt(2.0 * l + 1.0) * w;
    if ((l1 - l2 + m) & 1) v = -v;
    return v;
}

namespace detail {

/// Integral of three complex spherical harmonics (no conjugation),
/// nonzero only when m1 + m2 + m3 = 0.
inline double gaunt_complex(int l1, int m1, int l2, int m2, int l3, int m3) {
    const double pref = std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) *
                                  (2.0 * l3 + 1.0) / (4.0 * kPi));
    return pref * wigner_3j(l1, l2, l3, 0, 0, 0) *
           wigner_3j(l1, l2, l3, m1, m2, m3);
}

/// Coefficient of Y_l^a in the complex expansion of the real harmonic
/// R_{l,m}; nonzero only for a = +-m.
inline std::complex<double> real_sh_complex_coeff(int m, int a) {
    if (m == 0) return a == 0 ? 1.0 : 0.0;
    const int mu = std::abs(m);
    if (a != mu && a != -mu) return 0.0;
    const double inv_sqrt2 = 0.70710678118654752440;
    const double sgn = (mu & 1) ? -1.0 : 1.0;
    if (m > 0) return a == -mu ? inv_sqrt2 : sgn * inv_sqrt2;
    return a == -mu ? std::complex<double>(0, inv_sqrt2)
                    : std::complex<double>(0, -sgn * inv_sqrt2);
}

}  // namespace detail

/// Integral of three real spherical harmonics over S^2. Computed from
/// complex-basis Gaunt values through the real<->complex change of basis.
inline double gaunt_coefficient(int l1, int m1, int l2, int m2, int l3,
                                int m3) {
    if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3)
        throw std::domain_error("gaunt_coefficient: |m| > l");
    if ((l1 + l2 + l3) & 1) return 0.0;
    if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return 0.0;

    auto orders = [](int m, int out[2]) {
        if (m == 0) {
            out[0] = 0;
            return 1;
        }
        out[0] = -std::abs(m);
        out[1] = std::abs(m);
        return 2;
    };
    int a[2], b[2], cc[2];
    const int na = orders(m1, a), nb = orders(m2, b), nc = orders(m3, cc);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            for (int k = 0; k < nc; ++k) {
                if (a[i] + b[j] + cc[k] != 0) continue;
                acc += detail::real_sh_complex_coeff(m1, a[i]) *
                       detail::real_sh_complex_coeff(m2, b[j]) *
                       detail::real_sh_complex_coeff(m3, cc[k]) *
                       detail::gaunt_complex(l1, a[i], l2, b[j], l3, cc[k]);
            }
    if (std::abs(acc.imag()) > 1e-12 * (1.0 + std::abs(acc.real())))
        throw numerical_error("gaunt_coefficient: imaginary residue");
    return acc.real();
}

// ---------------------------------------------------------------------------
// Rotations
// ---------------------------------------------------------------------------

inline Eigen::Matrix3d euler_to_matrix(const EulerAnglesZYZ& g) {
    auto rz = [](double a) {
        Eigen::Matrix3d m;
        m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
        return m;
    };
    auto ry = [](double a) {
        Eigen::Matrix3d m;
        m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
        return m;
    };
    return rz(g.alpha) * ry(g.beta) * rz(g.gamma);
}

/// Z-Y-Z Euler angles of a rotation matrix, beta in [0, pi].
inline EulerAnglesZYZ matrix_to_euler(const Eigen::Matrix3d& R) {
    auto wrap = [](double a) {
        a = std::fmod(a, 2 * kPi);
        if (a < 0) a += 2 * kPi;
        if (a >= 2 * kPi) a = 0;
        return a;
    };
    const double sb = std::hypot(R(0, 2), R(1, 2));
    const double beta = std::atan2(sb, R(2, 2));
    if (sb > 1e-12) {
        return {wrap(std::atan2(R(1, 2), R(0, 2))), beta,
                wrap(std::atan2(R(2, 1), -R(2, 0)))};
    }
    if (R(2, 2) > 0)  // beta ~ 0: pure z rotation by alpha+gamma
        return {wrap(std::atan2(R(1, 0), R(0, 0))), 0.0, 0.0};
    return {wrap(std::atan2(-R(1, 0), -R(0, 0))), kPi, 0.0};
}

inline EulerAnglesZYZ compose(const EulerAnglesZYZ& g1,
                              const EulerAnglesZYZ& g2) {
    return matrix_to_euler(euler_to_matrix(g1) * euler_to_matrix(g2));
}

namespace detail {

/// Permutation taking library coordinates to internal (pole-on-z) ones.
inline Eigen::Matrix3d axis_permutation() {
    Eigen::Matrix3d t;
    t << 0, 0, 1, 1, 0, 0, 0, 1, 0;  // (x,y,z) -> (z,x,y)
    return t;
}

/// exp(-i beta J_y) on the degree-l complex basis, via the spectral
/// decomposition of the Hermitian generator (exact for any l, no
/// factorial-sum cancellation).
inline Eigen::MatrixXcd little_d(int l, double beta) {
    const int n = 2 * l + 1;
    Eigen::MatrixXcd jy = Eigen::MatrixXcd::Zero(n, n);
    for (int m = -l; m < l; ++m) {
        const double ap = std::sqrt(double(l - m) * double(l + m + 1));
        jy(m + 1 + l, m + l) = std::complex<double>(0, -0.5 * ap);
        jy(m + l, m + 1 + l) = std::complex<double>(0, 0.5 * ap);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jy);
    Eigen::VectorXcd ph(n);
    for (int i = 0; i < n; ++i) {
        const double lam = es.eigenvalues()(i);
        ph(i) = std::polar(1.0, -beta * lam);
    }
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// Unitary map from complex to real spherical-harmonic coefficients.
inline Eigen::MatrixXcd real_from_complex_matrix(int l) {
    const int n = 2 * l + 1;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
    for (int m = -l; m <= l; ++m) {
        if (m == 0) {
            u(l, l) = 1.0;
            continue;
        }
        const int mu = std::abs(m);
        u(m + l, -mu + l) = real_sh_complex_coeff(m, -mu);
        u(m + l, mu + l) = real_sh_complex_coeff(m, mu);
    }
    return u;
}

}  // namespace detail

/// Real-basis Wigner-D block for degree l: eval_sh_vector's degree-l block
/// satisfies Y^(l)(R r) = D^(l)(g) Y^(l)(r) with R = euler_to_matrix(g).
inline Eigen::MatrixXd wigner_d_matrix(int l, const EulerAnglesZYZ& g) {
    if (l < 0) throw std::domain_error("wigner_d_matrix: negative degree");
    if (l == 0) return Eigen::MatrixXd::Identity(1, 1);
    static const Eigen::Matrix3d T = detail::axis_permutation();
    const Eigen::Matrix3d rint = T * euler_to_matrix(g) * T.transpose();
    const EulerAnglesZYZ gi = matrix_to_euler(rint);

    const int n = 2 * l + 1;
    Eigen::MatrixXcd dc = detail::little_d(l, gi.beta);
    for (int mp = -l; mp <= l; ++mp)
        for (int m = -l; m <= l; ++m)
            dc(mp + l, m + l) *=
                std::polar(1.0, -mp * gi.alpha) * std::polar(1.0, -m * gi.gamma);

    static thread_local std::vector<Eigen::MatrixXcd> u_cache;  // immutable entries
    if (static_cast<int>(u_cache.size()) <= l) u_cache.resize(l + 1);
    if (u_cache[l].size() == 0) u_cache[l] = detail::real_from_complex_matrix(l);
    const Eigen::MatrixXcd& u = u_cache[l];

    const Eigen::MatrixXcd dr = u * dc.conjugate() * u.adjoint();
    if (dr.imag().cwiseAbs().maxCoeff() > 1e-9)
        throw numerical_error("wigner_d_matrix: imaginary residue");
    (void)n;
    return dr.real();
}

/// Block-diagonal rotation acting on an IrrepsVector.
struct WignerDBlocks {
    int L = 0;
    std::vector<Eigen::MatrixXd> blocks;

    IrrepsVector apply(const IrrepsVector& x) const {
        if (x.L > L) throw std::domain_error("WignerDBlocks::apply: degree too large");
        IrrepsVector out(x.L);
        for (int l = 0; l <= x.L; ++l) {
            Eigen::Map<const Eigen::VectorXd> in(x.block(l), 2 * l + 1);
            Eigen::Map<Eigen::VectorXd>(out.block(l), 2 * l + 1) = blocks[l] * in;
        }
        return out;
    }
    /// Inverse rotation (blocks are orthogonal).
    IrrepsVector apply_inverse(const IrrepsVector& x) const {
        if (x.L > L) throw std::domain_error("WignerDBlocks::apply_inverse: degree too large");
        IrrepsVector out(x.L);
        for (int l = 0; l <= x.L; ++l) {
            Eigen::Map<const Eigen::VectorXd> in(x.block(l), 2 * l + 1);
            Eigen::Map<Eigen::VectorXd>(out.block(l), 2 * l + 1) =
                blocks[l].transpose() * in;
        }
        return out;
    }
};

inline WignerDBlocks wigner_d_blocks(int L, const EulerAnglesZYZ& g) {
    WignerDBlocks d;
    d.L = L;
    d.blocks.reserve(L + 1);
    for (int l = 0; l <= L; ++l) d.blocks.push_back(wigner_d_matrix(l, g));
    return d;
}

/// Deterministic rotation g with euler_to_matrix(g) * r = (0, 1, 0).
/// Inputs within 1e-12 of +-(0,1,0) map to the identity / a half turn
/// about z respectively; otherwise the rotation is built from the
/// spherical angles of r with the azimuthal gauge fixed.
inline EulerAnglesZYZ rotation_to_y_axis(const Vec3& r) {
    if (std::abs(r.norm() - 1.0) > 1e-9)
        throw std::domain_error("rotation_to_y_axis: input is not unit-norm");
    const Vec3 yhat{0, 1, 0};
    if ((r - yhat).norm() < 1e-12) return {0, 0, 0};
    if ((r + yhat).norm() < 1e-12) return {kPi, 0, 0};

    const SphericalPoint p = spherical_from_unit(r);
    // internal frame: Ry(-theta) Rz(-psi) maps r to the pole
    Eigen::Matrix3d rzm, rym;
    rzm << std::cos(p.psi), std::sin(p.psi), 0, -std::sin(p.psi), std::cos(p.psi),
        0, 0, 0, 1;
    rym << std::cos(p.theta), 0, -std::sin(p.theta), 0, 1, 0, std::sin(p.theta),
        0, std::cos(p.theta);
    static const Eigen::Matrix3d T = detail::axis_permutation();
    const Eigen::Matrix3d rours = T.transpose() * (rym * rzm) * T;
    return matrix_to_euler(rours);
}

}  // namespace gtp
