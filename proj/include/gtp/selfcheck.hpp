#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gtp/convolution.hpp"
#include "gtp/many_body.hpp"
#include "gtp/oracle.hpp"
#include "gtp/tensor_product.hpp"

namespace gtp::selfcheck {

struct CheckResult {
    std::string name;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    double seconds = 0;
};

namespace detail {

inline IrrepsVector random_vector(int L, std::mt19937_64& rng) {
    IrrepsVector v(L);
    std::normal_distribution<double> nd;
    for (auto& e : v.data) e = nd(rng);
    return v;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec3 v{nd(rng), nd(rng), nd(rng)};
    return v.normalized();
}

inline EulerAnglesZYZ random_rotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {2 * kPi * u(rng), std::acos(2 * u(rng) - 1), 2 * kPi * u(rng)};
}

inline double max_abs_diff(const IrrepsVector& a, const IrrepsVector& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double rel_diff(const IrrepsVector& a, const IrrepsVector& b) {
    double m = 0, s = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
        s = std::max(s, std::abs(b.data[i]));
    }
    return s > 0 ? m / s : m;
}

}  // namespace detail

/// Exhaustive |gaunt_coefficient - quadrature| over all index tuples with
/// degrees <= Lmax, with the harmonics cached at the quadrature nodes.
inline double max_gaunt_quadrature_error(int Lmax) {
    const int lsum = 3 * Lmax;
    const int ntheta = 2 * lsum + 2, npsi = 4 * lsum + 5;
    std::vector<double> gx, gw;
    oracle::gauss_legendre(ntheta, gx, gw);

    const int nc = num_coeffs(Lmax);
    const std::size_t nodes = static_cast<std::size_t>(ntheta) * npsi;
    std::vector<std::vector<double>> Y(nc, std::vector<double>(nodes));
    std::vector<double> wt(nodes);
    for (int i = 0; i < ntheta; ++i) {
        const double theta = std::acos(gx[i]);
        const double s = std::sqrt(std::max(0.0, 1.0 - gx[i] * gx[i]));
        const auto leg = gtp::detail::legendre_normalized_all(Lmax, gx[i], s);
        for (int j = 0; j < npsi; ++j) {
            const double psi = 2 * kPi * j / npsi;
            const std::size_t n = static_cast<std::size_t>(i) * npsi + j;
            wt[n] = gw[i] * 2 * kPi / npsi;
            for (int l = 0; l <= Lmax; ++l) {
                Y[lm_index(l, 0)][n] = leg[l * (l + 1) / 2];
                for (int m = 1; m <= l; ++m) {
                    const double v =
                        gtp::detail::kSqrt2 * leg[l * (l + 1) / 2 + m];
                    Y[lm_index(l, m)][n] = v * std::cos(m * psi);
                    Y[lm_index(l, -m)][n] = v * std::sin(m * psi);
                }
            }
        }
    }

    double worst = 0;
    for (int l1 = 0; l1 <= Lmax; ++l1)
        for (int m1 = -l1; m1 <= l1; ++m1)
            for (int l2 = 0; l2 <= Lmax; ++l2)
                for (int m2 = -l2; m2 <= l2; ++m2)
                    for (int l3 = 0; l3 <= Lmax; ++l3)
                        for (int m3 = -l3; m3 <= l3; ++m3) {
                            const auto &a = Y[lm_index(l1, m1)],
                                       &b = Y[lm_index(l2, m2)],
                                       &c = Y[lm_index(l3, m3)];
                            double q = 0;
                            for (std::size_t n = 0; n < nodes; ++n)
                                q += wt[n] * a[n] * b[n] * c[n];
                            const double g =
                                gaunt_coefficient(l1, m1, l2, m2, l3, m3);
                            worst = std::max(worst, std::abs(q - g));
                        }
    return worst;
}

/// Runs the module invariant suites. `full` widens degree ranges and turns
/// on the exhaustive scans.
inline std::vector<CheckResult> run_checks(bool full) {
    std::vector<CheckResult> results;
    TableCache tables(std::nullopt);

    auto add = [&](const std::string& name, double tol,
                   const std::function<double()>& fn) {
        CheckResult r;
        r.name = name;
        r.tolerance = tol;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            r.residual = fn();
            r.pass = r.residual < tol;
        } catch (const std::exception& e) {
            r.residual = std::numeric_limits<double>::infinity();
            r.pass = false;
            r.name += std::string(" [exception: ") + e.what() + "]";
        }
        r.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        results.push_back(r);
    };

    const int Lbig = full ? 8 : 4;
    const int Lex = full ? 6 : 4;

    add("sh_orthonormality_quadrature", 1e-12, [&] {
        // integrate Y_a Y_b with Y_0^0 as the third factor: delta / (2 sqrt pi)
        const double c = 0.28209479177387814;
        double worst = 0;
        for (int l1 = 0; l1 <= 4; ++l1)
            for (int m1 = -l1; m1 <= l1; ++m1)
                for (int l2 = l1; l2 <= 4; ++l2)
                    for (int m2 = -l2; m2 <= l2; ++m2) {
                        const double q =
                            oracle::gaunt_coeff_quadrature(l1, m1, l2, m2, 0, 0);
                        const double want =
                            (l1 == l2 && m1 == m2) ? c : 0.0;
                        worst = std::max(worst, std::abs(q / c - want / c));
                    }
        return worst;
    });

    add("sh_reflection_parity", 1e-12, [&] {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0;
        for (int rep = 0; rep < 20; ++rep) {
            const SphericalPoint p{std::acos(2 * u(rng) - 1), 2 * kPi * u(rng)};
            const SphericalPoint q = antipode(p);
            for (int l = 0; l <= 6; ++l)
                for (int m = -l; m <= l; ++m) {
                    const double sign = (l & 1) ? -1.0 : 1.0;
                    worst = std::max(worst,
                                     std::abs(eval_real_sh(l, m, q) -
                                              sign * eval_real_sh(l, m, p)));
                }
        }
        return worst;
    });

    add("wigner_d_defining_property", 1e-9, [&] {
        std::mt19937_64 rng(102);
        double worst = 0;
        const int L = full ? 6 : 4;
        const int reps = full ? 100 : 25;
        for (int rep = 0; rep < reps; ++rep) {
            const auto g = detail::random_rotation(rng);
            const Vec3 r = detail::random_unit(rng);
            const Eigen::Vector3d rr =
                euler_to_matrix(g) * Eigen::Vector3d(r.x, r.y, r.z);
            const auto lhs = eval_sh_vector(L, Vec3{rr(0), rr(1), rr(2)});
            const auto rhs = wigner_d_blocks(L, g).apply(eval_sh_vector(L, r));
            worst = std::max(worst, detail::max_abs_diff(lhs, rhs));
        }
        return worst;
    });

    add("wigner_d_orthogonality", 1e-10, [&] {
        std::mt19937_64 rng(103);
        double worst = 0;
        for (int rep = 0; rep < 10; ++rep) {
            const auto d = wigner_d_blocks(Lbig, detail::random_rotation(rng));
            for (int l = 0; l <= Lbig; ++l) {
                const Eigen::MatrixXd g =
                    d.blocks[l].transpose() * d.blocks[l] -
                    Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1);
                worst = std::max(worst, g.cwiseAbs().maxCoeff());
            }
        }
        return worst;
    });

    add("wigner_d_composition", 1e-9, [&] {
        std::mt19937_64 rng(104);
        double worst = 0;
        for (int rep = 0; rep < 10; ++rep) {
            const auto g1 = detail::random_rotation(rng);
            const auto g2 = detail::random_rotation(rng);
            const auto g12 = compose(g1, g2);
            for (int l = 0; l <= Lbig; ++l) {
                const Eigen::MatrixXd want =
                    wigner_d_matrix(l, g1) * wigner_d_matrix(l, g2);
                worst = std::max(worst, (wigner_d_matrix(l, g12) - want)
                                            .cwiseAbs()
                                            .maxCoeff());
            }
        }
        return worst;
    });

    add("cg_orthogonality", 1e-11, [&] {
        double worst = 0;
        for (int l1 = 0; l1 <= 3; ++l1)
            for (int l2 = 0; l2 <= 3; ++l2) {
                for (int l = std::abs(l1 - l2); l <= l1 + l2; ++l)
                    for (int lp = std::abs(l1 - l2); lp <= l1 + l2; ++lp)
                        for (int m = -l; m <= l; ++m)
                            for (int mp = -lp; mp <= lp; ++mp) {
                                double s = 0;
                                for (int m1 = -l1; m1 <= l1; ++m1)
                                    for (int m2 = -l2; m2 <= l2; ++m2)
                                        s += clebsch_gordan(l1, m1, l2, m2, l, m) *
                                             clebsch_gordan(l1, m1, l2, m2, lp, mp);
                                const double want =
                                    (l == lp && m == mp) ? 1.0 : 0.0;
                                worst = std::max(worst, std::abs(s - want));
                            }
                for (int m1 = -l1; m1 <= l1; ++m1)
                    for (int m2 = -l2; m2 <= l2; ++m2)
                        for (int n1 = -l1; n1 <= l1; ++n1)
                            for (int n2 = -l2; n2 <= l2; ++n2) {
                                double s = 0;
                                for (int l = std::abs(l1 - l2); l <= l1 + l2; ++l)
                                    for (int m = -l; m <= l; ++m)
                                        s += clebsch_gordan(l1, m1, l2, m2, l, m) *
                                             clebsch_gordan(l1, n1, l2, n2, l, m);
                                const double want =
                                    (m1 == n1 && m2 == n2) ? 1.0 : 0.0;
                                worst = std::max(worst, std::abs(s - want));
                            }
            }
        return worst;
    });

    add("cg_swap_symmetry", 1e-12, [&] {
        double worst = 0;
        for (int l1 = 0; l1 <= 3; ++l1)
            for (int l2 = 0; l2 <= 3; ++l2)
                for (int l = std::abs(l1 - l2); l <= l1 + l2; ++l)
                    for (int m1 = -l1; m1 <= l1; ++m1)
                        for (int m2 = -l2; m2 <= l2; ++m2) {
                            const int m = m1 + m2;
                            if (std::abs(m) > l) continue;
                            const double sign =
                                ((l1 + l2 - l) & 1) ? -1.0 : 1.0;
                            worst = std::max(
                                worst,
                                std::abs(clebsch_gordan(l1, m1, l2, m2, l, m) -
                                         sign * clebsch_gordan(l2, m2, l1, m1,
                                                               l, m)));
                        }
        return worst;
    });

    add("gaunt_permutation_symmetry", 1e-12, [&] {
        std::mt19937_64 rng(105);
        std::uniform_int_distribution<int> dl(0, 4);
        double worst = 0;
        for (int rep = 0; rep < 200; ++rep) {
            const int l1 = dl(rng), l2 = dl(rng), l3 = dl(rng);
            std::uniform_int_distribution<int> d1(-l1, l1), d2(-l2, l2),
                d3(-l3, l3);
            const int m1 = d1(rng), m2 = d2(rng), m3 = d3(rng);
            const double g = gaunt_coefficient(l1, m1, l2, m2, l3, m3);
            worst = std::max(
                {worst, std::abs(gaunt_coefficient(l2, m2, l1, m1, l3, m3) - g),
                 std::abs(gaunt_coefficient(l3, m3, l2, m2, l1, m1) - g),
                 std::abs(gaunt_coefficient(l1, m1, l3, m3, l2, m2) - g)});
        }
        return worst;
    });

    add(full ? "gaunt_vs_quadrature_exhaustive_L6" : "gaunt_vs_quadrature_L3",
        1e-10, [&] { return max_gaunt_quadrature_error(full ? 6 : 3); });

    add("gaunt_selection_rules_exact", 0.5, [&] {
        // residual 0 when every forbidden block is exactly zero, 1 otherwise
        std::mt19937_64 rng(106);
        for (int l1 = 0; l1 <= Lex; ++l1)
            for (int l2 = 0; l2 <= Lex; ++l2) {
                std::vector<double> xb(2 * l1 + 1), yb(2 * l2 + 1);
                std::normal_distribution<double> nd;
                for (auto& v : xb) v = nd(rng);
                for (auto& v : yb) v = nd(rng);
                for (int l = 0; l <= Lex; ++l) {
                    if (!((l1 + l2 + l) & 1) && l >= std::abs(l1 - l2) &&
                        l <= l1 + l2)
                        continue;
                    const auto blk =
                        gaunt_single_tp(xb, l1, yb, l2, l, tables);
                    for (double v : blk)
                        if (v != 0.0) return 1.0;
                }
            }
        return 0.0;
    });

    add("table_sparsity_v_eq_pm_m", 0.5, [&] {
        const auto& t = tables.get(full ? 16 : 8);
        for (const auto& e : t.y)
            if (e.v != e.m && e.v != -e.m) return 1.0;
        for (const auto& e : t.z)
            if (e.v != e.m && e.v != -e.m) return 1.0;
        for (const auto& e : t.y)
            if (std::abs(e.u) > t.L) return 1.0;
        for (const auto& e : t.z)
            if (std::abs(e.u) > t.L) return 1.0;
        return 0.0;
    });

    add("conversion_round_trip", 1e-10, [&] {
        std::mt19937_64 rng(107);
        double worst = 0;
        for (int L : full ? std::vector<int>{1, 2, 4, 8, 16}
                          : std::vector<int>{1, 2, 4}) {
            const auto& t = tables.get(L);
            for (int rep = 0; rep < (full ? 50 : 10); ++rep) {
                const auto x = detail::random_vector(L, rng);
                const auto back = fourier_to_sh(sh_to_fourier(x, t), t, L);
                worst = std::max(worst, detail::max_abs_diff(x, back));
            }
        }
        return worst;
    });

    add("conversion_pointwise_fidelity", 1e-9, [&] {
        std::mt19937_64 rng(108);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0;
        const int L = 4;
        const auto& t = tables.get(L);
        for (int rep = 0; rep < 5; ++rep) {
            const auto x = detail::random_vector(L, rng);
            const auto f = sh_to_fourier(x, t);
            for (int k = 0; k < 2 * num_coeffs(L); ++k) {
                const double theta = std::acos(2 * u(rng) - 1);
                const double psi = 2 * kPi * u(rng);
                double sh = 0;
                for (int l = 0; l <= L; ++l)
                    for (int m = -l; m <= l; ++m)
                        sh += x.at(l, m) * eval_real_sh(l, m, theta, psi);
                const auto fv = f.eval(theta, psi);
                worst = std::max(worst, std::abs(fv.real() - sh));
                worst = std::max(worst, std::abs(fv.imag()));
            }
        }
        return worst;
    });

    add("sparse_filter_bitwise_dense", 0.5, [&] {
        std::mt19937_64 rng(109);
        std::normal_distribution<double> nd;
        const int L = Lbig;
        const auto& t = tables.get(L);
        std::vector<double> slice(L + 1);
        for (auto& v : slice) v = nd(rng);
        IrrepsVector filt(L);
        for (int l = 0; l <= L; ++l) filt.at(l, 0) = slice[l];
        const auto fs = sh_to_fourier_sparse_filter(slice, t);
        const auto fd = sh_to_fourier(filt, t);
        for (int u2 = -L; u2 <= L; ++u2)
            for (int v2 = -L; v2 <= L; ++v2) {
                const auto a = fs.at(u2, v2), b = fd.at(u2, v2);
                if (a.real() != b.real() || a.imag() != b.imag()) return 1.0;
                if (v2 != 0 && a != std::complex<double>(0.0)) return 1.0;
            }
        return 0.0;
    });

    add("oracle_equivalence_full_tp", 1e-9, [&] {
        std::mt19937_64 rng(110);
        double worst = 0;
        for (int L = 1; L <= Lbig; ++L) {
            const int pairs = full ? (L >= 7 ? 3 : 5) : 5;
            for (int rep = 0; rep < pairs; ++rep) {
                const auto x = detail::random_vector(L, rng);
                const auto y = detail::random_vector(L, rng);
                const auto fast = gaunt_full_tp(x, y, 2 * L, tables);
                const auto ref = oracle::gaunt_tp_reference(x, y, 2 * L);
                worst = std::max(worst, detail::rel_diff(fast, ref));
            }
        }
        return worst;
    });

    add("tp_bilinearity", 1e-10, [&] {
        std::mt19937_64 rng(111);
        std::normal_distribution<double> nd;
        double worst = 0;
        for (int rep = 0; rep < 5; ++rep) {
            const auto x1 = detail::random_vector(4, rng);
            const auto x2 = detail::random_vector(4, rng);
            const auto y = detail::random_vector(4, rng);
            const double a = nd(rng), b = nd(rng);
            IrrepsVector xc(4);
            for (std::size_t i = 0; i < xc.data.size(); ++i)
                xc.data[i] = a * x1.data[i] + b * x2.data[i];
            const auto lhs = gaunt_full_tp(xc, y, 8, tables);
            const auto t1 = gaunt_full_tp(x1, y, 8, tables);
            const auto t2 = gaunt_full_tp(x2, y, 8, tables);
            for (std::size_t i = 0; i < lhs.data.size(); ++i)
                worst = std::max(worst, std::abs(lhs.data[i] - a * t1.data[i] -
                                                 b * t2.data[i]));
        }
        return worst;
    });

    add("tp_swap_symmetry", 1e-11, [&] {
        std::mt19937_64 rng(112);
        double worst = 0;
        for (int rep = 0; rep < 5; ++rep) {
            const auto x = detail::random_vector(4, rng);
            const auto y = detail::random_vector(4, rng);
            worst = std::max(worst,
                             detail::max_abs_diff(gaunt_full_tp(x, y, 8, tables),
                                                  gaunt_full_tp(y, x, 8, tables)));
        }
        return worst;
    });

    add("equivariance_feature_interaction", 1e-8, [&] {
        std::mt19937_64 rng(113);
        double worst = 0;
        const int reps = full ? 25 : 10;
        for (int rep = 0; rep < reps; ++rep) {
            const auto g = detail::random_rotation(rng);
            const auto x = detail::random_vector(4, rng);
            const auto y = detail::random_vector(4, rng);
            const auto d = wigner_d_blocks(8, g);
            const auto lhs = gaunt_full_tp(d.apply(x), d.apply(y), 8, tables);
            const auto rhs = d.apply(gaunt_full_tp(x, y, 8, tables));
            worst = std::max(worst, detail::max_abs_diff(lhs, rhs));
        }
        return worst;
    });

    add("equivariance_reflection_parity", 1e-10, [&] {
        std::mt19937_64 rng(114);
        double worst = 0;
        for (int rep = 0; rep < 5; ++rep) {
            auto x = detail::random_vector(3, rng);
            auto y = detail::random_vector(3, rng);
            const auto out = gaunt_full_tp(x, y, 6, tables);
            auto flip = [](IrrepsVector v) {
                for (int l = 0; l <= v.L; ++l)
                    if (l & 1)
                        for (int m = -l; m <= l; ++m) v.at(l, m) = -v.at(l, m);
                return v;
            };
            const auto out_f = gaunt_full_tp(flip(x), flip(y), 6, tables);
            worst = std::max(worst, detail::max_abs_diff(out_f, flip(out)));
        }
        return worst;
    });

    add("equivariance_convolution", 1e-8, [&] {
        std::mt19937_64 rng(115);
        std::normal_distribution<double> nd;
        double worst = 0;
        const int reps = full ? 25 : 10;
        for (int rep = 0; rep < reps; ++rep) {
            const auto g = detail::random_rotation(rng);
            const Eigen::Matrix3d R = euler_to_matrix(g);
            const auto x = detail::random_vector(4, rng);
            FilterWeights h;
            h.h.resize(5);
            for (auto& v : h.h) v = nd(rng);
            const Vec3 ri{nd(rng), nd(rng), nd(rng)}, rj{nd(rng), nd(rng), nd(rng)};
            auto rot = [&](const Vec3& v) {
                const Eigen::Vector3d w = R * Eigen::Vector3d(v.x, v.y, v.z);
                return Vec3{w(0), w(1), w(2)};
            };
            const auto d = wigner_d_blocks(4, g);
            const auto lhs = equiv_convolution(
                d.apply(x), edge_frame(rot(ri), rot(rj)), h, 4, tables);
            const auto rhs =
                d.apply(equiv_convolution(x, edge_frame(ri, rj), h, 4, tables));
            worst = std::max(worst, detail::max_abs_diff(lhs, rhs));
        }
        return worst;
    });

    add("equivariance_self_product", 1e-8, [&] {
        std::mt19937_64 rng(116);
        double worst = 0;
        const int reps = full ? 20 : 8;
        for (int rep = 0; rep < reps; ++rep) {
            const auto g = detail::random_rotation(rng);
            const auto x = detail::random_vector(4, rng);
            const auto d = wigner_d_blocks(4, g);
            const DegreeWeights w(4, 1.0);
            const auto lhs = self_product(d.apply(x), 3, w, 4, tables);
            const auto rhs = d.apply(self_product(x, 3, w, 4, tables));
            worst = std::max(worst, detail::max_abs_diff(lhs, rhs));
        }
        return worst;
    });

    add("sparse_vs_dense_convolution", 1e-9, [&] {
        std::mt19937_64 rng(117);
        std::normal_distribution<double> nd;
        double worst = 0;
        const int reps = full ? 50 : 15;
        for (int rep = 0; rep < reps; ++rep) {
            const int L = 2 + 2 * (rep % 3);
            const auto x = detail::random_vector(L, rng);
            FilterWeights h;
            h.h.resize(L + 1);
            for (auto& v : h.h) v = nd(rng);
            const auto e = edge_frame(Vec3{nd(rng), nd(rng), nd(rng)},
                                      Vec3{nd(rng), nd(rng), nd(rng)});
            const auto sparse = equiv_convolution(x, e, h, L, tables);
            const DegreeWeights ones(L, 1.0), wh(L, h.h);
            const auto dense =
                gaunt_weighted_tp(x, eval_sh_vector(L, e.unit), ones, wh, ones,
                                  L, tables);
            worst = std::max(worst, detail::rel_diff(sparse, dense));
        }
        return worst;
    });

    add("many_body_tree_vs_reference", 1e-9, [&] {
        std::mt19937_64 rng(118);
        double worst = 0;
        for (int n = 2; n <= 4; ++n) {
            std::vector<IrrepsVector> ops;
            for (int i = 0; i < n; ++i) ops.push_back(detail::random_vector(2, rng));
            const auto ref = oracle::many_body_reference(ops, 2 * n);
            const auto tree =
                multi_tp(ops, 2 * n, tables, MultiTpStrategy::kBalancedTree);
            const auto lf =
                multi_tp(ops, 2 * n, tables, MultiTpStrategy::kLeftFold);
            const auto fus =
                multi_tp(ops, 2 * n, tables, MultiTpStrategy::kFusedFreq);
            worst = std::max({worst, detail::rel_diff(tree, ref),
                              detail::rel_diff(lf, ref),
                              detail::rel_diff(fus, ref)});
        }
        return worst;
    });

    add("many_body_homogeneity", 1e-9, [&] {
        std::mt19937_64 rng(119);
        std::normal_distribution<double> nd;
        double worst = 0;
        for (int nu = 2; nu <= 4; ++nu) {
            const auto x = detail::random_vector(3, rng);
            const double c = nd(rng);
            IrrepsVector xc = x;
            for (auto& v : xc.data) v *= c;
            const DegreeWeights w(3, 1.0);
            const auto a = self_product(xc, nu, w, 3, tables);
            auto b = self_product(x, nu, w, 3, tables);
            for (auto& v : b.data) v *= std::pow(c, nu);
            worst = std::max(worst, detail::rel_diff(a, b));
        }
        return worst;
    });

    return results;
}

}  // namespace gtp::selfcheck
