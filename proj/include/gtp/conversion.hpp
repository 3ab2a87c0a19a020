#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gtp/detail/crc32.hpp"
#include "gtp/detail/fft.hpp"
#include "gtp/so3.hpp"
#include "gtp/types.hpp"

namespace gtp {

/// Complex coefficients f*_{u,v} of a function on the torus extension of the
/// sphere, u,v in [-L, L], row-major with u slowest.
struct FourierCoeffs2D {
    int L = 0;
    std::vector<std::complex<double>> data;

    FourierCoeffs2D() : data(1, 0.0) {}
    explicit FourierCoeffs2D(int L_)
        : L(L_), data(static_cast<std::size_t>(2 * L_ + 1) * (2 * L_ + 1), 0.0) {}

    std::size_t index(int u, int v) const {
        return static_cast<std::size_t>(u + L) * (2 * L + 1) + (v + L);
    }
    std::complex<double>& at(int u, int v) { return data[index(u, v)]; }
    std::complex<double> at(int u, int v) const { return data[index(u, v)]; }

    /// Evaluate sum f_{u,v} e^{i(u theta + v psi)} at a point.
    std::complex<double> eval(double theta, double psi) const {
        std::complex<double> acc = 0.0;
        for (int u = -L; u <= L; ++u)
            for (int v = -L; v <= L; ++v)
                acc += at(u, v) * std::polar(1.0, u * theta + v * psi);
        return acc;
    }

    /// Copy into a grid of different bandwidth (truncate or zero-pad).
    FourierCoeffs2D resized(int L_new) const {
        FourierCoeffs2D out(L_new);
        const int c = std::min(L, L_new);
        for (int u = -c; u <= c; ++u)
            for (int v = -c; v <= c; ++v) out.at(u, v) = at(u, v);
        return out;
    }
};

/// Sparse change of basis between spherical-harmonic and 2D Fourier
/// coefficients for a fixed maximum degree L. Entries are grouped by degree
/// so truncated applications stay O(L^3).
struct ConversionTable {
    struct Entry {
        int l, m, u, v;
        std::complex<double> c;
    };

    int L = 0;
    std::vector<Entry> y;  ///< SH -> Fourier, sorted by (l, m, u)
    std::vector<Entry> z;  ///< Fourier -> SH, sorted by (l, m, u)
    std::vector<std::size_t> y_deg_off;  ///< y entries of degree l: [off[l], off[l+1])
    std::vector<std::size_t> z_deg_off;
    std::vector<std::size_t> y_m0_begin, y_m0_end;  ///< m = 0 slice per degree

    void rebuild_offsets() {
        y_deg_off.assign(L + 2, y.size());
        z_deg_off.assign(L + 2, z.size());
        for (std::size_t i = y.size(); i-- > 0;) y_deg_off[y[i].l] = i;
        for (std::size_t i = z.size(); i-- > 0;) z_deg_off[z[i].l] = i;
        for (int l = L; l >= 0; --l) {
            if (y_deg_off[l] > y_deg_off[l + 1]) y_deg_off[l] = y_deg_off[l + 1];
            if (z_deg_off[l] > z_deg_off[l + 1]) z_deg_off[l] = z_deg_off[l + 1];
        }
        y_m0_begin.assign(L + 1, 0);
        y_m0_end.assign(L + 1, 0);
        for (int l = 0; l <= L; ++l) {
            std::size_t b = y_deg_off[l], e = y_deg_off[l + 1];
            while (b < e && y[b].m < 0) ++b;
            std::size_t e0 = b;
            while (e0 < e && y[e0].m == 0) ++e0;
            y_m0_begin[l] = b;
            y_m0_end[l] = e0;
        }
    }
};

namespace detail {

/// Fourier coefficients a_u, u = 0..l, of the theta profile of the real
/// harmonic (l, m) on the torus extension (a_{-u} = conj(a_u); the profile
/// is real). Exact: the profile is a trig polynomial of degree l sampled on
/// M >= 2l+2 points; compensated summation keeps true zeros below the
/// pruning threshold.
inline std::vector<std::complex<double>> theta_profile_dft(
    int l, int m, const std::vector<std::vector<double>>& legendre_by_theta,
    int M) {
    const int mu = std::abs(m);
    const double norm = (m == 0) ? 1.0 : kSqrt2;
    std::vector<std::complex<double>> out(l + 1);
    for (int u = 0; u <= l; ++u) {
        double re = 0, rec = 0, im = 0, imc = 0;  // Kahan pairs
        for (int j = 0; j < M; ++j) {
            double f = norm * legendre_by_theta[j][l * (l + 1) / 2 + mu];
            if (2 * j > M && (mu & 1)) f = -f;  // theta > pi half of the extension
            const double ang = -2.0 * kPi * u * j / M;
            const double tr = f * std::cos(ang), ti = f * std::sin(ang);
            double yr = tr - rec, t2 = re + yr;
            rec = (t2 - re) - yr;
            re = t2;
            double yi = ti - imc, t3 = im + yi;
            imc = (t3 - im) - yi;
            im = t3;
        }
        out[u] = std::complex<double>(re / M, im / M);
    }
    return out;
}

}  // namespace detail

/// Build the SH <-> 2D Fourier change-of-basis tables for degrees up to L.
/// The y table comes from sampling each harmonic on a (4L+4)^2 uniform torus
/// grid and reading off the discrete Fourier coefficients (the grid is
/// separable, so the transform factorizes into 1D transforms); the z table
/// is the pseudo-inverse of the y table restricted to the v = +-m sparsity
/// pattern, solved densely per |m|.
inline ConversionTable build_conversion_table(int L) {
    if (L < 0) throw std::domain_error("build_conversion_table: negative degree");
    if (L > kMaxTableDegree)
        throw std::length_error("build_conversion_table: L beyond capacity");

    const int M = 4 * L + 4;
    // normalized Legendre tables at every theta sample (positive sin branch)
    std::vector<std::vector<double>> leg(M);
    for (int j = 0; j < M; ++j) {
        const double th = 2.0 * kPi * j / M;
        const double x = std::cos(th);
        const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
        leg[j] = detail::legendre_normalized_all(L, x, s);
    }

    constexpr double kPrune = 1e-14;
    ConversionTable t;
    t.L = L;

    // profiles per (l, |m|), combined with the exact psi coefficients
    std::vector<std::vector<std::vector<std::complex<double>>>> prof(L + 1);
    for (int l = 0; l <= L; ++l) {
        prof[l].resize(l + 1);
        for (int mu = 0; mu <= l; ++mu)
            prof[l][mu] = detail::theta_profile_dft(l, mu, leg, M);
    }

    const std::complex<double> ihalf(0.0, 0.5);
    for (int l = 0; l <= L; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int mu = std::abs(m);
            const auto& a = prof[l][mu];
            for (int u = -l; u <= l; ++u) {
                const std::complex<double> au =
                    u >= 0 ? a[u] : std::conj(a[-u]);
                if (m == 0) {
                    if (std::abs(au) > kPrune) t.y.push_back({l, 0, u, 0, au});
                } else if (m > 0) {
                    // cos(mu psi) = (e^{i mu psi} + e^{-i mu psi}) / 2
                    const std::complex<double> c = 0.5 * au;
                    if (std::abs(c) > kPrune) {
                        t.y.push_back({l, m, u, -mu, c});
                        t.y.push_back({l, m, u, mu, c});
                    }
                } else {
                    // sin(mu psi) = (e^{i mu psi} - e^{-i mu psi}) / (2i)
                    const std::complex<double> cp = -ihalf * au;
                    if (std::abs(cp) > kPrune) {
                        t.y.push_back({l, m, u, mu, cp});
                        t.y.push_back({l, m, u, -mu, -cp});
                    }
                }
            }
        }
    }
    std::sort(t.y.begin(), t.y.end(), [](const auto& a, const auto& b) {
        return std::tie(a.l, a.m, a.u, a.v) < std::tie(b.l, b.m, b.u, b.v);
    });

    // z table: per |m|, least-squares inverse of the y map
    for (int mu = 0; mu <= L; ++mu) {
        const int nl = L - mu + 1;                  // degrees mu..L
        const int ncols = (mu == 0) ? nl : 2 * nl;  // (l, +mu) and (l, -mu)
        const int nu = 2 * L + 1;
        const int nrows = (mu == 0) ? nu : 2 * nu;  // rows (u, +mu), (u, -mu)
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nrows, ncols);
        auto col_of = [&](int l, int m) {
            const int k = l - mu;
            if (mu == 0) return k;
            return 2 * k + (m > 0 ? 0 : 1);
        };
        auto row_of = [&](int u, int v) {
            const int k = u + L;
            if (mu == 0) return k;
            return 2 * k + (v > 0 ? 0 : 1);
        };
        for (int l = mu; l <= L; ++l) {
            const auto& a = prof[l][mu];
            for (int u = -l; u <= l; ++u) {
                const std::complex<double> au =
                    u >= 0 ? a[u] : std::conj(a[-u]);
                if (mu == 0) {
                    A(row_of(u, 0), col_of(l, 0)) = au;
                } else {
                    A(row_of(u, mu), col_of(l, mu)) += 0.5 * au;
                    A(row_of(u, -mu), col_of(l, mu)) += 0.5 * au;
                    A(row_of(u, mu), col_of(l, -mu)) += -ihalf * au;
                    A(row_of(u, -mu), col_of(l, -mu)) += ihalf * au;
                }
            }
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
        const Eigen::MatrixXcd Z = cod.pseudoInverse();
        for (int l = mu; l <= L; ++l) {
            const int mlist[2] = {mu, -mu};
            const int nm = (mu == 0) ? 1 : 2;
            for (int im = 0; im < nm; ++im) {
                const int m = mlist[im];
                for (int u = -L; u <= L; ++u) {
                    const int vlist[2] = {mu, -mu};
                    const int nv = (mu == 0) ? 1 : 2;
                    for (int iv = 0; iv < nv; ++iv) {
                        const int v = vlist[iv];
                        const std::complex<double> c =
                            Z(col_of(l, m), row_of(u, v));
                        if (std::abs(c) > kPrune) t.z.push_back({l, m, u, v, c});
                    }
                }
            }
        }
    }
    std::sort(t.z.begin(), t.z.end(), [](const auto& a, const auto& b) {
        return std::tie(a.l, a.m, a.u, a.v) < std::tie(b.l, b.m, b.u, b.v);
    });

    t.rebuild_offsets();
    return t;
}

/// Convert SH coefficients to 2D Fourier coefficients (Fourier grid sized by
/// the table degree). O(L^3) by the v = +-m sparsity.
inline FourierCoeffs2D sh_to_fourier(const IrrepsVector& x,
                                     const ConversionTable& t,
                                     OpCounter* counter = nullptr) {
    if (x.L > t.L) throw std::domain_error("sh_to_fourier: degree exceeds table");
    FourierCoeffs2D f(t.L);
    const std::size_t end = t.y_deg_off[x.L + 1];
    for (std::size_t i = 0; i < end; ++i) {
        const auto& e = t.y[i];
        f.at(e.u, e.v) += x.at(e.l, e.m) * e.c;
    }
    if (counter) counter->madds += end;
    return f;
}

/// Convert 2D Fourier coefficients back to SH coefficients, truncated at
/// L_out. Exact when the grid lies in the span of SH expansions (products of
/// band-limited functions); otherwise the table-defined projection.
inline IrrepsVector fourier_to_sh(const FourierCoeffs2D& f,
                                  const ConversionTable& t, int L_out,
                                  OpCounter* counter = nullptr) {
    if (f.L > t.L) throw std::domain_error("fourier_to_sh: grid exceeds table");
    if (L_out > f.L) throw std::domain_error("fourier_to_sh: L_out exceeds grid");
    IrrepsVector out(L_out);
    double max_im = 0.0, max_re = 0.0;
    const std::size_t end = t.z_deg_off[L_out + 1];
    std::size_t used = 0;
    for (std::size_t i = 0; i < end;) {
        const int l = t.z[i].l, m = t.z[i].m;
        std::complex<double> acc = 0.0;
        for (; i < end && t.z[i].l == l && t.z[i].m == m; ++i) {
            const auto& e = t.z[i];
            if (std::abs(e.u) <= f.L && std::abs(e.v) <= f.L) {
                acc += e.c * f.at(e.u, e.v);
                ++used;
            }
        }
        out.at(l, m) = acc.real();
        max_im = std::max(max_im, std::abs(acc.imag()));
        max_re = std::max(max_re, std::abs(acc.real()));
    }
    if (counter) counter->madds += used;
    if (max_im > 1e-8 * std::max(1.0, max_re))
        throw numerical_error("fourier_to_sh: imaginary residue too large");
    return out;
}

/// Fourier grid of a y-axis-aligned filter given its m = 0 coefficients per
/// degree. Nonzero only on the v = 0 column; O(L^2).
inline FourierCoeffs2D sh_to_fourier_sparse_filter(
    const std::vector<double>& filter_m0, const ConversionTable& t,
    OpCounter* counter = nullptr) {
    const int Lf = static_cast<int>(filter_m0.size()) - 1;
    if (Lf < 0)
        throw std::domain_error("sh_to_fourier_sparse_filter: empty filter");
    if (Lf > t.L)
        throw std::domain_error("sh_to_fourier_sparse_filter: degree exceeds table");
    FourierCoeffs2D f(t.L);
    std::size_t used = 0;
    for (int l = 0; l <= Lf; ++l) {
        for (std::size_t i = t.y_m0_begin[l]; i < t.y_m0_end[l]; ++i) {
            const auto& e = t.y[i];
            f.at(e.u, 0) += filter_m0[l] * e.c;
            ++used;
        }
    }
    if (counter) counter->madds += used;
    return f;
}

// ---------------------------------------------------------------------------
// On-disk coefficient cache
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(char((v >> (8 * i)) & 0xFF));
}
inline void put_i16(std::string& s, std::int16_t v) {
    const auto u = static_cast<std::uint16_t>(v);
    s.push_back(char(u & 0xFF));
    s.push_back(char((u >> 8) & 0xFF));
}
inline void put_f64(std::string& s, double v) {
    put_u64(s, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
    const unsigned char* p;
    std::size_t n, pos = 0;
    bool ok = true;

    template <typename T, int W>
    T get() {
        if (pos + W > n) {
            ok = false;
            return T{};
        }
        std::uint64_t v = 0;
        for (int i = 0; i < W; ++i) v |= std::uint64_t(p[pos + i]) << (8 * i);
        pos += W;
        return static_cast<T>(v);
    }
    std::uint32_t u32() { return get<std::uint32_t, 4>(); }
    std::uint64_t u64() { return get<std::uint64_t, 8>(); }
    std::int16_t i16() { return static_cast<std::int16_t>(get<std::uint16_t, 2>()); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t, 8>()); }
};

inline void serialize_entries(std::string& buf,
                              const std::vector<ConversionTable::Entry>& es) {
    put_u64(buf, es.size());
    for (const auto& e : es) {
        put_i16(buf, static_cast<std::int16_t>(e.l));  // l stored as u16
        put_i16(buf, static_cast<std::int16_t>(e.m));
        put_i16(buf, static_cast<std::int16_t>(e.u));
        put_i16(buf, static_cast<std::int16_t>(e.v));
        put_f64(buf, e.c.real());
        put_f64(buf, e.c.imag());
    }
}

}  // namespace detail

constexpr std::uint32_t kCacheFormatVersion = 1;

/// Serialized table: "GNTB" | version u32 | L u32 | y count u64 | y entries
/// (l u16, m i16, u i16, v i16, re f64, im f64) | z count u64 | z entries |
/// CRC32 of all preceding bytes.
inline std::string serialize_conversion_table(const ConversionTable& t) {
    std::string buf;
    buf.reserve(32 + 24 * (t.y.size() + t.z.size()));
    buf += "GNTB";
    detail::put_u32(buf, kCacheFormatVersion);
    detail::put_u32(buf, static_cast<std::uint32_t>(t.L));
    detail::serialize_entries(buf, t.y);
    detail::serialize_entries(buf, t.z);
    detail::put_u32(buf, detail::crc32(buf.data(), buf.size()));
    return buf;
}

/// Parse a serialized table; nullopt on wrong magic, version, CRC, or size.
inline std::optional<ConversionTable> parse_conversion_table(
    const std::string& buf) {
    if (buf.size() < 4 + 4 + 4 + 8 + 8 + 4) return std::nullopt;
    if (buf.compare(0, 4, "GNTB") != 0) return std::nullopt;
    const std::size_t body = buf.size() - 4;
    detail::ByteReader crc_r{
        reinterpret_cast<const unsigned char*>(buf.data()) + body, 4};
    const std::uint32_t stored_crc = crc_r.u32();
    if (detail::crc32(buf.data(), body) != stored_crc) return std::nullopt;

    detail::ByteReader r{reinterpret_cast<const unsigned char*>(buf.data()),
                         body};
    r.pos = 4;  // skip magic
    if (r.u32() != kCacheFormatVersion) return std::nullopt;
    ConversionTable t;
    t.L = static_cast<int>(r.u32());
    if (t.L < 0 || t.L > kMaxTableDegree) return std::nullopt;
    auto read_entries = [&](std::vector<ConversionTable::Entry>& es) {
        const std::uint64_t n = r.u64();
        if (!r.ok || n > (body - r.pos) / 24) {
            r.ok = false;
            return;
        }
        es.resize(n);
        for (auto& e : es) {
            e.l = r.i16();
            e.m = r.i16();
            e.u = r.i16();
            e.v = r.i16();
            const double re = r.f64(), im = r.f64();
            e.c = {re, im};
        }
    };
    read_entries(t.y);
    read_entries(t.z);
    if (!r.ok || r.pos != body) return std::nullopt;
    t.rebuild_offsets();
    return t;
}

inline std::filesystem::path cache_file_path(const std::filesystem::path& dir,
                                             int L) {
    return dir / ("gtp_table_L" + std::to_string(L) + ".gntb");
}

inline void save_conversion_table(const std::filesystem::path& path,
                                  const ConversionTable& t) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw io_error("cannot create cache directory " +
                       path.parent_path().string() + ": " + ec.message());
    const std::string buf = serialize_conversion_table(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("failed to write " + path.string());
}

inline std::optional<ConversionTable> load_conversion_table(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    auto t = parse_conversion_table(buf);
    if (t && t->L >= 0) return t;
    return std::nullopt;
}

/// Cache directory from the GTP_CACHE_DIR environment variable, if set.
inline std::optional<std::filesystem::path> env_cache_dir() {
    if (const char* d = std::getenv("GTP_CACHE_DIR"); d && *d)
        return std::filesystem::path(d);
    return std::nullopt;
}

/// Thread-safe per-degree table provider with optional on-disk persistence.
/// Tables are immutable once built; corrupted cache files are rebuilt.
class TableCache {
  public:
    TableCache() : dir_(env_cache_dir()) {}
    explicit TableCache(std::optional<std::filesystem::path> dir)
        : dir_(std::move(dir)) {}

    const ConversionTable& get(int L) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = mem_.find(L);
        if (it != mem_.end()) return *it->second;
        std::unique_ptr<ConversionTable> t;
        if (dir_) {
            if (auto loaded = load_conversion_table(cache_file_path(*dir_, L));
                loaded && loaded->L == L)
                t = std::make_unique<ConversionTable>(std::move(*loaded));
        }
        if (!t) {
            t = std::make_unique<ConversionTable>(build_conversion_table(L));
            if (dir_) save_conversion_table(cache_file_path(*dir_, L), *t);
        }
        auto [pos, _] = mem_.emplace(L, std::move(t));
        return *pos->second;
    }

    const std::optional<std::filesystem::path>& dir() const { return dir_; }

  private:
    std::mutex mu_;
    std::map<int, std::unique_ptr<ConversionTable>> mem_;
    std::optional<std::filesystem::path> dir_;
};

}  // namespace gtp
