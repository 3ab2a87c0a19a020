#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtp {

/// Thrown when a result fails an internal numerical consistency check
/// (e.g. an imaginary residue that should vanish does not).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on cache-file read/write failures (maps to CLI exit code 3).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Highest irrep degree for which coefficient routines are guaranteed
/// accurate to 1e-12 relative.
constexpr int kMaxDegree = 32;

/// Conversion tables for products of two degree-kMaxDegree inputs need
/// bandwidth 2*kMaxDegree.
constexpr int kMaxTableDegree = 2 * kMaxDegree;

inline int num_coeffs(int L) { return (L + 1) * (L + 1); }

/// Flat index of (l, m) in an irreps vector, m in [-l, l].
inline int lm_index(int l, int m) { return l * l + l + m; }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
    Vec3 operator-() const { return {-x, -y, -z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend Vec3 operator+(const Vec3& a, const Vec3& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend Vec3 operator*(double s, const Vec3& a) {
        return {s * a.x, s * a.y, s * a.z};
    }
};

/// Point on S^2: theta is the polar angle in [0, pi], psi the azimuth in
/// [0, 2*pi).
struct SphericalPoint {
    double theta = 0;
    double psi = 0;
};

inline SphericalPoint antipode(const SphericalPoint& p) {
    double psi = p.psi + kPi;
    if (psi >= 2 * kPi) psi -= 2 * kPi;
    return {kPi - p.theta, psi};
}

/// Z-Y-Z Euler angles about the library's Cartesian axes.
struct EulerAnglesZYZ {
    double alpha = 0;
    double beta = 0;
    double gamma = 0;
};

/// Coefficients x^(l)_m for l = 0..L flattened into a single vector of
/// length (L+1)^2; entry at l*l + l + m holds x^(l)_m.
struct IrrepsVector {
    int L = 0;
    std::vector<double> data;

    IrrepsVector() : data(1, 0.0) {}
    explicit IrrepsVector(int L_) : L(L_), data(num_coeffs(L_), 0.0) {
        if (L_ < 0) throw std::domain_error("IrrepsVector: negative degree");
    }
    IrrepsVector(int L_, std::vector<double> d) : L(L_), data(std::move(d)) {
        if (static_cast<int>(data.size()) != num_coeffs(L_))
            throw std::domain_error("IrrepsVector: data length != (L+1)^2");
    }

    double& at(int l, int m) { return data[lm_index(l, m)]; }
    double at(int l, int m) const { return data[lm_index(l, m)]; }

    double* block(int l) { return data.data() + l * l; }
    const double* block(int l) const { return data.data() + l * l; }

    /// Multiply block l by w[l] for every degree.
    void scale_by_degree(const std::vector<double>& w) {
        if (static_cast<int>(w.size()) != L + 1)
            throw std::domain_error("scale_by_degree: weight length != L+1");
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m) at(l, m) *= w[l];
    }

    /// Copy into a vector of degree L_new, truncating or zero-padding.
    IrrepsVector resized(int L_new) const {
        IrrepsVector out(L_new);
        const int lc = std::min(L, L_new);
        for (int i = 0; i < num_coeffs(lc); ++i) out.data[i] = data[i];
        return out;
    }

    friend IrrepsVector operator+(const IrrepsVector& a, const IrrepsVector& b) {
        if (a.L != b.L) throw std::domain_error("IrrepsVector +: degree mismatch");
        IrrepsVector out(a.L);
        for (std::size_t i = 0; i < a.data.size(); ++i)
            out.data[i] = a.data[i] + b.data[i];
        return out;
    }
};

/// Per-degree scalar weights w_l, l = 0..L.
struct DegreeWeights {
    int L = 0;
    std::vector<double> w;

    DegreeWeights() : w(1, 1.0) {}
    explicit DegreeWeights(int L_, double fill = 1.0) : L(L_), w(L_ + 1, fill) {}
    DegreeWeights(int L_, std::vector<double> w_) : L(L_), w(std::move(w_)) {
        if (static_cast<int>(w.size()) != L + 1)
            throw std::domain_error("DegreeWeights: length != L+1");
    }
    static DegreeWeights ones(int L_) { return DegreeWeights(L_, 1.0); }
};

/// Batch of B x C irreps vectors, stored contiguously.
struct FeatureBatch {
    int B = 0, C = 0, L = 0;
    std::vector<double> data;

    FeatureBatch() = default;
    FeatureBatch(int B_, int C_, int L_)
        : B(B_), C(C_), L(L_),
          data(static_cast<std::size_t>(B_) * C_ * num_coeffs(L_), 0.0) {}

    std::size_t offset(int b, int c) const {
        return (static_cast<std::size_t>(b) * C + c) * num_coeffs(L);
    }
    IrrepsVector get(int b, int c) const {
        IrrepsVector v(L);
        const double* p = data.data() + offset(b, c);
        std::copy(p, p + num_coeffs(L), v.data.begin());
        return v;
    }
    void set(int b, int c, const IrrepsVector& v) {
        if (v.L != L) throw std::domain_error("FeatureBatch::set: degree mismatch");
        std::copy(v.data.begin(), v.data.end(), data.begin() + offset(b, c));
    }
};

/// Channel combination rule for batched tensor products.
struct ChannelMode {
    enum Kind { kChannelWise, kChannelMixing } kind = kChannelWise;
    /// Channel-mixing weights w[c][c1][c2], flattened C*C*C (output channel
    /// slowest). Empty for channel-wise.
    std::vector<double> mix;

    static ChannelMode channel_wise() { return {kChannelWise, {}}; }
    static ChannelMode channel_mixing(int C, std::vector<double> w) {
        if (static_cast<int>(w.size()) != C * C * C)
            throw std::domain_error("ChannelMode: mixing tensor must be C^3");
        return {kChannelMixing, std::move(w)};
    }
    double mix_at(int C, int c, int c1, int c2) const {
        return mix[(static_cast<std::size_t>(c) * C + c1) * C + c2];
    }
};

/// Multiply-add / FFT work tallies for cost audits.
struct OpCounter {
    std::uint64_t madds = 0;       ///< table-driven multiply-adds
    std::uint64_t fft_points = 0;  ///< sum of P^2 * log2(P) over executed FFTs
};

}  // namespace gtp
