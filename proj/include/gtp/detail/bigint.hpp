#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gtp::detail {

/// Unsigned big integer with 32-bit limbs, little-endian. Supports exactly
/// the operations the Wigner 3-j evaluation needs: products of small
/// factors, addition, subtraction of a smaller value, comparison, and
/// lossy conversion to (mantissa, base-2 exponent).
class BigUint {
    std::vector<std::uint32_t> limbs_;  // little-endian, no trailing zeros

  public:
    BigUint() = default;
    explicit BigUint(std::uint64_t v) {
        if (v) {
            limbs_.push_back(static_cast<std::uint32_t>(v));
            if (v >> 32) limbs_.push_back(static_cast<std::uint32_t>(v >> 32));
        }
    }

    bool is_zero() const { return limbs_.empty(); }

    void mul_u32(std::uint32_t f) {
        if (f == 0) {
            limbs_.clear();
            return;
        }
        std::uint64_t carry = 0;
        for (auto& limb : limbs_) {
            std::uint64_t p = static_cast<std::uint64_t>(limb) * f + carry;
            limb = static_cast<std::uint32_t>(p);
            carry = p >> 32;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
    }

    /// *this *= a * (a+1) * ... * b  (empty product when a > b)
    void mul_range(int a, int b) {
        for (int i = a; i <= b; ++i) mul_u32(static_cast<std::uint32_t>(i));
    }

    void add(const BigUint& o) {
        if (o.limbs_.size() > limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            std::uint64_t s = static_cast<std::uint64_t>(limbs_[i]) + carry +
                              (i < o.limbs_.size() ? o.limbs_[i] : 0u);
            limbs_[i] = static_cast<std::uint32_t>(s);
            carry = s >> 32;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
    }

    /// *this -= o; requires *this >= o.
    void sub(const BigUint& o) {
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            std::int64_t d = static_cast<std::int64_t>(limbs_[i]) - borrow -
                             (i < o.limbs_.size() ? o.limbs_[i] : 0u);
            if (d < 0) {
                d += (std::int64_t{1} << 32);
                borrow = 1;
            } else {
                borrow = 0;
            }
            limbs_[i] = static_cast<std::uint32_t>(d);
        }
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }

    int cmp(const BigUint& o) const {
        if (limbs_.size() != o.limbs_.size())
            return limbs_.size() < o.limbs_.size() ? -1 : 1;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
        }
        return 0;
    }

    /// Value as m * 2^e with m in [0.5, 1). Uses the top 96 bits, so the
    /// relative error is well below 2^-63. Zero maps to (0, 0).
    double to_double_exp(long& e) const {
        if (limbs_.empty()) {
            e = 0;
            return 0.0;
        }
        long double acc = 0.0L;
        const std::size_t n = limbs_.size();
        const std::size_t k = n >= 3 ? 3 : n;
        for (std::size_t i = 0; i < k; ++i)
            acc = acc * 4294967296.0L + limbs_[n - 1 - i];
        long shift = static_cast<long>(32 * (n - k));
        int ex = 0;
        acc = std::frexp(acc, &ex);
        e = shift + ex;
        return static_cast<double>(acc);
    }
};

/// n! as a BigUint.
inline BigUint factorial_big(int n) {
    BigUint f(1);
    f.mul_range(2, n);
    return f;
}

}  // namespace gtp::detail
