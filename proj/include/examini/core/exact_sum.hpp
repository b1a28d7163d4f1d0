#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace examini {

/// Order-independent floating-point sum. Every finite double is an integer
/// multiple of 2^-1074; values are accumulated exactly into 32-bit limbs,
/// so the result depends only on the multiset of addends. Limbs of a
/// normalized accumulator stay below 2^33 in magnitude and can therefore be
/// reduced across ranks as doubles without rounding.
class ExactSum {
 public:
  static constexpr int kLimbs = 68;

  void add(double x) {
    if (!std::isfinite(x)) {
      special_ += x;
      return;
    }
    if (x == 0.0) return;
    int e = 0;
    const double f = std::frexp(x, &e);  // x = f * 2^e, 0.5 <= |f| < 1
    auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
    int q = e - 53 + 1074;  // x = m * 2^(q - 1074)
    if (q < 0) {            // subnormal: m carries -q trailing zero bits
      m /= std::int64_t(1) << -q;
      q = 0;
    }
    const int b = q / 32, s = q % 32;
    const std::uint64_t a = static_cast<std::uint64_t>(m < 0 ? -m : m);
    const std::uint64_t lo = (a << s) & 0xffffffffu;
    const std::uint64_t mid = s == 0 ? (a >> 32) & 0xffffffffu : ((a >> (32 - s)) & 0xffffffffu);
    const std::uint64_t hi = s == 0 ? 0 : a >> (64 - s);
    const std::int64_t sign = m < 0 ? -1 : 1;
    limbs_[b] += sign * std::int64_t(lo);
    limbs_[b + 1] += sign * std::int64_t(mid);
    if (hi) limbs_[b + 2] += sign * std::int64_t(hi);
    if (++pending_ == (1 << 29)) normalize();
  }

  /// Carries every limb into [0, 2^32) except the top one.
  void normalize() {
    for (int b = 0; b + 1 < kLimbs; ++b) {
      const std::int64_t carry = limbs_[b] >> 32;  // floor division
      limbs_[b] -= carry * (std::int64_t(1) << 32);
      limbs_[b + 1] += carry;
    }
    pending_ = 0;
  }

  /// Normalized limbs as doubles (plus the non-finite part), for reductions.
  std::array<double, kLimbs + 1> pack() {
    normalize();
    std::array<double, kLimbs + 1> out{};
    for (int b = 0; b < kLimbs; ++b) out[b] = double(limbs_[b]);
    out[kLimbs] = special_;
    return out;
  }

  static ExactSum unpack(std::span<const double> v) {
    ExactSum s;
    for (int b = 0; b < kLimbs; ++b) s.limbs_[b] = std::int64_t(v[b]);
    s.special_ = v[kLimbs];
    s.normalize();
    return s;
  }

  double value() {
    normalize();
    if (special_ != 0.0 || std::isnan(special_)) return special_;
    // Only the top limb can be negative; convert the magnitude so no
    // borrow chain reaches the overflowing limbs.
    ExactSum mag = *this;
    const bool neg = limbs_[kLimbs - 1] < 0;
    if (neg) {
      for (auto& l : mag.limbs_) l = -l;
      mag.normalize();
    }
    double r = 0.0;
    for (int b = kLimbs - 1; b >= 0; --b)
      if (mag.limbs_[b]) r += std::ldexp(double(mag.limbs_[b]), 32 * b - 1074);
    return neg ? -r : r;
  }

 private:
  std::array<std::int64_t, kLimbs> limbs_{};
  double special_ = 0.0;
  std::int64_t pending_ = 0;
};

}  // namespace examini
