#pragma once

#include <cstdint>
#include <string>

namespace ergtrack {

/// x - floor(x). For x in [0,2) this is exact.
inline double frac(double x) noexcept {
  if (x >= 0.0 && x < 1.0) return x;
  if (x >= 1.0 && x < 2.0) return x - 1.0;
  return x - __builtin_floor(x);
}

/// Rotation angle, either a plain double or an exact rational num/den.
///
/// step(k) returns the fractional part of k * angle. In exact mode it is
/// computed as ((k * num) mod den) / den, so orbits are exactly periodic.
class Angle {
 public:
  Angle() = default;
  static Angle real(double value);
  static Angle rational(std::int64_t num, std::int64_t den);

  double value() const noexcept { return value_; }
  bool exact() const noexcept { return den_ > 0; }
  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  double step(std::uint64_t k) const noexcept {
    if (den_ > 0) {
      // den < 2^31, so the product fits in 64 bits.
      const auto d = static_cast<std::uint64_t>(den_);
      const std::uint64_t r = ((k % d) * static_cast<std::uint64_t>(num_)) % d;
      return static_cast<double>(r) / static_cast<double>(den_);
    }
    return frac(static_cast<double>(k) * value_);
  }

  std::string to_string() const;

  friend bool operator==(const Angle&, const Angle&) = default;

 private:
  double value_ = 0.0;
  std::int64_t num_ = 0;
  std::int64_t den_ = 0;
};

/// Point reached after k rotation steps from x.
inline double rotate(double x, const Angle& angle, std::uint64_t k) noexcept { return frac(x + angle.step(k)); }

/// Parses decimal text ("0.25") or an exact fraction ("1/4").
Angle parse_angle(const std::string& text);

}  // namespace ergtrack
