#include "ergtrack/core/circle.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "ergtrack/core/error.hpp"

namespace ergtrack {

Angle Angle::real(double value) {
  if (!std::isfinite(value)) throw ConfigError("rotation angle must be finite");
  Angle a;
  a.value_ = frac(value);
  return a;
}

Angle Angle::rational(std::int64_t num, std::int64_t den) {
  if (den <= 0 || den >= (std::int64_t{1} << 31))
    throw ConfigError("rational angle needs a denominator in [1, 2^31)");
  num %= den;
  if (num < 0) num += den;
  const std::int64_t g = std::gcd(num, den);
  Angle a;
  a.num_ = num / g;
  a.den_ = den / g;
  a.value_ = static_cast<double>(a.num_) / static_cast<double>(a.den_);
  return a;
}

std::string Angle::to_string() const {
  if (exact()) return std::to_string(num_) + "/" + std::to_string(den_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

namespace {

std::int64_t parse_int(std::string_view s, const std::string& text) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("cannot parse angle '" + text + "'");
  return v;
}

}  // namespace

Angle parse_angle(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string_view sv(text);
    return Angle::rational(parse_int(sv.substr(0, slash), text), parse_int(sv.substr(slash + 1), text));
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw ConfigError("cannot parse angle '" + text + "'");
  return Angle::real(v);
}

}  // namespace ergtrack
