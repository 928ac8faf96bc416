#include "ergtrack/core/rng.hpp"

#include <cmath>
#include <numbers>

namespace ergtrack {

std::uint64_t mix64(std::uint64_t z) noexcept {
  // SplitMix64 finaliser.
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

double CounterRng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() noexcept {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~0ULL - (~0ULL % bound);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % bound;
}

}  // namespace ergtrack
