#pragma once

#include <cstdint>

namespace ergtrack {

/// Counter-based generator keyed by (seed, stream).
///
/// The i-th draw of a stream is a pure function of (seed, stream, i), so
/// independent streams can be handed to workers without any shared state and
/// the output never depends on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal via Box-Muller (two draws per call, no caching).
  double normal() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  CounterRng split(std::uint64_t stream) const noexcept { return CounterRng(key_, stream); }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace ergtrack
