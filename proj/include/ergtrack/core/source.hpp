#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ergtrack/core/circle.hpp"
#include "ergtrack/core/partition.hpp"
#include "ergtrack/core/types.hpp"

namespace ergtrack {

class ObservationSource;

/// Finite-state chain started from its stationary law. Emits state indices.
struct MarkovChain {
  std::vector<std::vector<double>> transition;
};

/// i.i.d. bits with P(1) = prob.
struct IIDBinary {
  double prob = 0.5;
};

/// Orbit U, U + a, U + 2a, ... mod 1. Emits points of [0,1).
///
/// Without a fixed init, U is Lebesgue-uniform for a real angle and uniform on
/// the orbit {0, 1/den, ..., (den-1)/den} for an exact rational angle.
struct RotationOrbit {
  Angle angle;
  std::optional<double> init;
};

/// Labels of a base source XOR i.i.d. Bernoulli(flip) noise.
///
/// Point-valued bases (RotationOrbit) are labelled through the partition first.
struct NoisyLabelChannel {
  std::shared_ptr<const ObservationSource> base;
  double flip = 0.0;
  Partition partition;
};

/// i.i.d. normal(mean, sd^2).
struct IIDGaussian {
  double mean = 0.0;
  double sd = 1.0;
};

/// i.i.d. uniform on {-1, +1}.
struct SignedCoin {};

class ObservationSource {
 public:
  using Kind = std::variant<MarkovChain, IIDBinary, RotationOrbit, NoisyLabelChannel, IIDGaussian, SignedCoin>;

  /// Validates the kind; throws ConfigError on non-stochastic or reducible matrices,
  /// probabilities outside [0,1], or flip probabilities outside [0,1/2).
  ObservationSource(Kind kind, std::uint64_t seed);

  const Kind& kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

  ObservationSource with_seed(std::uint64_t seed) const { return ObservationSource(kind_, seed); }

 private:
  Kind kind_;
  std::uint64_t seed_;
};

/// n observations; a pure function of (kind, seed, n) and prefix-consistent in n.
Series sample(const ObservationSource& source, std::size_t n);

/// Stationary distribution of an irreducible stochastic matrix.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

/// Convenience: integral observations as a word. Throws if a value is not a small integer.
Word to_word(const Series& values);
Series to_series(const Word& word);

}  // namespace ergtrack
