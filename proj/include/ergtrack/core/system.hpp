#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ergtrack/core/circle.hpp"
#include "ergtrack/core/partition.hpp"
#include "ergtrack/core/types.hpp"

namespace ergtrack {

/// Rotation x -> x + angle mod 1 with labels read through a partition.
struct CircleRotation {
  Angle angle;
  Partition partition;
};

/// One-sided subshift of finite type given by a transition graph on symbols.
class SubshiftSFT {
 public:
  SubshiftSFT(std::size_t alphabet, std::vector<std::vector<bool>> adjacency);

  static SubshiftSFT full_shift(std::size_t alphabet);
  /// Binary shift forbidding "11".
  static SubshiftSFT golden_mean();
  /// The one-point system 000... over the alphabet {symbol}.
  static SubshiftSFT fixed_point(Symbol symbol = 0);

  std::size_t alphabet() const noexcept { return alphabet_; }
  bool allowed(Symbol a, Symbol b) const noexcept { return adjacency_[a][b]; }
  const std::vector<std::vector<bool>>& adjacency() const noexcept { return adjacency_; }

  /// Symbols that start at least one infinite admissible path.
  const std::vector<bool>& live() const noexcept { return live_; }

  /// True if w is a prefix of some point: admissible transitions and a live last symbol.
  bool admissible(const Word& w) const;
  /// True if w repeated forever is a point (wraparound transition allowed too).
  bool cyclically_admissible(const Word& w) const;

  /// All admissible words of the given length, lexicographic order.
  std::vector<Word> words(std::size_t length) const;

  friend bool operator==(const SubshiftSFT&, const SubshiftSFT&) = default;

 private:
  std::size_t alphabet_;
  std::vector<std::vector<bool>> adjacency_;
  std::vector<bool> live_;
};

/// Identity map on a compact parameter interval [lo, hi].
struct IdentityOnParams {
  double lo = 0.0;
  double hi = 1.0;
};

/// Identity on theta in [lo, hi] times the left shift on the label sequence lab(theta, u).
struct FiberProduct {
  double lo = 0.0;
  double hi = 0.5;
  Partition partition;
};

struct CirclePoint {
  double x = 0.0;
  friend bool operator==(const CirclePoint&, const CirclePoint&) = default;
};
struct ParamPoint {
  double theta = 0.0;
  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};
/// Point (theta, lab(theta, u)) of a FiberProduct, stored through its generator u.
struct FiberPoint {
  Angle theta;
  double u = 0.0;
  friend bool operator==(const FiberPoint&, const FiberPoint&) = default;
};

using State = std::variant<CirclePoint, Word, ParamPoint, FiberPoint>;

class TopologicalSystem {
 public:
  using Kind = std::variant<CircleRotation, SubshiftSFT, IdentityOnParams, FiberProduct>;

  TopologicalSystem(Kind kind);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::constructible_from<Kind, T> && (!std::same_as<std::remove_cvref_t<T>, Kind>)
  TopologicalSystem(T&& kind) : TopologicalSystem(Kind(std::forward<T>(kind))) {}  // NOLINT

  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

  /// Human readable description of how initial states are enumerated.
  std::string candidate_scheme() const;

  /// Throws InvalidState unless x is a point of this system.
  void validate(const State& x) const;

  /// S x.
  State step(const State& x) const;

  /// Symbol (label, SFT symbol) observed at S^k x. Parameter systems have none.
  Symbol symbol_at(const State& x, std::size_t k) const;

 private:
  Kind kind_;
};

/// [x0, S x0, ..., S^{n-1} x0].
std::vector<State> iterate(const TopologicalSystem& system, const State& x0, std::size_t n);

std::string describe(const State& x);

}  // namespace ergtrack
