#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ergtrack/core/types.hpp"

namespace ergtrack {

/// Finite partition of [0,1) into ordered, contiguous half-open cells [lo, hi).
class Partition {
 public:
  /// The two-cell partition {[0,1/2), [1/2,1)}.
  Partition();
  explicit Partition(std::vector<std::pair<double, double>> cells);

  static Partition two_cell(double split);

  std::size_t size() const noexcept { return cells_.size(); }
  const std::vector<std::pair<double, double>>& cells() const noexcept { return cells_; }

  bool is_two_cell() const noexcept { return cells_.size() == 2; }
  /// Left end of the second cell; only meaningful for two-cell partitions.
  double split() const noexcept { return cells_.size() == 2 ? cells_[1].first : 0.0; }

  /// Index of the cell containing u. Throws InvalidState if u is outside [0,1).
  Symbol label(double u) const;

  /// Label of frac(u + shift) for u, shift in [0,1); shares the arithmetic of rotate().
  Symbol label_shifted(double u, double shift) const noexcept {
    double x = u + shift;
    if (x >= 1.0) x -= 1.0;
    if (cells_.size() == 2) return static_cast<Symbol>(x >= cells_[1].first);
    return label_unchecked(x);
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  Symbol label_unchecked(double u) const noexcept;

  std::vector<std::pair<double, double>> cells_;
};

/// Cell indices of each point. Rejects points outside [0,1).
Word quantize(const Partition& partition, std::span<const double> points);

}  // namespace ergtrack
