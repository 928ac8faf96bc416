#include "ergtrack/core/partition.hpp"

#include <cmath>
#include <string>

#include "ergtrack/core/error.hpp"

namespace ergtrack {

Partition::Partition() : cells_{{0.0, 0.5}, {0.5, 1.0}} {}

Partition::Partition(std::vector<std::pair<double, double>> cells) : cells_(std::move(cells)) {
  if (cells_.empty()) throw ConfigError("partition needs at least one cell");
  if (cells_.size() > 255) throw ConfigError("partition has more cells than the symbol alphabet allows");
  if (cells_.front().first != 0.0) throw ConfigError("partition must start at 0");
  if (cells_.back().second != 1.0) throw ConfigError("partition must end at 1");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (!(cells_[i].first < cells_[i].second))
      throw ConfigError("partition cell " + std::to_string(i) + " is empty or reversed");
    if (i + 1 < cells_.size() && cells_[i].second != cells_[i + 1].first)
      throw ConfigError("partition cells " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " are not contiguous");
  }
}

Partition Partition::two_cell(double split) {
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("two-cell split must lie in (0,1)");
  return Partition({{0.0, split}, {split, 1.0}});
}

Symbol Partition::label_unchecked(double u) const noexcept {
  for (std::size_t i = 1; i < cells_.size(); ++i)
    if (u < cells_[i].first) return static_cast<Symbol>(i - 1);
  return static_cast<Symbol>(cells_.size() - 1);
}

Symbol Partition::label(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw InvalidState("point " + std::to_string(u) + " is outside [0,1)");
  return label_unchecked(u);
}

Word quantize(const Partition& partition, std::span<const double> points) {
  Word out;
  out.reserve(points.size());
  for (double u : points) out.push_back(partition.label(u));
  return out;
}

}  // namespace ergtrack
