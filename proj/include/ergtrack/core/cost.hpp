#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ergtrack/core/types.hpp"

namespace ergtrack {

/// c(a, b) = 1 if the reference symbol a differs from the observed label b, else 0.
struct HammingOnLabels {};

/// c(theta, y) = -log p_theta(y); may be +inf where the density vanishes.
struct NegLogDensity {
  std::string family;
  std::function<double(double theta, double y)> log_density;
};

/// c(a, b) read from a table over reference symbols x observed symbols.
class TabulatedCost {
 public:
  TabulatedCost(std::size_t rows, std::size_t cols, std::vector<double> values);
  /// Table with entries[a][b].
  explicit TabulatedCost(const std::vector<std::vector<double>>& entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t a, std::size_t b) const noexcept { return values_[a * cols_ + b]; }
  /// max |c|, the finite dominating value.
  double dominator() const noexcept { return dominator_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  double dominator_ = 0.0;
};

class CostFunction {
 public:
  using Kind = std::variant<HammingOnLabels, NegLogDensity, TabulatedCost>;

  CostFunction(Kind kind);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::constructible_from<Kind, T> && (!std::same_as<std::remove_cvref_t<T>, Kind>)
  CostFunction(T&& kind) : CostFunction(Kind(std::forward<T>(kind))) {}  // NOLINT

  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

  /// Cost of reference symbol a against observation y. Throws ConfigError for NegLogDensity
  /// or for an observation outside the table.
  double symbolic(Symbol a, double y) const;
  /// Cost of parameter theta against observation y. Only NegLogDensity supports this.
  double parametric(double theta, double y) const;

  bool is_symbolic() const noexcept { return !std::holds_alternative<NegLogDensity>(kind_); }

  /// Table view over an alphabet pair (Hamming expanded), used by the joining LP.
  TabulatedCost table(std::size_t x_alphabet, std::size_t y_alphabet) const;

  std::string name() const;

 private:
  Kind kind_;
};

}  // namespace ergtrack
