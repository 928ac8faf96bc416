#include "ergtrack/core/cost.hpp"

#include <cmath>
#include <limits>

#include "ergtrack/core/error.hpp"

namespace ergtrack {

TabulatedCost::TabulatedCost(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0 || values_.size() != rows_ * cols_)
    throw ConfigError("cost table shape does not match its values");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ConfigError("tabulated costs must be finite");
    dominator_ = std::max(dominator_, std::abs(v));
  }
}

namespace {

std::vector<double> flatten(const std::vector<std::vector<double>>& entries) {
  std::vector<double> out;
  for (const auto& row : entries) {
    if (row.size() != entries.front().size()) throw ConfigError("cost table rows differ in length");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::size_t observed_symbol(double y, std::size_t cols) {
  if (!(y >= 0.0) || y != std::floor(y) || y >= static_cast<double>(cols))
    throw ConfigError("observation " + std::to_string(y) + " is outside the cost table alphabet");
  return static_cast<std::size_t>(y);
}

}  // namespace

TabulatedCost::TabulatedCost(const std::vector<std::vector<double>>& entries)
    : TabulatedCost(entries.size(), entries.empty() ? 0 : entries.front().size(), flatten(entries)) {}

CostFunction::CostFunction(Kind kind) : kind_(std::move(kind)) {
  if (const auto* d = std::get_if<NegLogDensity>(&kind_); d && !d->log_density)
    throw ConfigError("negative log-density cost needs a density");
}

double CostFunction::symbolic(Symbol a, double y) const {
  if (std::holds_alternative<HammingOnLabels>(kind_)) return static_cast<double>(a) == y ? 0.0 : 1.0;
  if (const auto* t = std::get_if<TabulatedCost>(&kind_)) {
    if (a >= t->rows()) throw ConfigError("reference symbol is outside the cost table alphabet");
    return (*t)(a, observed_symbol(y, t->cols()));
  }
  throw ConfigError("negative log-density cost needs a parameter reference system");
}

double CostFunction::parametric(double theta, double y) const {
  const auto* d = std::get_if<NegLogDensity>(&kind_);
  if (!d) throw ConfigError("symbolic cost used with a parameter reference system");
  const double ll = d->log_density(theta, y);
  if (std::isnan(ll)) throw ConfigError("log-density returned NaN");
  // log 0 = -inf becomes an infinite cost.
  return -ll;
}

TabulatedCost CostFunction::table(std::size_t x_alphabet, std::size_t y_alphabet) const {
  if (std::holds_alternative<HammingOnLabels>(kind_)) {
    std::vector<double> v(x_alphabet * y_alphabet);
    for (std::size_t a = 0; a < x_alphabet; ++a)
      for (std::size_t b = 0; b < y_alphabet; ++b) v[a * y_alphabet + b] = a == b ? 0.0 : 1.0;
    return TabulatedCost(x_alphabet, y_alphabet, std::move(v));
  }
  if (const auto* t = std::get_if<TabulatedCost>(&kind_)) {
    if (t->rows() < x_alphabet || t->cols() < y_alphabet)
      throw ConfigError("cost table is smaller than the alphabets it is used with");
    std::vector<double> v(x_alphabet * y_alphabet);
    for (std::size_t a = 0; a < x_alphabet; ++a)
      for (std::size_t b = 0; b < y_alphabet; ++b) v[a * y_alphabet + b] = (*t)(a, b);
    return TabulatedCost(x_alphabet, y_alphabet, std::move(v));
  }
  throw ConfigError("negative log-density cost has no finite table");
}

std::string CostFunction::name() const {
  if (std::holds_alternative<HammingOnLabels>(kind_)) return "hamming";
  if (const auto* d = std::get_if<NegLogDensity>(&kind_)) return "neglog:" + d->family;
  return "table";
}

}  // namespace ergtrack
