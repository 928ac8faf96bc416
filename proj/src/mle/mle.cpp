#include "ergtrack/mle/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ergtrack/core/error.hpp"

namespace ergtrack::mle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Best {
  double sum = kNegInf;
  double theta = 0.0;
  bool set = false;
};

// Larger log-likelihood wins; equal values go to the smaller theta.
bool better(const Best& a, const Best& b) {
  if (!b.set) return a.set;
  if (!a.set) return false;
  if (a.sum != b.sum) return a.sum > b.sum;
  return a.theta < b.theta;
}

double loglik_sum(const DensityFamily& f, double theta, std::span<const double> sample) {
  double s = 0.0;
  for (double u : sample) s += f.log_density(theta, u);
  return s;
}

Best best_of(const DensityFamily& f, const std::vector<double>& thetas, std::span<const double> sample) {
  Best best;
  for (double t : thetas) {
    const Best cand{loglik_sum(f, t, sample), t, true};
    if (better(cand, best)) best = cand;
  }
  return best;
}

std::vector<double> coarse_grid(const DensityFamily& f) {
  const auto count = static_cast<std::size_t>(std::floor((f.hi - f.lo) / f.step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::min(f.hi, f.lo + static_cast<double>(i) * f.step));
  return out;
}

}  // namespace

double DensityFamily::log_density(double theta, double u) const {
  switch (kind) {
    case FamilyKind::bernoulli:
      if (u == 1.0) return std::log(theta);
      if (u == 0.0) return std::log1p(-theta);
      return kNegInf;
    case FamilyKind::gaussian_location: {
      const double d = u - theta;
      return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * d * d;
    }
    case FamilyKind::custom:
      return custom_log_density(theta, u);
  }
  return kNegInf;
}

std::string DensityFamily::name() const {
  switch (kind) {
    case FamilyKind::bernoulli:
      return "bernoulli";
    case FamilyKind::gaussian_location:
      return "gaussian_location";
    case FamilyKind::custom:
      return custom_name.empty() ? "custom" : custom_name;
  }
  return "custom";
}

void DensityFamily::validate() const {
  if (!(lo <= hi)) throw ConfigError("parameter interval needs lo <= hi");
  if (!(step > 0.0)) throw ConfigError("parameter grid step must be positive");
  if (refine_factor < 1) throw ConfigError("refine factor must be >= 1");
  if (kind == FamilyKind::bernoulli && (lo < 0.0 || hi > 1.0))
    throw ConfigError("bernoulli parameters must lie in [0,1]");
  if (kind == FamilyKind::custom && !custom_log_density) throw ConfigError("custom family needs a log-density");
}

DensityFamily bernoulli(double lo, double hi, double step) {
  DensityFamily f;
  f.kind = FamilyKind::bernoulli;
  f.lo = lo;
  f.hi = hi;
  f.step = step;
  f.validate();
  return f;
}

DensityFamily gaussian_location(double lo, double hi, double step) {
  DensityFamily f;
  f.kind = FamilyKind::gaussian_location;
  f.lo = lo;
  f.hi = hi;
  f.step = step;
  f.validate();
  return f;
}

CostFunction neg_log_cost(const DensityFamily& family) {
  family.validate();
  return NegLogDensity{family.name(), [family](double theta, double u) { return family.log_density(theta, u); }};
}

double empirical_loglik(const DensityFamily& family, double theta, std::span<const double> sample) {
  if (sample.empty()) throw ConfigError("log-likelihood needs a nonempty sample");
  return loglik_sum(family, theta, sample) / static_cast<double>(sample.size());
}

MLEResult mle_estimate(const DensityFamily& family, std::span<const double> sample, std::vector<std::size_t> schedule) {
  family.validate();
  if (sample.empty()) throw ConfigError("MLE needs a nonempty sample");
  if (schedule.empty()) schedule.push_back(sample.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0 || schedule[i] > sample.size()) throw ConfigError("schedule entry outside [1, sample size]");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw ConfigError("n schedule must be strictly increasing");
  }
  const auto grid = coarse_grid(family);
  MLEResult out;
  for (std::size_t n : schedule) {
    const auto prefix = sample.first(n);
    Best best = best_of(family, grid, prefix);
    if (family.refine && family.refine_factor > 1 && grid.size() > 1) {
      const double h = family.step / static_cast<double>(family.refine_factor);
      std::vector<double> fine;
      for (int i = -family.refine_factor; i <= family.refine_factor; ++i) {
        const double v = best.theta + static_cast<double>(i) * h;
        if (v >= family.lo && v <= family.hi) fine.push_back(v);
      }
      const Best cand = best_of(family, fine, prefix);
      if (better(cand, best)) best = cand;
    }
    out.n.push_back(n);
    out.theta_hat.push_back(best.theta);
    out.loglik.push_back(best.sum / static_cast<double>(n));
    out.degenerate.push_back(best.sum == kNegInf);
  }
  return out;
}

std::vector<double> target_set(const DensityFamily& family, const MarginalDescription& marginal) {
  if (family.kind == FamilyKind::custom)
    throw ConfigError("no closed-form optimum for custom family '" + family.name() + "'");
  if (!std::isfinite(marginal.mean)) throw ConfigError("marginal mean must be finite");
  return {std::clamp(marginal.mean, family.lo, family.hi)};
}

}  // namespace ergtrack::mle
