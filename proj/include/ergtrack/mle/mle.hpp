#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergtrack/core/cost.hpp"

namespace ergtrack::mle {

enum class FamilyKind { bernoulli, gaussian_location, custom };

/// Parametric densities p_theta over a compact interval of theta, searched on a grid
/// with one local refinement round.
///
/// Upper semicontinuity of (theta, u) -> p_theta(u) holds for the shipped families;
/// a custom family is trusted to have it.
struct DensityFamily {
  FamilyKind kind = FamilyKind::bernoulli;
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.01;
  int refine_factor = 100;
  bool refine = true;
  std::string custom_name;
  std::function<double(double theta, double u)> custom_log_density;

  /// log p_theta(u); -inf where the density vanishes.
  double log_density(double theta, double u) const;
  std::string name() const;
  void validate() const;
};

/// theta = P(U = 1) w.r.t. counting measure on {0, 1}.
DensityFamily bernoulli(double lo = 0.0, double hi = 1.0, double step = 0.01);
/// N(theta, 1) w.r.t. Lebesgue measure.
DensityFamily gaussian_location(double lo, double hi, double step);

/// c(theta, u) = -log p_theta(u), for running MLE as a tracking problem on IdentityOnParams.
CostFunction neg_log_cost(const DensityFamily& family);

/// (1/n) sum log p_theta(U_i); -inf if any term is -inf.
double empirical_loglik(const DensityFamily& family, double theta, std::span<const double> sample);

struct MLEResult {
  std::vector<std::size_t> n;
  std::vector<double> theta_hat;
  std::vector<double> loglik;
  std::vector<bool> degenerate;  ///< every grid value was -inf at that n
  std::optional<std::vector<double>> target;
};

/// Argmax of the empirical log-likelihood on the refined grid for each prefix length in
/// `schedule` (default: the full sample). Ties go to the smallest theta.
MLEResult mle_estimate(const DensityFamily& family, std::span<const double> sample,
                       std::vector<std::size_t> schedule = {});

/// Moments of the sampling marginal that determine the KL-optimal set.
struct MarginalDescription {
  double mean = 0.0;
};

/// Closed form argmax_theta E log p_theta(U): the marginal mean, clamped to [lo, hi].
std::vector<double> target_set(const DensityFamily& family, const MarginalDescription& marginal);

}  // namespace ergtrack::mle
