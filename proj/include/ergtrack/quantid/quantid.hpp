#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ergtrack/core/circle.hpp"
#include "ergtrack/core/parallel.hpp"
#include "ergtrack/core/partition.hpp"
#include "ergtrack/core/types.hpp"
#include "ergtrack/tracking/tracking.hpp"

namespace ergtrack::quantid {

/// Rotations R_theta, theta in [theta_lo, theta_hi] subset of [0, 1/2], observed through
/// a two-cell partition.
struct RotationFamily {
  double theta_lo = 0.0;
  double theta_hi = 0.5;
  double theta_step = 1e-4;
  double u_step = 1e-3;
  int refine_factor = 100;
  bool refine = true;
  Partition partition;
  /// Overrides the theta grid when non-empty (exact angles allowed).
  std::vector<Angle> explicit_thetas;

  std::vector<Angle> thetas() const;
  void validate() const;
};

struct RunParams {
  Angle theta_star;
  double p = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<double> u;  ///< fixed initial point; drawn from the invariant law otherwise
  Partition partition;
};

/// Y_k = label(R^k U) xor eps_k with eps_k i.i.d. Bernoulli(p).
struct NoisyLabelRun {
  Angle theta_star;
  double p = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double u = 0.0;
  Word observed;
  Word clean;  ///< noiseless labels with the same U, for diagnostics
};

/// Deterministic in seed. Throws ConfigError if p is outside [0, 1/2).
NoisyLabelRun generate(const RunParams& params);

/// (1/n) sum_k 1(label(R_theta^k u) != y_k).
double hamming_risk(const Angle& theta, double u, const Word& observed, const Partition& partition = {});

struct ThetaEstimate {
  double theta_hat = 0.0;
  double u_hat = 0.0;
  double min_risk = 0.0;
  tracking::TrackingResult tracking;
};

/// Grid argmin of the Hamming risk over theta x u with one refinement round.
/// Ties: smallest theta, then smallest u.
ThetaEstimate estimate_theta(const Word& observed, const RotationFamily& family, const Execution& exec = {});

struct UMinimum {
  double risk = 0.0;
  double u = 0.0;
};

/// Exact inf over u in [0,1) of the Hamming risk for a fixed theta (sweep over the
/// 2n label breakpoints). The returned u is the midpoint of a minimising arc and
/// `risk` is recomputed there.
UMinimum min_risk_over_u(const Angle& theta, const Word& observed, const Partition& partition = {});

struct BlockComplexityReport {
  std::vector<std::pair<std::size_t, std::uint64_t>> counts;  ///< (n, C(n))
  std::vector<std::pair<std::size_t, double>> entropy;        ///< (n, log C(n) / n)
  double exponent = 0.0;  ///< least-squares slope of log C(n) against log n
};

inline constexpr std::size_t kComplexityCap = 64;

/// Number of distinct label n-blocks over the family, n = 1..n_max.
///
/// For each theta the blocks are exact: the label n-block of u is constant on each arc
/// cut by the points {-s_k, split - s_k}, k < n, so one evaluation per arc suffices.
/// Exact rational thetas are handled in integer arithmetic. The union over the theta grid
/// is taken per n.
BlockComplexityReport block_complexity(const RotationFamily& family, std::size_t n_max,
                                       std::size_t cap = kComplexityCap, const Execution& exec = {});

/// Distinct label n-blocks of a single rotation, packed little-endian into 64-bit words.
std::vector<std::uint64_t> label_blocks(const Angle& theta, std::size_t n, const Partition& partition = {});

struct DbarFloorReport {
  double theta_probe = 0.0;
  double noisy_min_risk = 0.0;
  double clean_min_risk = 0.0;
  double bound = 0.0;  ///< p + (1 - 2p) * clean_min_risk
  double slack = 0.0;  ///< noisy_min_risk - bound
  double tolerance = 0.0;
  bool holds = false;
};

/// Compares min-risk(theta | noisy) with p + (1-2p) min-risk(theta | clean) on one run.
DbarFloorReport dbar_floor_check(const NoisyLabelRun& run, const Angle& theta_probe, double tolerance = 0.02,
                                 const Partition& partition = {});

struct SeparationReport {
  std::uint64_t n_steps = 0;  ///< N = ceil(3 / (2 (alpha2 - alpha1 - eps)))
  std::uint64_t checked = 0;
  std::uint64_t counterexamples = 0;
};

/// N from the identifiability argument for rotations.
std::uint64_t separation_steps(double alpha1, double alpha2, double epsilon);

/// N plus a grid check that for every (u, v, alpha) with alpha in [alpha2-eps, alpha2+eps]
/// some k <= N has label(u + k alpha) != label(v + k alpha1).
SeparationReport separation_bound(double alpha1, double alpha2, double epsilon, std::size_t u_points = 200,
                                  std::size_t v_points = 200, std::size_t alpha_points = 21);

}  // namespace ergtrack::quantid
