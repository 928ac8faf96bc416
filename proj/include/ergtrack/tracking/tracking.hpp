#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergtrack/core/cost.hpp"
#include "ergtrack/core/parallel.hpp"
#include "ergtrack/core/source.hpp"
#include "ergtrack/core/system.hpp"

namespace ergtrack::tracking {

/// Grid steps for the non-symbolic candidate sets. SFT references ignore them.
struct CandidateResolution {
  double step = 1e-3;    ///< circle point / parameter / theta spacing
  double u_step = 1e-3;  ///< generator spacing for fiber products
  int refine_factor = 100;
  bool refine = true;
};

struct TrackingProblem {
  TopologicalSystem reference;
  CostFunction cost;
  Series observed;
  CandidateResolution resolution{};
};

struct RefinementRecord {
  std::string stage;
  std::size_t candidates = 0;
  State argmin;
  double value = 0.0;
};

struct TrackingResult {
  State argmin_state;
  double value = 0.0;  ///< G_n / n evaluated at argmin_state
  std::size_t n = 0;
  bool infeasible = false;  ///< every candidate had infinite cost
  std::vector<RefinementRecord> trace;
};

/// (1/n) sum_{k<n} c(S^k x, y_k). +inf if any term is +inf.
double empirical_cost(const TopologicalSystem& reference, const CostFunction& cost, const State& x,
                      std::span<const double> y);

/// Exact minimiser of the empirical cost over the candidate set of the reference.
///
/// Ties go to the smallest value first, then the lexicographically smallest candidate
/// (smallest word, theta, then u). The result does not depend on exec.threads.
TrackingResult optimal_tracking(const TrackingProblem& problem, const Execution& exec = {});

/// G_n(y): n times the optimal value, computed over the unrefined candidate set.
double optimal_total(const TopologicalSystem& reference, const CostFunction& cost, std::span<const double> y,
                     const CandidateResolution& resolution = {}, const Execution& exec = {});

struct SuperadditivityReport {
  double whole = 0.0;  ///< G_{m+n}(y)
  double head = 0.0;   ///< G_m(y)
  double tail = 0.0;   ///< G_n(T^m y)
  double slack = 0.0;  ///< whole - head - tail
  bool holds = false;
};

/// Checks G_{m+n}(y) >= G_m(y) + G_n(T^m y) up to 1e-12 relative slack.
SuperadditivityReport superadditivity(const TopologicalSystem& reference, const CostFunction& cost,
                                      std::span<const double> y, std::size_t m, std::size_t n,
                                      const CandidateResolution& resolution = {});

bool superadditivity_check(const TopologicalSystem& reference, const CostFunction& cost, std::span<const double> y,
                           std::size_t m, std::size_t n, const CandidateResolution& resolution = {});

/// phi(x) for the orbit-invariant coordinate: theta of a fiber point or a parameter point.
double phi_estimate(const TrackingResult& result);

struct TraceRow {
  std::size_t n = 0;
  std::string argmin_id;
  std::optional<double> theta_hat;
  double value = 0.0;
};

struct EstimatorTrace {
  std::vector<TraceRow> rows;
  std::map<std::string, std::string> metadata;
};

/// Samples one trajectory of length max(schedule) and tracks each prefix.
EstimatorTrace track_limit_estimate(const TopologicalSystem& reference, const CostFunction& cost,
                                    const ObservationSource& source, const std::vector<std::size_t>& schedule,
                                    const CandidateResolution& resolution = {}, const Execution& exec = {});

/// Same, on an already sampled trajectory.
EstimatorTrace track_limit_estimate(const TopologicalSystem& reference, const CostFunction& cost,
                                    std::span<const double> y, const std::vector<std::size_t>& schedule,
                                    const CandidateResolution& resolution = {}, const Execution& exec = {});

/// Evenly spaced grid lo, lo+step, ..., up to hi (hi itself included when it lies on the grid).
std::vector<double> grid(double lo, double hi, double step);

/// Costs over a uniform generator grid u_j = start + j*step, j < count, for the orbit of
/// u_j under the rotation `angle`, labelled through a two-cell partition.
///
/// Each entry is sum_k c(label_k(u_j), y_k). Runs in O(n + count) using the fact that
/// label_k(u) = 1 exactly on one arc of generators. Labels agree bit-for-bit with
/// Partition::label_shifted, so entries match a direct evaluation.
void rotation_cost_profile(const Angle& angle, const Partition& partition, const CostFunction& cost,
                           std::span<const double> y, double start, double step, std::size_t count,
                           std::vector<double>& out);

}  // namespace ergtrack::tracking
