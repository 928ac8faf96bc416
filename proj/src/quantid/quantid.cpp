#include "ergtrack/quantid/quantid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ergtrack/core/error.hpp"
#include "ergtrack/core/source.hpp"

namespace ergtrack::quantid {

namespace {

void check_observed(const Word& observed) {
  if (observed.empty()) throw ConfigError("observed label word is empty");
  for (Symbol b : observed)
    if (b > 1) throw ConfigError("observed labels must be binary");
}

void check_two_cell(const Partition& partition) {
  if (!partition.is_two_cell()) throw ConfigError("rotation identification supports two-cell partitions only");
}

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

std::vector<Angle> RotationFamily::thetas() const {
  if (!explicit_thetas.empty()) return explicit_thetas;
  std::vector<Angle> out;
  for (double t : tracking::grid(theta_lo, theta_hi, theta_step)) out.push_back(Angle::real(t));
  return out;
}

void RotationFamily::validate() const {
  check_two_cell(partition);
  if (explicit_thetas.empty()) {
    if (!(theta_lo >= 0.0 && theta_lo <= theta_hi && theta_hi <= 0.5))
      throw ConfigError("theta range must be a subinterval of [0, 1/2]");
    if (!(theta_step > 0.0)) throw ConfigError("theta step must be positive");
  }
  for (const auto& a : explicit_thetas)
    if (a.value() > 0.5) throw ConfigError("explicit thetas must lie in [0, 1/2]");
  if (!(u_step > 0.0 && u_step <= 1.0)) throw ConfigError("u step must lie in (0, 1]");
  if (refine_factor < 1) throw ConfigError("refine factor must be >= 1");
}

NoisyLabelRun generate(const RunParams& params) {
  if (!(params.p >= 0.0 && params.p < 0.5)) throw ConfigError("flip probability must lie in [0, 1/2)");
  if (params.n == 0) throw ConfigError("run length must be >= 1");
  if (params.theta_star.value() > 0.5) throw ConfigError("true angle must lie in [0, 1/2]");
  check_two_cell(params.partition);
  auto base =
      std::make_shared<const ObservationSource>(RotationOrbit{params.theta_star, params.u}, params.seed);
  const ObservationSource noisy(NoisyLabelChannel{base, params.p, params.partition}, params.seed);

  NoisyLabelRun run;
  run.theta_star = params.theta_star;
  run.p = params.p;
  run.n = params.n;
  run.seed = params.seed;
  const Series points = sample(*base, params.n);
  run.u = points.front();
  run.clean = quantize(params.partition, points);
  run.observed = to_word(sample(noisy, params.n));
  return run;
}

double hamming_risk(const Angle& theta, double u, const Word& observed, const Partition& partition) {
  check_observed(observed);
  if (!(u >= 0.0 && u < 1.0)) throw InvalidState("initial point must lie in [0,1)");
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < observed.size(); ++k)
    mismatches += partition.label_shifted(u, theta.step(k)) != observed[k];
  return static_cast<double>(mismatches) / static_cast<double>(observed.size());
}

ThetaEstimate estimate_theta(const Word& observed, const RotationFamily& family, const Execution& exec) {
  check_observed(observed);
  family.validate();
  if (!family.explicit_thetas.empty()) throw ConfigError("estimate_theta needs a theta grid, not an explicit list");
  tracking::TrackingProblem problem{
      FiberProduct{family.theta_lo, family.theta_hi, family.partition},
      HammingOnLabels{},
      to_series(observed),
      tracking::CandidateResolution{family.theta_step, family.u_step, family.refine_factor, family.refine},
  };
  ThetaEstimate est;
  est.tracking = tracking::optimal_tracking(problem, exec);
  const auto& state = std::get<FiberPoint>(est.tracking.argmin_state);
  est.theta_hat = tracking::phi_estimate(est.tracking);
  est.u_hat = state.u;
  est.min_risk = est.tracking.value;
  return est;
}

UMinimum min_risk_over_u(const Angle& theta, const Word& observed, const Partition& partition) {
  check_observed(observed);
  check_two_cell(partition);
  const double b = partition.split();
  struct Event {
    double pos;
    int delta;
  };
  std::vector<Event> events;
  events.reserve(2 * observed.size());
  long count = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double s = theta.step(k);
    const int y = observed[k];
    count += partition.label_shifted(0.0, s) != y;
    // label is 1 for u in [frac(b - s), frac(1 - s)) around the circle
    const double enter = frac(b - s);
    const double leave = frac(1.0 - s);
    if (enter > 0.0) events.push_back({enter, y == 0 ? +1 : -1});
    if (leave > 0.0) events.push_back({leave, y == 0 ? -1 : +1});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& c) { return a.pos < c.pos; });
  long best = count;
  double best_lo = 0.0;
  double best_hi = events.empty() ? 1.0 : events.front().pos;
  for (std::size_t i = 0; i < events.size();) {
    const double pos = events[i].pos;
    while (i < events.size() && events[i].pos == pos) count += events[i++].delta;
    const double next = i < events.size() ? events[i].pos : 1.0;
    if (count < best) {
      best = count;
      best_lo = pos;
      best_hi = next;
    }
  }
  UMinimum out;
  out.u = 0.5 * (best_lo + best_hi);
  if (out.u >= 1.0) out.u = best_lo;
  out.risk = hamming_risk(theta, out.u, observed, partition);
  return out;
}

std::vector<std::uint64_t> label_blocks(const Angle& theta, std::size_t n, const Partition& partition) {
  check_two_cell(partition);
  if (n == 0 || n > 64) throw CapacityError("block length must lie in [1, 64]");
  std::vector<std::uint64_t> blocks;
  if (theta.exact() && partition.split() == 0.5) {
    // All breakpoints are multiples of 1/(2 den); work in units of 1/(4 den).
    const auto den = static_cast<std::uint64_t>(theta.den());
    const auto num = static_cast<std::uint64_t>(theta.num());
    const std::uint64_t full = 4 * den;
    for (std::uint64_t j = 0; j < 2 * den; ++j) {
      std::uint64_t w = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t pos = (2 * j + 1 + 4 * ((k % den) * num % den)) % full;
        if (pos >= 2 * den) w |= std::uint64_t{1} << k;
      }
      blocks.push_back(w);
    }
  } else {
    const double b = partition.split();
    std::vector<double> cuts{0.0};
    for (std::size_t k = 0; k < n; ++k) {
      const double s = theta.step(k);
      cuts.push_back(frac(1.0 - s));
      cuts.push_back(frac(b - s));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      const double hi = i + 1 < cuts.size() ? cuts[i + 1] : 1.0;
      const double mid = 0.5 * (cuts[i] + hi);
      std::uint64_t w = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (partition.label_shifted(mid, theta.step(k))) w |= std::uint64_t{1} << k;
      blocks.push_back(w);
    }
  }
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  return blocks;
}

BlockComplexityReport block_complexity(const RotationFamily& family, std::size_t n_max, std::size_t cap,
                                       const Execution& exec) {
  family.validate();
  if (n_max == 0) throw ConfigError("n_max must be >= 1");
  if (n_max > std::min<std::size_t>(cap, 64))
    throw CapacityError("n_max=" + std::to_string(n_max) + " exceeds the cap of " +
                        std::to_string(std::min<std::size_t>(cap, 64)));
  const auto thetas = family.thetas();
  BlockComplexityReport report;
  std::vector<double> log_n, log_c;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::vector<std::vector<std::uint64_t>> per_theta(thetas.size());
    parallel_for(thetas.size(), exec,
                 [&](std::size_t i) { per_theta[i] = label_blocks(thetas[i], n, family.partition); });
    std::vector<std::uint64_t> all;
    for (auto& v : per_theta) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const auto c = static_cast<std::uint64_t>(all.size());
    report.counts.emplace_back(n, c);
    report.entropy.emplace_back(n, std::log(static_cast<double>(c)) / static_cast<double>(n));
    log_n.push_back(std::log(static_cast<double>(n)));
    log_c.push_back(std::log(static_cast<double>(c)));
  }
  report.exponent = slope(log_n, log_c);
  return report;
}

DbarFloorReport dbar_floor_check(const NoisyLabelRun& run, const Angle& theta_probe, double tolerance,
                                 const Partition& partition) {
  DbarFloorReport r;
  r.theta_probe = theta_probe.value();
  r.noisy_min_risk = min_risk_over_u(theta_probe, run.observed, partition).risk;
  r.clean_min_risk = min_risk_over_u(theta_probe, run.clean, partition).risk;
  r.bound = run.p + (1.0 - 2.0 * run.p) * r.clean_min_risk;
  r.slack = r.noisy_min_risk - r.bound;
  r.tolerance = tolerance;
  r.holds = r.slack >= -tolerance;
  return r;
}

std::uint64_t separation_steps(double alpha1, double alpha2, double epsilon) {
  if (!(alpha1 >= 0.0 && alpha1 < alpha2 && alpha2 <= 0.5))
    throw ConfigError("separation bound needs 0 <= alpha1 < alpha2 <= 1/2");
  if (!(epsilon > 0.0 && epsilon < (alpha2 - alpha1) / 2.0))
    throw ConfigError("epsilon must lie in (0, (alpha2 - alpha1)/2)");
  // The tolerance absorbs rounding in alpha2 - alpha1 - epsilon (0.3-0.2-0.04 is not 0.06).
  return static_cast<std::uint64_t>(std::ceil(3.0 / (2.0 * (alpha2 - alpha1 - epsilon)) - 1e-9));
}

SeparationReport separation_bound(double alpha1, double alpha2, double epsilon, std::size_t u_points,
                                  std::size_t v_points, std::size_t alpha_points) {
  SeparationReport r;
  r.n_steps = separation_steps(alpha1, alpha2, epsilon);
  if (u_points == 0 || v_points == 0 || alpha_points == 0) throw ConfigError("separation grids must be nonempty");
  const Partition partition;
  const double a_lo = alpha2 - epsilon;
  const double a_hi = std::min(alpha2 + epsilon, 0.5);
  const Angle reference = Angle::real(alpha1);
  for (std::size_t l = 0; l < alpha_points; ++l) {
    const double alpha =
        alpha_points == 1 ? alpha2 : a_lo + (a_hi - a_lo) * static_cast<double>(l) / static_cast<double>(alpha_points - 1);
    const Angle moving = Angle::real(alpha);
    for (std::size_t i = 0; i < u_points; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(u_points);
      for (std::size_t j = 0; j < v_points; ++j) {
        const double v = static_cast<double>(j) / static_cast<double>(v_points);
        bool separated = false;
        for (std::uint64_t k = 0; k <= r.n_steps && !separated; ++k)
          separated = partition.label_shifted(u, moving.step(k)) != partition.label_shifted(v, reference.step(k));
        ++r.checked;
        if (!separated) ++r.counterexamples;
      }
    }
  }
  return r;
}

}  // namespace ergtrack::quantid
