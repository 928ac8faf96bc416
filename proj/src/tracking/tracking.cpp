#include "ergtrack/tracking/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ergtrack/core/error.hpp"

namespace ergtrack::tracking {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Minimum of `sums` with ties to the smallest index.
std::size_t argmin_first(const std::vector<double>& sums) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < sums.size(); ++j)
    if (sums[j] < sums[best]) best = j;
  return best;
}

// First j in [0, count) with pred(j) true, for a predicate that is monotone in j.
template <class Pred>
std::size_t first_true(std::ptrdiff_t estimate, std::size_t count, Pred pred) {
  auto j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(estimate, 0, static_cast<std::ptrdiff_t>(count)));
  while (j > 0 && pred(j - 1)) --j;
  while (j < count && !pred(j)) ++j;
  return j;
}

std::vector<double> circle_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw ConfigError("candidate step must lie in (0,1]");
  std::vector<double> us;
  for (std::size_t j = 0;; ++j) {
    const double u = static_cast<double>(j) * step;
    if (u >= 1.0) break;
    us.push_back(u);
  }
  return us;
}

// center + i*h for |i| <= factor, wrapped into [0,1), sorted and deduplicated.
std::vector<double> circle_window(double center, double h, int factor) {
  std::vector<double> us;
  for (int i = -factor; i <= factor; ++i) {
    double v = center + static_cast<double>(i) * h;
    if (v < 0.0) v += 1.0;
    if (v >= 1.0) v -= 1.0;
    if (v >= 0.0 && v < 1.0) us.push_back(v);
  }
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  return us;
}

std::vector<double> param_window(double center, double h, int factor, double lo, double hi) {
  std::vector<double> out;
  for (int i = -factor; i <= factor; ++i) {
    const double v = center + static_cast<double>(i) * h;
    if (v >= lo && v <= hi) out.push_back(v);
  }
  return out;
}

void profile_points(const Angle& angle, const Partition& partition, const CostFunction& cost,
                    std::span<const double> y, std::span<const double> us, std::vector<double>& out) {
  const std::size_t m = us.size();
  out.assign(m, 0.0);
  if (m == 0) return;
  if (!partition.is_two_cell()) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double s = angle.step(k);
      for (std::size_t j = 0; j < m; ++j) out[j] += cost.symbolic(partition.label_shifted(us[j], s), y[k]);
    }
    return;
  }
  const double b = partition.split();
  const double u0 = us.front();
  const double h = m > 1 ? (us.back() - u0) / static_cast<double>(m - 1) : 1.0;
  std::vector<double> diff(m + 1, 0.0);
  double base = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double c0 = cost.symbolic(0, y[k]);
    const double w = cost.symbolic(1, y[k]) - c0;
    base += c0;
    if (w == 0.0) continue;
    const double s = angle.step(k);
    auto est = [&](double threshold) { return static_cast<std::ptrdiff_t>(std::ceil((threshold - s - u0) / h)); };
    // label_shifted(u, s) == 1  <=>  b <= u+s < 1  or  (u+s >= 1 and u+s-1 >= b)
    const std::size_t a = first_true(est(b), m, [&](std::size_t j) { return us[j] + s >= b; });
    const std::size_t c = first_true(est(1.0), m, [&](std::size_t j) { return us[j] + s >= 1.0; });
    const std::size_t d = first_true(est(1.0 + b), m, [&](std::size_t j) {
      const double x = us[j] + s;
      return x >= 1.0 && x - 1.0 >= b;
    });
    diff[a] += w;
    diff[c] -= w;
    diff[d] += w;
    diff[m] -= w;
  }
  double run = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    run += diff[j];
    out[j] = base + run;
  }
}

struct Pick {
  double sum = kInf;
  double theta = 0.0;
  double u = 0.0;
  bool set = false;
};

// (sum, theta, u) lexicographic.
bool better(const Pick& a, const Pick& b) {
  if (!b.set) return a.set;
  if (!a.set) return false;
  if (a.sum != b.sum) return a.sum < b.sum;
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.u < b.u;
}

void check_window(std::span<const double> y) {
  if (y.empty()) throw ConfigError("observation window must be nonempty");
}

void check_word_state(const SubshiftSFT& sft, const Word& w, std::size_t n) {
  if (w.empty()) throw InvalidState("empty word");
  if (w.size() >= n ? !sft.admissible(w) : !sft.cyclically_admissible(w))
    throw InvalidState("word violates the SFT adjacency");
}

// Backward dynamic program over admissible words. Returns the lexicographically
// smallest optimal word when `word` is non-null.
double sft_optimum(const SubshiftSFT& sft, const CostFunction& cost, std::span<const double> y, Word* word) {
  const std::size_t n = y.size();
  const std::size_t na = sft.alphabet();
  const auto& live = sft.live();
  std::vector<double> value(na, kInf), next_value(na, kInf);
  std::vector<Symbol> succ(word ? n * na : 0, 0);
  for (std::size_t a = 0; a < na; ++a)
    if (live[a]) value[a] = cost.symbolic(static_cast<Symbol>(a), y[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) {
    next_value.swap(value);
    for (std::size_t a = 0; a < na; ++a) {
      value[a] = kInf;
      if (!live[a]) continue;
      double best = kInf;
      Symbol best_b = 0;
      bool found = false;
      for (std::size_t b = 0; b < na; ++b) {
        if (!sft.allowed(static_cast<Symbol>(a), static_cast<Symbol>(b)) || !live[b]) continue;
        if (!found || next_value[b] < best) {
          best = next_value[b];
          best_b = static_cast<Symbol>(b);
          found = true;
        }
      }
      value[a] = cost.symbolic(static_cast<Symbol>(a), y[k]) + best;
      if (word) succ[k * na + a] = best_b;
    }
  }
  std::size_t first = na;
  for (std::size_t a = 0; a < na; ++a)
    if (live[a] && (first == na || value[a] < value[first])) first = a;
  if (word) {
    word->assign(n, 0);
    (*word)[0] = static_cast<Symbol>(first);
    for (std::size_t k = 1; k < n; ++k) (*word)[k] = succ[(k - 1) * na + (*word)[k - 1]];
  }
  return value[first];
}

double param_sum(const CostFunction& cost, double theta, std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += cost.parametric(theta, v);
  return s;
}

TrackingResult finish(const TopologicalSystem& ref, const CostFunction& cost, std::span<const double> y, State best,
                      std::vector<RefinementRecord> trace, bool infeasible) {
  TrackingResult r;
  r.n = y.size();
  r.value = empirical_cost(ref, cost, best, y);
  r.argmin_state = std::move(best);
  r.infeasible = infeasible;
  r.trace = std::move(trace);
  return r;
}

TrackingResult track_sft(const SubshiftSFT& sft, const TrackingProblem& p) {
  Word w;
  const double total = sft_optimum(sft, p.cost, p.observed, &w);
  std::vector<RefinementRecord> trace{{"exact-dp", 0, w, total / static_cast<double>(p.observed.size())}};
  return finish(p.reference, p.cost, p.observed, std::move(w), std::move(trace), false);
}

TrackingResult track_circle(const CircleRotation& rot, const TrackingProblem& p) {
  const auto& res = p.resolution;
  std::vector<double> sums;
  const auto coarse = circle_grid(res.step);
  profile_points(rot.angle, rot.partition, p.cost, p.observed, coarse, sums);
  std::size_t j = argmin_first(sums);
  Pick best{sums[j], 0.0, coarse[j], true};
  const double n = static_cast<double>(p.observed.size());
  std::vector<RefinementRecord> trace{{"coarse", coarse.size(), CirclePoint{best.u}, best.sum / n}};
  if (res.refine && res.refine_factor > 1) {
    const auto fine =
        circle_window(best.u, res.step / static_cast<double>(res.refine_factor), res.refine_factor);
    profile_points(rot.angle, rot.partition, p.cost, p.observed, fine, sums);
    j = argmin_first(sums);
    const Pick cand{sums[j], 0.0, fine[j], true};
    if (better(cand, best)) best = cand;
    trace.push_back({"refined", fine.size(), CirclePoint{best.u}, best.sum / n});
  }
  return finish(p.reference, p.cost, p.observed, CirclePoint{best.u}, std::move(trace), std::isinf(best.sum));
}

Pick best_over_params(const CostFunction& cost, std::span<const double> y, const std::vector<double>& thetas,
                      const Execution& exec) {
  std::vector<double> sums(thetas.size());
  parallel_for(thetas.size(), exec, [&](std::size_t i) { sums[i] = param_sum(cost, thetas[i], y); });
  Pick best;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const Pick cand{sums[i], thetas[i], 0.0, true};
    if (better(cand, best)) best = cand;
  }
  return best;
}

TrackingResult track_params(const IdentityOnParams& id, const TrackingProblem& p, const Execution& exec) {
  const auto& res = p.resolution;
  const auto coarse = grid(id.lo, id.hi, res.step);
  Pick best = best_over_params(p.cost, p.observed, coarse, exec);
  const double n = static_cast<double>(p.observed.size());
  std::vector<RefinementRecord> trace{{"coarse", coarse.size(), ParamPoint{best.theta}, best.sum / n}};
  if (res.refine && res.refine_factor > 1 && coarse.size() > 1) {
    const auto fine = param_window(best.theta, res.step / static_cast<double>(res.refine_factor), res.refine_factor,
                                   id.lo, id.hi);
    const Pick cand = best_over_params(p.cost, p.observed, fine, exec);
    if (better(cand, best)) best = cand;
    trace.push_back({"refined", fine.size(), ParamPoint{best.theta}, best.sum / n});
  }
  return finish(p.reference, p.cost, p.observed, ParamPoint{best.theta}, std::move(trace), std::isinf(best.sum));
}

Pick best_over_fiber(const FiberProduct& f, const CostFunction& cost, std::span<const double> y,
                     const std::vector<double>& thetas, const std::vector<double>& us, const Execution& exec) {
  std::vector<Pick> per_theta(thetas.size());
  parallel_for(thetas.size(), exec, [&](std::size_t i) {
    std::vector<double> sums;
    profile_points(Angle::real(thetas[i]), f.partition, cost, y, us, sums);
    const std::size_t j = argmin_first(sums);
    per_theta[i] = Pick{sums[j], thetas[i], us[j], true};
  });
  Pick best;
  for (const auto& cand : per_theta)
    if (better(cand, best)) best = cand;
  return best;
}

TrackingResult track_fiber(const FiberProduct& f, const TrackingProblem& p, const Execution& exec) {
  const auto& res = p.resolution;
  const auto thetas = grid(f.lo, f.hi, res.step);
  const auto us = circle_grid(res.u_step);
  Pick best = best_over_fiber(f, p.cost, p.observed, thetas, us, exec);
  const double n = static_cast<double>(p.observed.size());
  auto state = [](const Pick& pk) { return FiberPoint{Angle::real(pk.theta), pk.u}; };
  std::vector<RefinementRecord> trace{{"coarse", thetas.size() * us.size(), state(best), best.sum / n}};
  if (res.refine && res.refine_factor > 1) {
    // The best generator for a nearby theta can sit anywhere on the circle, so the
    // refined generator grid spans all of [0,1) rather than a window around u.
    const auto fine_thetas =
        param_window(best.theta, res.step / static_cast<double>(res.refine_factor), res.refine_factor, f.lo, f.hi);
    const auto fine_us = circle_grid(res.u_step / static_cast<double>(res.refine_factor));
    const Pick cand = best_over_fiber(f, p.cost, p.observed, fine_thetas, fine_us, exec);
    if (better(cand, best)) best = cand;
    trace.push_back({"refined", fine_thetas.size() * fine_us.size(), state(best), best.sum / n});
  }
  return finish(p.reference, p.cost, p.observed, state(best), std::move(trace), std::isinf(best.sum));
}

}  // namespace

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (!(lo <= hi)) throw ConfigError("grid needs lo <= hi");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  return out;
}

void rotation_cost_profile(const Angle& angle, const Partition& partition, const CostFunction& cost,
                           std::span<const double> y, double start, double step, std::size_t count,
                           std::vector<double>& out) {
  std::vector<double> us(count);
  for (std::size_t j = 0; j < count; ++j) {
    us[j] = start + static_cast<double>(j) * step;
    if (!(us[j] >= 0.0 && us[j] < 1.0)) throw ConfigError("generator grid must lie inside [0,1)");
  }
  profile_points(angle, partition, cost, y, us, out);
}

double empirical_cost(const TopologicalSystem& reference, const CostFunction& cost, const State& x,
                      std::span<const double> y) {
  check_window(y);
  if (const auto* w = std::get_if<Word>(&x)) {
    const auto* sft = reference.as<SubshiftSFT>();
    if (!sft) throw InvalidState("word used with a non-SFT system");
    check_word_state(*sft, *w, y.size());
  } else {
    reference.validate(x);
  }
  double sum = 0.0;
  if (const auto* pp = std::get_if<ParamPoint>(&x)) {
    sum = param_sum(cost, pp->theta, y);
  } else {
    for (std::size_t k = 0; k < y.size(); ++k) sum += cost.symbolic(reference.symbol_at(x, k), y[k]);
  }
  return sum / static_cast<double>(y.size());
}

TrackingResult optimal_tracking(const TrackingProblem& p, const Execution& exec) {
  check_window(p.observed);
  if (const auto* sft = p.reference.as<SubshiftSFT>()) return track_sft(*sft, p);
  if (const auto* rot = p.reference.as<CircleRotation>()) return track_circle(*rot, p);
  if (const auto* id = p.reference.as<IdentityOnParams>()) return track_params(*id, p, exec);
  return track_fiber(*p.reference.as<FiberProduct>(), p, exec);
}

double optimal_total(const TopologicalSystem& reference, const CostFunction& cost, std::span<const double> y,
                     const CandidateResolution& resolution, const Execution& exec) {
  check_window(y);
  if (const auto* sft = reference.as<SubshiftSFT>()) return sft_optimum(*sft, cost, y, nullptr);
  CandidateResolution coarse = resolution;
  coarse.refine = false;
  const TrackingResult r = optimal_tracking(TrackingProblem{reference, cost, Series(y.begin(), y.end()), coarse}, exec);
  return r.value * static_cast<double>(y.size());
}

SuperadditivityReport superadditivity(const TopologicalSystem& reference, const CostFunction& cost,
                                      std::span<const double> y, std::size_t m, std::size_t n,
                                      const CandidateResolution& resolution) {
  if (m == 0 || n == 0) throw ConfigError("superadditivity needs m, n >= 1");
  if (y.size() < m + n) throw ConfigError("trajectory shorter than m + n");
  SuperadditivityReport r;
  r.whole = optimal_total(reference, cost, y.first(m + n), resolution);
  r.head = optimal_total(reference, cost, y.first(m), resolution);
  r.tail = optimal_total(reference, cost, y.subspan(m, n), resolution);
  r.slack = r.whole - (r.head + r.tail);
  r.holds = r.slack >= -1e-12 * std::max(1.0, std::abs(r.whole));
  return r;
}

bool superadditivity_check(const TopologicalSystem& reference, const CostFunction& cost, std::span<const double> y,
                           std::size_t m, std::size_t n, const CandidateResolution& resolution) {
  return superadditivity(reference, cost, y, m, n, resolution).holds;
}

double phi_estimate(const TrackingResult& result) {
  if (const auto* f = std::get_if<FiberPoint>(&result.argmin_state)) return f->theta.value();
  if (const auto* p = std::get_if<ParamPoint>(&result.argmin_state)) return p->theta;
  throw ConfigError("phi needs an orbit-invariant coordinate (fiber product or parameter system)");
}

EstimatorTrace track_limit_estimate(const TopologicalSystem& reference, const CostFunction& cost,
                                    std::span<const double> y, const std::vector<std::size_t>& schedule,
                                    const CandidateResolution& resolution, const Execution& exec) {
  if (schedule.empty()) throw ConfigError("n schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0) throw ConfigError("n schedule entries must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw ConfigError("n schedule must be strictly increasing");
  }
  if (y.size() < schedule.back()) throw ConfigError("trajectory shorter than the largest n");
  EstimatorTrace trace;
  for (std::size_t n : schedule) {
    const auto r = optimal_tracking(TrackingProblem{reference, cost, Series(y.begin(), y.begin() + n), resolution},
                                    exec);
    TraceRow row{n, describe(r.argmin_state), std::nullopt, r.value};
    if (std::holds_alternative<FiberPoint>(r.argmin_state) || std::holds_alternative<ParamPoint>(r.argmin_state))
      row.theta_hat = phi_estimate(r);
    trace.rows.push_back(std::move(row));
  }
  trace.metadata["candidates"] = reference.candidate_scheme();
  trace.metadata["cost"] = cost.name();
  trace.metadata["step"] = fmt17(resolution.step);
  trace.metadata["u_step"] = fmt17(resolution.u_step);
  trace.metadata["refine_factor"] = std::to_string(resolution.refine ? resolution.refine_factor : 1);
  return trace;
}

EstimatorTrace track_limit_estimate(const TopologicalSystem& reference, const CostFunction& cost,
                                    const ObservationSource& source, const std::vector<std::size_t>& schedule,
                                    const CandidateResolution& resolution, const Execution& exec) {
  if (schedule.empty()) throw ConfigError("n schedule is empty");
  const Series y = sample(source, *std::max_element(schedule.begin(), schedule.end()));
  auto trace = track_limit_estimate(reference, cost, y, schedule, resolution, exec);
  trace.metadata["seed"] = std::to_string(source.seed());
  return trace;
}

}  // namespace ergtrack::tracking
