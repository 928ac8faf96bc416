#include "ergtrack/experiments/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ergtrack/core/error.hpp"
#include "ergtrack/core/rng.hpp"
#include "ergtrack/joinlp/joining.hpp"
#include "ergtrack/mle/mle.hpp"
#include "ergtrack/quantid/quantid.hpp"
#include "ergtrack/tracking/tracking.hpp"

namespace ergtrack::experiments {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) { return mix64(seed ^ fnv1a(tag)); }

bool parse_number(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
  if (first == last) return false;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InvalidState("csv row width does not match the header");
    line(cells);
  }
  std::string str() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t width_;
  std::string text_;
};

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

struct Context {
  fs::path dir;
  Execution exec;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::map<std::string, double> metrics;

  void save(const std::string& file, const std::string& content) {
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
    os << content;
    outputs.push_back(file);
  }
};

struct Prepared {
  std::vector<std::string> metrics;
  std::function<void(Context&)> execute;
};

struct CheckSpec {
  std::string name;
  std::string metric;
  std::string op;
  double bound = 0.0;
};

std::vector<CheckSpec> read_checks(const Config& config) {
  std::vector<CheckSpec> out;
  if (!config.has("checks")) return out;
  const ConfigSection& s = config.section("checks");
  for (const auto& [key, entry] : s.entries()) {
    CheckSpec c;
    c.name = key;
    const auto cut = key.rfind('_');
    const std::string suffix = cut == std::string::npos ? "" : key.substr(cut + 1);
    if (suffix == "min") {
      c.op = ">=";
    } else if (suffix == "max") {
      c.op = "<=";
    } else if (suffix == "eq") {
      c.op = "==";
    } else {
      throw ConfigError("[checks] line " + std::to_string(entry.line) + ": '" + key +
                        "' must end in _min, _max or _eq");
    }
    c.metric = key.substr(0, cut);
    c.bound = s.get_double(key);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::size_t> read_schedule(const ConfigSection& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (auto v : s.get_u64s(key)) out.push_back(static_cast<std::size_t>(v));
  if (out.empty()) throw ConfigError("[" + s.name() + "] " + key + " must not be empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0) throw ConfigError("[" + s.name() + "] " + key + " entries must be positive");
    if (i > 0 && out[i] <= out[i - 1]) throw ConfigError("[" + s.name() + "] " + key + " must be strictly increasing");
  }
  return out;
}

double positive(const ConfigSection& s, const std::string& key, double fallback) {
  const double v = s.get_double(key, fallback);
  if (!(v > 0.0)) throw ConfigError("[" + s.name() + "] " + key + " must be positive");
  return v;
}

tracking::CandidateResolution read_resolution(const ConfigSection& s) {
  tracking::CandidateResolution r;
  r.step = positive(s, "step", r.step);
  r.u_step = positive(s, "u_step", r.u_step);
  r.refine_factor = static_cast<int>(s.get_u64("refine_factor", static_cast<std::uint64_t>(r.refine_factor)));
  if (r.refine_factor < 1) throw ConfigError("[" + s.name() + "] refine_factor must be >= 1");
  r.refine = s.get_bool("refine", r.refine);
  return r;
}

double source_mean(const ObservationSource& source) {
  if (const auto* b = source.as<IIDBinary>()) return b->prob;
  if (const auto* m = source.as<MarkovChain>()) {
    const auto pi = stationary_distribution(m->transition);
    double mean = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) mean += static_cast<double>(i) * pi[i];
    return mean;
  }
  if (const auto* g = source.as<IIDGaussian>()) return g->mean;
  if (source.as<SignedCoin>()) return 0.0;
  throw ConfigError("marginal mean unknown for this source kind; set [mle] target");
}

std::string plot_file(Context& ctx, const std::string& file, const std::string& title, const std::string& xl,
                      const std::string& yl, const std::vector<std::pair<double, double>>& pts, bool log_x,
                      bool log_y) {
  ctx.save(file, line_plot_svg(title, xl, yl, pts, log_x, log_y));
  return file;
}

// ---- track ----------------------------------------------------------------

Prepared prepare_track(const Config& config, std::uint64_t seed) {
  auto reference = system_from_config(config.section("reference"));
  auto cost = cost_from_config(config.section("cost"));
  auto source = source_from_config(config, "source", derive_seed(seed, "source"));
  const ConfigSection& t = config.section("track");
  const auto schedule = read_schedule(t, "schedule");
  const auto resolution = read_resolution(t);
  std::optional<double> target;
  if (t.has("theta_target")) target = t.get_double("theta_target");

  Prepared p;
  p.metrics = {"final_value"};
  if (target) p.metrics.insert(p.metrics.end(), {"final_theta", "final_theta_error", "max_theta_error"});
  p.execute = [=](Context& ctx) {
    const auto trace = tracking::track_limit_estimate(reference, cost, source, schedule, resolution, ctx.exec);
    Csv csv({"n", "argmin_id", "theta_hat", "value"});
    std::vector<std::pair<double, double>> errors;
    double max_err = 0.0;
    for (const auto& r : trace.rows) {
      csv.row({num(r.n), r.argmin_id, r.theta_hat ? num(*r.theta_hat) : "", num(r.value)});
      if (target && r.theta_hat) {
        const double e = std::abs(*r.theta_hat - *target);
        max_err = std::max(max_err, e);
        errors.emplace_back(static_cast<double>(r.n), std::max(e, 1e-12));
      }
    }
    ctx.save("trace.csv", csv.str());
    const auto& last = trace.rows.back();
    ctx.metrics["final_value"] = last.value;
    if (target) {
      if (!last.theta_hat) throw ConfigError("[track] theta_target needs a reference with a parameter coordinate");
      ctx.metrics["final_theta"] = *last.theta_hat;
      ctx.metrics["final_theta_error"] = std::abs(*last.theta_hat - *target);
      ctx.metrics["max_theta_error"] = max_err;
      plot_file(ctx, "theta_error.svg", "|theta_hat - target|", "n", "error", errors, true, true);
    }
  };
  return p;
}

// ---- superadditivity ------------------------------------------------------

Prepared prepare_superadditivity(const Config& config, std::uint64_t seed) {
  const ConfigSection& s = config.section("superadditivity");
  const auto instances = static_cast<std::size_t>(s.get_u64("instances", 100));
  const auto max_len = static_cast<std::size_t>(s.get_u64("max_len", 10));
  if (instances == 0 || max_len == 0) throw ConfigError("[superadditivity] instances and max_len must be positive");
  Prepared p;
  p.metrics = {"min_slack", "failures", "instances"};
  p.execute = [=](Context& ctx) {
    const auto rows = superadditivity_instances(derive_seed(seed, "superadditivity"), instances, max_len);
    Csv csv({"instance", "reference", "source", "m", "n", "whole", "head", "tail", "slack", "holds"});
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (const auto& r : rows) {
      csv.row({num(r.instance), r.reference, r.source, num(r.m), num(r.n), num(r.whole), num(r.head), num(r.tail),
               num(r.slack), r.holds ? "1" : "0"});
      min_slack = std::min(min_slack, r.slack);
      failures += r.holds ? 0 : 1;
    }
    ctx.save("superadditivity.csv", csv.str());
    ctx.metrics["min_slack"] = min_slack;
    ctx.metrics["failures"] = static_cast<double>(failures);
    ctx.metrics["instances"] = static_cast<double>(rows.size());
  };
  return p;
}

// ---- joinlp ---------------------------------------------------------------

Prepared prepare_joinlp(const Config& config, std::uint64_t seed) {
  auto reference = system_from_config(config.section("reference"));
  const auto* sft_ptr = reference.as<SubshiftSFT>();
  if (!sft_ptr) throw ConfigError("[reference] joinlp needs a subshift of finite type");
  const SubshiftSFT sft = *sft_ptr;
  auto cost = cost_from_config(config.section("cost"));
  auto source = source_from_config(config, "source", derive_seed(seed, "source"));
  const ConfigSection& j = config.section("joinlp");
  const auto k_max = static_cast<std::size_t>(j.get_u64("k_max"));
  if (k_max == 0) throw ConfigError("[joinlp] k_max must be positive");
  const std::string mode_name = j.find_string("mode").value_or("rational");
  if (mode_name != "rational" && mode_name != "floating")
    throw ConfigError("[joinlp] mode must be rational or floating");
  const auto mode = mode_name == "rational" ? joinlp::SolveMode::rational : joinlp::SolveMode::floating;
  const auto cap = static_cast<std::size_t>(j.get_u64("cap", joinlp::kDefaultVariableCap));
  const auto face_vertices = static_cast<std::size_t>(j.get_u64("face_vertices", 0));
  const auto track_n = static_cast<std::size_t>(j.get_u64("track_n", 0));

  Prepared p;
  for (std::size_t k = 1; k <= k_max; ++k) p.metrics.push_back("c" + std::to_string(k));
  p.metrics.push_back("ladder_monotone");
  if (face_vertices > 0) p.metrics.insert(p.metrics.end(), {"face_vertices", "face_midpoints", "face_worst_gap"});
  if (track_n > 0) p.metrics.insert(p.metrics.end(), {"tracking_value", "tracking_gap"});
  p.execute = [=](Context& ctx) {
    Csv csv({"k", "variables", "value", "value_float", "product_value", "pivots", "status"});
    std::vector<double> values;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const auto blocks = joinlp::block_distribution(source, k + 1);
      const auto table = cost.table(sft.alphabet(), blocks.alphabet);
      const auto inst = joinlp::build_instance(sft, blocks, table, k, cap);
      const auto res = joinlp::solve(inst, mode);
      if (res.status != joinlp::LpStatus::optimal) throw InvalidState("joining LP at k=" + std::to_string(k) + " not optimal");
      csv.row({num(k), num(inst.variable_count()), joinlp::to_string(res.value), num(res.value_float),
               joinlp::to_string(res.product_value), num(res.pivots), "optimal"});
      values.push_back(res.value_float);
      ctx.metrics["c" + std::to_string(k)] = res.value_float;
      if (k == 1 && face_vertices > 0) {
        if (mode != joinlp::SolveMode::rational) throw ConfigError("[joinlp] face probe needs rational mode");
        const auto face = joinlp::optimal_face_probe(inst, res, face_vertices, derive_seed(seed, "face"));
        Csv fcsv({"vertex", "objective", "weights"});
        for (std::size_t v = 0; v < face.vertices.size(); ++v) {
          std::string weights;
          for (std::size_t i = 0; i < face.vertices[v].size(); ++i) {
            if (i) weights += ' ';
            weights += joinlp::to_string(face.vertices[v][i]);
          }
          fcsv.row({num(v), joinlp::to_string(joinlp::objective(inst, face.vertices[v])), weights});
        }
        ctx.save("face.csv", fcsv.str());
        ctx.metrics["face_vertices"] = static_cast<double>(face.vertices.size());
        ctx.metrics["face_midpoints"] = static_cast<double>(face.midpoints_checked);
        ctx.metrics["face_worst_gap"] = face.worst_gap.get_d();
      }
    }
    ctx.save("ladder.csv", csv.str());
    bool monotone = true;
    for (std::size_t i = 1; i < values.size(); ++i) monotone = monotone && values[i] >= values[i - 1];
    ctx.metrics["ladder_monotone"] = monotone ? 1.0 : 0.0;
    if (track_n > 0) {
      tracking::TrackingProblem problem{reference, cost, sample(source, track_n), {}};
      const auto r = tracking::optimal_tracking(problem, ctx.exec);
      Csv tcsv({"n", "argmin_id", "value", "c1", "gap"});
      tcsv.row({num(track_n), describe(r.argmin_state), num(r.value), num(values.front()),
                num(r.value - values.front())});
      ctx.save("tracking.csv", tcsv.str());
      ctx.metrics["tracking_value"] = r.value;
      ctx.metrics["tracking_gap"] = r.value - values.front();
    }
  };
  return p;
}

// ---- quantid --------------------------------------------------------------

Prepared prepare_quantid(const Config& config, std::uint64_t seed) {
  const ConfigSection& q = config.section("quantid");
  quantid::RunParams run;
  run.theta_star = q.get_angle("theta_star");
  run.p = q.get_double("p");
  run.n = static_cast<std::size_t>(q.get_u64("n"));
  run.seed = derive_seed(seed, "quantid");
  if (q.has("u")) run.u = q.get_double("u");
  run.partition = partition_from_config(q);
  quantid::RotationFamily family;
  family.theta_lo = q.get_double("theta_lo", family.theta_lo);
  family.theta_hi = q.get_double("theta_hi", family.theta_hi);
  family.theta_step = positive(q, "theta_step", family.theta_step);
  family.u_step = positive(q, "u_step", family.u_step);
  family.refine_factor = static_cast<int>(q.get_u64("refine_factor", 100));
  family.refine = q.get_bool("refine", true);
  family.partition = run.partition;
  family.validate();
  std::vector<std::size_t> schedule{run.n};
  if (q.has("schedule")) schedule = read_schedule(q, "schedule");
  if (schedule.back() > run.n) throw ConfigError("[quantid] schedule exceeds n");
  const bool estimate = q.get_bool("estimate", true);
  std::vector<double> probes;
  if (q.has("probes")) probes = q.get_doubles("probes");
  const double probe_tol = q.get_double("probe_tolerance", 0.02);
  if (run.p < 0.0 || run.p >= 0.5) throw ConfigError("[quantid] p must lie in [0, 1/2)");

  Prepared p;
  if (estimate) p.metrics = {"theta_hat", "abs_error", "min_risk", "max_abs_error"};
  if (!probes.empty()) p.metrics.insert(p.metrics.end(), {"dbar_min_slack", "dbar_failures"});
  p.execute = [=](Context& ctx) {
    const auto data = quantid::generate(run);
    const double star = run.theta_star.value();
    if (estimate) {
      Csv csv({"n", "theta_hat", "u_hat", "min_risk", "abs_error"});
      std::vector<std::pair<double, double>> errors;
      double max_err = 0.0;
      quantid::ThetaEstimate last;
      for (std::size_t n : schedule) {
        const Word prefix(data.observed.begin(), data.observed.begin() + static_cast<std::ptrdiff_t>(n));
        last = quantid::estimate_theta(prefix, family, ctx.exec);
        const double err = std::abs(last.theta_hat - star);
        max_err = std::max(max_err, err);
        errors.emplace_back(static_cast<double>(n), std::max(err, 1e-12));
        csv.row({num(n), num(last.theta_hat), num(last.u_hat), num(last.min_risk), num(err)});
      }
      ctx.save("estimate.csv", csv.str());
      ctx.metrics["theta_hat"] = last.theta_hat;
      ctx.metrics["abs_error"] = std::abs(last.theta_hat - star);
      ctx.metrics["min_risk"] = last.min_risk;
      ctx.metrics["max_abs_error"] = max_err;
      if (schedule.size() > 1) plot_file(ctx, "theta_error.svg", "|theta_hat - theta_star|", "n", "error", errors, true, true);
    }
    if (!probes.empty()) {
      Csv csv({"theta_probe", "clean_min_risk", "noisy_min_risk", "bound", "slack", "holds"});
      double min_slack = std::numeric_limits<double>::infinity();
      std::size_t failures = 0;
      for (double t : probes) {
        const auto r = quantid::dbar_floor_check(data, Angle::real(t), probe_tol, run.partition);
        csv.row({num(t), num(r.clean_min_risk), num(r.noisy_min_risk), num(r.bound), num(r.slack),
                 r.holds ? "1" : "0"});
        min_slack = std::min(min_slack, r.slack);
        failures += r.holds ? 0 : 1;
      }
      ctx.save("dbar.csv", csv.str());
      ctx.metrics["dbar_min_slack"] = min_slack;
      ctx.metrics["dbar_failures"] = static_cast<double>(failures);
    }
  };
  return p;
}

// ---- complexity -----------------------------------------------------------

Prepared prepare_complexity(const Config& config, std::uint64_t) {
  const ConfigSection& c = config.section("complexity");
  quantid::RotationFamily family;
  family.theta_lo = c.get_double("theta_lo", 0.0);
  family.theta_hi = c.get_double("theta_hi", 0.5);
  const auto points = static_cast<std::size_t>(c.get_u64("points", 500));
  if (points < 2) throw ConfigError("[complexity] points must be >= 2");
  for (std::size_t i = 0; i < points; ++i) {
    const double t = family.theta_lo + (family.theta_hi - family.theta_lo) * static_cast<double>(i) /
                                           static_cast<double>(points - 1);
    family.explicit_thetas.push_back(Angle::real(t));
  }
  family.partition = partition_from_config(c);
  const auto n_max = static_cast<std::size_t>(c.get_u64("n_max", 64));
  const auto decreasing_from = static_cast<std::size_t>(c.get_u64("decreasing_from", 16));
  if (n_max == 0 || n_max > quantid::kComplexityCap) throw ConfigError("[complexity] n_max must lie in [1, 64]");

  Prepared p;
  p.metrics = {"exponent", "entropy_at_n_max", "entropy_decreasing", "count_at_n_max"};
  p.execute = [=](Context& ctx) {
    const auto report = quantid::block_complexity(family, n_max, quantid::kComplexityCap, ctx.exec);
    Csv csv({"n", "count", "log_count_over_n"});
    std::vector<std::pair<double, double>> pts;
    bool decreasing = true;
    for (std::size_t i = 0; i < report.counts.size(); ++i) {
      const auto [n, count] = report.counts[i];
      const double h = report.entropy[i].second;
      csv.row({num(n), std::to_string(count), num(h)});
      pts.emplace_back(static_cast<double>(n), static_cast<double>(count));
      if (i > 0 && n > decreasing_from && !(h < report.entropy[i - 1].second)) decreasing = false;
    }
    ctx.save("complexity.csv", csv.str());
    plot_file(ctx, "complexity.svg", "C(n)", "n", "count", pts, true, true);
    ctx.metrics["exponent"] = report.exponent;
    ctx.metrics["entropy_at_n_max"] = report.entropy.back().second;
    ctx.metrics["entropy_decreasing"] = decreasing ? 1.0 : 0.0;
    ctx.metrics["count_at_n_max"] = static_cast<double>(report.counts.back().second);
  };
  return p;
}

// ---- separation -----------------------------------------------------------

Prepared prepare_separation(const Config& config, std::uint64_t) {
  const ConfigSection& s = config.section("separation");
  const double a1 = s.get_double("alpha1");
  const double a2 = s.get_double("alpha2");
  const double eps = s.get_double("epsilon");
  const auto up = static_cast<std::size_t>(s.get_u64("u_points", 200));
  const auto vp = static_cast<std::size_t>(s.get_u64("v_points", 200));
  const auto ap = static_cast<std::size_t>(s.get_u64("alpha_points", 21));
  Prepared p;
  p.metrics = {"n_steps", "checked", "counterexamples"};
  p.execute = [=](Context& ctx) {
    const auto r = quantid::separation_bound(a1, a2, eps, up, vp, ap);
    Csv csv({"alpha1", "alpha2", "epsilon", "n_steps", "checked", "counterexamples"});
    csv.row({num(a1), num(a2), num(eps), std::to_string(r.n_steps), std::to_string(r.checked),
             std::to_string(r.counterexamples)});
    ctx.save("separation.csv", csv.str());
    ctx.metrics["n_steps"] = static_cast<double>(r.n_steps);
    ctx.metrics["checked"] = static_cast<double>(r.checked);
    ctx.metrics["counterexamples"] = static_cast<double>(r.counterexamples);
  };
  return p;
}

// ---- mle ------------------------------------------------------------------

Prepared prepare_mle(const Config& config, std::uint64_t seed) {
  const ConfigSection& f = config.section("family");
  const std::string kind = f.get_string("kind");
  mle::DensityFamily family;
  if (kind == "bernoulli") {
    family = mle::bernoulli(f.get_double("lo", 0.0), f.get_double("hi", 1.0), f.get_double("step", 0.01));
  } else if (kind == "gaussian_location") {
    family = mle::gaussian_location(f.get_double("lo"), f.get_double("hi"), f.get_double("step"));
  } else {
    throw ConfigError("[family] unknown family '" + kind + "' (known: bernoulli, gaussian_location)");
  }
  family.refine_factor = static_cast<int>(f.get_u64("refine_factor", 100));
  family.refine = f.get_bool("refine", true);
  family.validate();
  auto source = source_from_config(config, "source", derive_seed(seed, "source"));
  const ConfigSection& m = config.section("mle");
  const auto schedule = read_schedule(m, "schedule");
  const bool tracking_route = m.get_bool("tracking_route", true);
  const double target = m.has("target") ? m.get_double("target")
                                        : mle::target_set(family, {source_mean(source)}).front();
  const std::size_t stable_from = m.get_u64("stable_from", schedule.back());

  Prepared p;
  p.metrics = {"theta_hat", "abs_error", "tail_abs_error", "target"};
  if (tracking_route) p.metrics.push_back("routes_agree");
  p.execute = [=](Context& ctx) {
    const Series y = sample(source, schedule.back());
    const auto est = mle::mle_estimate(family, y, schedule);
    std::vector<double> via_tracking;
    if (tracking_route) {
      tracking::CandidateResolution res;
      res.step = family.step;
      res.refine_factor = family.refine_factor;
      res.refine = family.refine;
      const auto trace = tracking::track_limit_estimate(IdentityOnParams{family.lo, family.hi},
                                                        mle::neg_log_cost(family), y, schedule, res, ctx.exec);
      for (const auto& r : trace.rows) via_tracking.push_back(*r.theta_hat);
    }
    Csv csv(tracking_route ? std::vector<std::string>{"n", "theta_hat", "loglik", "abs_error", "tracking_theta_hat"}
                           : std::vector<std::string>{"n", "theta_hat", "loglik", "abs_error"});
    bool agree = true;
    double tail = 0.0;
    std::vector<std::pair<double, double>> errors;
    for (std::size_t i = 0; i < est.n.size(); ++i) {
      const double err = std::abs(est.theta_hat[i] - target);
      if (est.n[i] >= stable_from) tail = std::max(tail, err);
      errors.emplace_back(static_cast<double>(est.n[i]), std::max(err, 1e-12));
      std::vector<std::string> cells{num(est.n[i]), num(est.theta_hat[i]), num(est.loglik[i]), num(err)};
      if (tracking_route) {
        cells.push_back(num(via_tracking[i]));
        agree = agree && via_tracking[i] == est.theta_hat[i];
      }
      csv.row(cells);
    }
    ctx.save("mle.csv", csv.str());
    if (est.n.size() > 1) plot_file(ctx, "theta_error.svg", "|theta_hat - target|", "n", "error", errors, true, true);
    ctx.metrics["theta_hat"] = est.theta_hat.back();
    ctx.metrics["abs_error"] = std::abs(est.theta_hat.back() - target);
    ctx.metrics["tail_abs_error"] = tail;
    ctx.metrics["target"] = target;
    if (tracking_route) ctx.metrics["routes_agree"] = agree ? 1.0 : 0.0;
  };
  return p;
}

// ---- registry -------------------------------------------------------------

using Preparer = Prepared (*)(const Config&, std::uint64_t);

const std::map<std::string, Preparer>& registry() {
  static const std::map<std::string, Preparer> r{
      {"track", prepare_track},         {"superadditivity", prepare_superadditivity},
      {"joinlp", prepare_joinlp},       {"quantid", prepare_quantid},
      {"complexity", prepare_complexity}, {"separation", prepare_separation},
      {"mle", prepare_mle},
  };
  return r;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::vector<CheckResult> evaluate(const std::vector<CheckSpec>& specs, const std::map<std::string, double>& metrics) {
  std::vector<CheckResult> out;
  for (const auto& s : specs) {
    CheckResult c{s.name, s.metric, s.op, s.bound, metrics.at(s.metric), false};
    if (s.op == ">=") c.pass = c.value >= c.bound;
    if (s.op == "<=") c.pass = c.value <= c.bound;
    if (s.op == "==") c.pass = c.value == c.bound;
    out.push_back(c);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunManifest run_suite(const Config& config, const RunOptions& options, RunManifest manifest) {
  const ConfigSection& s = config.section("suite");
  std::vector<std::string> members;
  std::istringstream is(s.get_string("configs"));
  for (std::string item; is >> item;) members.push_back(item);
  if (members.empty()) throw ConfigError("[suite] configs must list at least one file");
  config.finish();
  const fs::path base = fs::path(config.origin()).parent_path();
  const auto t0 = std::chrono::steady_clock::now();
  Csv csv({"member", "kind", "passed", "checks", "wall_seconds"});
  for (const auto& member : members) {
    RunOptions child = options;
    child.seed.reset();
    child.expected_kind.reset();
    child.out = options.out / fs::path(member).stem();
    auto m = run_file((base / member).string(), child);
    csv.row({fs::path(member).stem().string(), m.kind, m.passed() ? "1" : "0", num(m.checks.size()),
             num(m.wall_seconds)});
    for (const auto& c : m.checks) {
      auto copy = c;
      copy.name = m.name + "." + c.name;
      manifest.checks.push_back(copy);
    }
    manifest.outputs.push_back((fs::path(m.out_dir.filename()) / "manifest.json").string());
    manifest.children.push_back(std::move(m));
  }
  {
    std::ofstream os(options.out / "suite.csv", std::ios::binary);
    os << csv.str();
  }
  manifest.outputs.insert(manifest.outputs.begin(), "suite.csv");
  manifest.wall_seconds = seconds_since(t0);
  write_manifest(manifest, options.out / "manifest.json");
  return manifest;
}

}  // namespace

bool RunManifest::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; }) &&
         std::all_of(children.begin(), children.end(), [](const RunManifest& m) { return m.passed(); });
}

std::vector<std::string> registered_kinds() {
  std::vector<std::string> out;
  for (const auto& [k, _] : registry()) out.push_back(k);
  out.push_back("suite");
  std::sort(out.begin(), out.end());
  return out;
}

RunManifest run(Config config, const RunOptions& options) {
  if (!config.has("experiment")) throw ConfigError(config.origin() + ": missing [experiment] section");
  if (options.seed) config.override_value("experiment.seed", std::to_string(*options.seed));
  const ConfigSection& e = config.section("experiment");
  const std::string kind = e.get_string("kind");
  if (!e.has("seed")) throw ConfigError(config.origin() + ": [experiment] seed is required");
  const std::uint64_t seed = e.get_u64("seed");
  const std::string name = e.find_string("name").value_or(kind);
  if (options.expected_kind && *options.expected_kind != kind)
    throw ConfigError(config.origin() + ": experiment kind '" + kind + "' does not match subcommand '" +
                      *options.expected_kind + "'");

  RunManifest manifest;
  manifest.kind = kind;
  manifest.name = name;
  manifest.seed = seed;
  manifest.config_hash = fnv1a_hex(config.dump());
  manifest.out_dir = options.out;
  fs::create_directories(options.out);

  if (kind == "suite") return run_suite(config, options, std::move(manifest));
  const auto it = registry().find(kind);
  if (it == registry().end())
    throw ConfigError(config.origin() + ": unknown experiment kind '" + kind + "' (registered: " +
                      join(registered_kinds()) + ")");

  Prepared prepared = it->second(config, seed);
  const auto specs = read_checks(config);
  for (const auto& s : specs) {
    if (std::find(prepared.metrics.begin(), prepared.metrics.end(), s.metric) == prepared.metrics.end())
      throw ConfigError(config.origin() + ": check '" + s.name + "' names unknown metric '" + s.metric +
                        "' (available: " + join(prepared.metrics) + ")");
  }
  config.finish();

  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{options.out, options.exec, seed, {}, {}};
  prepared.execute(ctx);
  manifest.wall_seconds = seconds_since(t0);
  manifest.outputs = ctx.outputs;
  manifest.metrics = ctx.metrics;
  manifest.checks = evaluate(specs, ctx.metrics);
  {
    std::ofstream os(options.out / "config.ini", std::ios::binary);
    os << config.dump();
  }
  write_manifest(manifest, options.out / "manifest.json");
  return manifest;
}

RunManifest run_file(const std::string& path, const RunOptions& options) { return run(Config::load(path), options); }

std::vector<RunManifest> sweep(const Config& config, const std::string& axis, const std::vector<std::string>& values,
                               const RunOptions& options) {
  const auto dot = axis.rfind('.');
  if (dot == std::string::npos) throw ConfigError("sweep axis '" + axis + "' must look like section.key");
  const std::string sec = axis.substr(0, dot);
  const std::string key = axis.substr(dot + 1);
  if (!config.has(sec) || !config.section(sec).has(key))
    throw ConfigError("sweep axis '" + axis + "' is not a field of the config");
  double probe;
  if (!parse_number(config.section(sec).entries().at(key).value, probe))
    throw ConfigError("sweep axis '" + axis + "' is not numeric");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (const auto& v : values)
    if (!parse_number(v, probe)) throw ConfigError("sweep value '" + v + "' is not numeric");
  if (axis == "experiment.seed") throw ConfigError("sweep over the seed is not supported; use --seed");

  std::uint64_t base_seed;
  {
    Config copy = config;
    if (options.seed) copy.override_value("experiment.seed", std::to_string(*options.seed));
    base_seed = copy.section("experiment").get_u64("seed");
  }

  std::vector<RunManifest> out;
  std::set<std::string> metric_names;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Config c = config;
    c.override_value(axis, values[i]);
    RunOptions o = options;
    o.seed = CounterRng(base_seed, 0x7377656570ULL).split(i).next_u64();
    o.out = options.out / (std::to_string(i) + "_" + key + "=" + values[i]);
    out.push_back(run(std::move(c), o));
    for (const auto& [m, _] : out.back().metrics) metric_names.insert(m);
  }
  std::vector<std::string> header{axis, "seed", "passed"};
  header.insert(header.end(), metric_names.begin(), metric_names.end());
  Csv csv(header);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<std::string> cells{values[i], std::to_string(out[i].seed), out[i].passed() ? "1" : "0"};
    for (const auto& m : metric_names) {
      const auto it = out[i].metrics.find(m);
      cells.push_back(it == out[i].metrics.end() ? "" : num(it->second));
    }
    csv.row(cells);
  }
  fs::create_directories(options.out);
  std::ofstream os(options.out / "summary.csv", std::ios::binary);
  os << csv.str();
  return out;
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) {
    if (*flag == 0) throw ConfigError("--threads must be positive");
    return *flag;
  }
  if (const char* env = std::getenv(kThreadsEnv); env && *env) {
    double v;
    if (!parse_number(env, v) || v < 1 || v != std::floor(v) || v > 1024)
      throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return 1;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<std::pair<double, double>>& points, bool log_x, bool log_y) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!points.empty()) {
    x0 = x1 = tx(points.front().first);
    y0 = y1 = ty(points.front().second);
    for (const auto& [x, y] : points) {
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << x_label << (log_x ? " (log10)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\" text-anchor=\"middle\">" << y_label << (log_y ? " (log10)" : "") << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = L + (W - L - R) * i / 4.0;
    const double gy = H - B - (H - T - B) * i / 4.0;
    os << "<text x=\"" << gx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << fx
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << gy + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << fy
       << "</text>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& [x, y] : points) os << px(x) << ',' << py(y) << ' ';
  os << "\"/>\n</svg>\n";
  return os.str();
}

std::vector<SuperadditivityRow> superadditivity_instances(std::uint64_t seed, std::size_t count,
                                                          std::size_t max_len) {
  std::vector<SuperadditivityRow> rows;
  const CostFunction cost = HammingOnLabels{};
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    SuperadditivityRow row;
    row.instance = i;
    const bool golden = rng.bernoulli(0.5);
    const TopologicalSystem reference =
        golden ? TopologicalSystem(SubshiftSFT::golden_mean()) : TopologicalSystem(SubshiftSFT::full_shift(2));
    row.reference = golden ? "golden_mean" : "full_shift";
    const std::uint64_t source_seed = rng.next_u64();
    const bool markov = rng.bernoulli(0.5);
    std::optional<ObservationSource> source;
    if (markov) {
      const double a = 0.05 + 0.9 * rng.uniform();
      const double b = 0.05 + 0.9 * rng.uniform();
      source.emplace(MarkovChain{{{1.0 - a, a}, {b, 1.0 - b}}}, source_seed);
      row.source = "markov(" + format_double(a) + ";" + format_double(b) + ")";
    } else {
      const double q = 0.05 + 0.9 * rng.uniform();
      source.emplace(IIDBinary{q}, source_seed);
      row.source = "iid(" + format_double(q) + ")";
    }
    row.m = 1 + static_cast<std::size_t>(rng.below(max_len));
    row.n = 1 + static_cast<std::size_t>(rng.below(max_len));
    const Series y = sample(*source, row.m + row.n);
    const auto r = tracking::superadditivity(reference, cost, y, row.m, row.n);
    row.whole = r.whole;
    row.head = r.head;
    row.tail = r.tail;
    row.slack = r.slack;
    row.holds = r.holds;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& c : m.checks)
    checks.push_back({{"name", c.name}, {"metric", c.metric}, {"op", c.op}, {"bound", c.bound}, {"value", c.value},
                      {"pass", c.pass}});
  json metrics = json::object();
  for (const auto& [k, v] : m.metrics) metrics[k] = std::isfinite(v) ? json(v) : json(format_double(v));
  json j{{"kind", m.kind},
         {"name", m.name},
         {"config_hash", m.config_hash},
         {"seed", m.seed},
         {"versions", {{"ergtrack", "0.1.0"}, {"config_schema", kConfigSchema}}},
         {"outputs", m.outputs},
         {"wall_seconds", m.wall_seconds},
         {"metrics", metrics},
         {"checks", checks},
         {"passed", m.passed()}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace ergtrack::experiments
