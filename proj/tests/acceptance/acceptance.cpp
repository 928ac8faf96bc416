#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles/vertex_enum.hpp"
#include "ergtrack/experiments/experiments.hpp"
#include "ergtrack/joinlp/joining.hpp"
#include "ergtrack/mle/mle.hpp"
#include "ergtrack/quantid/quantid.hpp"
#include "ergtrack/tracking/tracking.hpp"

using namespace ergtrack;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;
const double kAlphaStar = std::sqrt(2.0) / 4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d (%s): %s; %.2f s of %.0f s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), secs, limit_seconds, in_time ? "" : " (too slow)");
  std::fflush(stdout);
}

std::string fmt(double v) { return experiments::format_double(v); }

const TabulatedCost kHamming({{0, 1}, {1, 0}});

joinlp::BlockDistribution coin_blocks(std::size_t len) {
  return joinlp::block_distribution(ObservationSource(IIDBinary{0.5}, 1), len);
}

quantid::NoisyLabelRun rotation_run(double p, std::size_t n) {
  quantid::RunParams params;
  params.theta_star = Angle::real(kAlphaStar);
  params.p = p;
  params.n = n;
  params.seed = kSeed;
  return quantid::generate(params);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "superadditivity over 100 random instances", 10, [] {
    const auto rows = experiments::superadditivity_instances(kSeed, 100, 10);
    double min_slack = 1e300;
    bool all = rows.size() == 100;
    for (const auto& r : rows) {
      min_slack = std::min(min_slack, r.slack);
      all = all && r.holds && r.slack >= -1e-12;
    }
    return Outcome{all, "min slack " + fmt(min_slack)};
  });

  criterion(2, "forced value 1/2", 1, [] {
    const ObservationSource period2(MarkovChain{{{0.0, 1.0}, {1.0, 0.0}}}, kSeed);
    const auto y = sample(period2, 1000);
    bool ok = true;
    for (std::size_t n = 2; n <= 1000; n += 2) {
      const auto r = tracking::optimal_tracking(
          {SubshiftSFT::fixed_point(0), HammingOnLabels{}, Series(y.begin(), y.begin() + static_cast<long>(n)), {}});
      ok = ok && r.value == 0.5;
    }
    const auto inst = joinlp::build_instance(SubshiftSFT::fixed_point(0), joinlp::block_distribution(period2, 2),
                                             kHamming, 1);
    const auto lp = joinlp::solve(inst, joinlp::SolveMode::rational);
    ok = ok && lp.value == joinlp::Rational(1, 2);
    return Outcome{ok, "tracking 0.5 for all even n <= 1000, LP value " + joinlp::to_string(lp.value)};
  });

  criterion(3, "LP/tracking sandwich", 60, [] {
    const joinlp::BlockFamily coin = coin_blocks;
    const auto ladder = joinlp::relaxation_ladder(SubshiftSFT::golden_mean(), coin, kHamming, 3);
    const bool monotone = ladder[0] <= ladder[1] && ladder[1] <= ladder[2];
    const std::vector<std::vector<int>> golden{{1, 1}, {1, 0}};
    const std::vector<std::vector<oracle::Q>> cost{{0, 1}, {1, 0}};
    const auto vertices = oracle::enumerate_vertices(oracle::level_one_lp(golden, oracle::Q(1, 2), cost));
    const bool oracle_match = vertices.value == ladder[0];
    const double c1 = ladder[0].get_d();
    const auto y = sample(ObservationSource(IIDBinary{0.5}, kSeed), std::size_t{1} << 14);
    const auto r = tracking::optimal_tracking({SubshiftSFT::golden_mean(), HammingOnLabels{}, y, {}});
    const bool sandwich = r.value >= c1 - 1e-9 && r.value <= c1 + 0.05;
    return Outcome{monotone && oracle_match && sandwich,
                   "C1..C3 = " + joinlp::to_string(ladder[0]) + ", " + joinlp::to_string(ladder[1]) + ", " +
                       joinlp::to_string(ladder[2]) + "; vertex enumeration " + joinlp::to_string(vertices.value) +
                       "; tracking value " + fmt(r.value)};
  });

  criterion(4, "convex optimal face", 5, [] {
    const TabulatedCost zero_cost({{1, 1}, {0, 0}});
    const auto inst = joinlp::build_instance(SubshiftSFT::golden_mean(), coin_blocks(2), zero_cost, 1);
    const auto solved = joinlp::solve(inst);
    const auto face = joinlp::optimal_face_probe(inst, solved, 8, kSeed);
    const bool ok = face.vertices.size() >= 2 && face.convex && face.worst_gap.get_d() <= 1e-9;
    return Outcome{ok, face.summary + ", worst gap " + joinlp::to_string(face.worst_gap)};
  });

  quantid::RotationFamily family;
  family.theta_step = 1e-4;
  family.u_step = 1e-3;

  criterion(5, "noiseless rotation identification", 120, [&] {
    const auto run = rotation_run(0.0, 50000);
    const auto est = quantid::estimate_theta(run.observed, family);
    const double err = std::abs(est.theta_hat - kAlphaStar);
    return Outcome{err <= 2e-3, "theta_hat " + fmt(est.theta_hat) + ", error " + fmt(err)};
  });

  criterion(6, "noisy rotation identification", 180, [&] {
    const auto run = rotation_run(0.2, 50000);
    const auto est = quantid::estimate_theta(run.observed, family);
    const double err = std::abs(est.theta_hat - kAlphaStar);
    const bool ok = err <= 5e-3 && est.min_risk >= 0.18 && est.min_risk <= 0.22;
    return Outcome{ok, "theta_hat " + fmt(est.theta_hat) + ", error " + fmt(err) + ", min risk " + fmt(est.min_risk)};
  });

  criterion(7, "d-bar lower bound at five probes", 120, [] {
    const auto run = rotation_run(0.2, 100000);
    bool ok = true;
    std::string detail = "slacks";
    for (double probe : {kAlphaStar + 1e-6, kAlphaStar + 5e-6, kAlphaStar + 1e-5, 0.1, 0.25}) {
      const auto r = quantid::dbar_floor_check(run, Angle::real(probe), 0.02);
      ok = ok && r.noisy_min_risk >= 0.2 + 0.6 * r.clean_min_risk - 0.02;
      detail += " " + fmt(r.slack);
    }
    return Outcome{ok, detail};
  });

  criterion(8, "block complexity bound", 60, [] {
    quantid::RotationFamily fam;
    for (int i = 0; i < 500; ++i) fam.explicit_thetas.push_back(Angle::real(0.5 * i / 499.0));
    const auto report = quantid::block_complexity(fam, 64);
    bool decreasing = true;
    for (std::size_t i = 1; i < report.entropy.size(); ++i)
      if (report.entropy[i].first > 16) decreasing = decreasing && report.entropy[i].second < report.entropy[i - 1].second;
    const double h64 = report.entropy.back().second;
    const bool ok = report.exponent <= 4.5 && decreasing && h64 <= 0.2;
    return Outcome{ok, "exponent " + fmt(report.exponent) + ", log C(64)/64 " + fmt(h64) +
                           (decreasing ? ", decreasing from 16" : ", not decreasing")};
  });

  criterion(9, "identifiability separation", 30, [] {
    const auto r = quantid::separation_bound(0.2, 0.3, 0.04, 200, 200, 21);
    const bool ok = r.n_steps == 25 && r.counterexamples == 0 && r.checked == 200 * 200 * 21;
    return Outcome{ok, "N " + std::to_string(r.n_steps) + ", " + std::to_string(r.counterexamples) +
                           " counterexamples in " + std::to_string(r.checked)};
  });

  criterion(10, "MLE under Markov sampling", 30, [] {
    const ObservationSource chain(MarkovChain{{{0.9, 0.1}, {0.3, 0.7}}}, kSeed);
    const auto y = sample(chain, 100000);
    const auto fam = mle::bernoulli(0.0, 1.0, 0.01);
    const std::vector<std::size_t> schedule{100, 1000, 10000, 100000};
    const auto direct = mle::mle_estimate(fam, y, schedule);
    tracking::CandidateResolution res;
    res.step = fam.step;
    res.refine_factor = fam.refine_factor;
    const auto trace =
        tracking::track_limit_estimate(IdentityOnParams{fam.lo, fam.hi}, mle::neg_log_cost(fam), y, schedule, res);
    bool same = trace.rows.size() == schedule.size();
    for (std::size_t i = 0; same && i < schedule.size(); ++i) same = *trace.rows[i].theta_hat == direct.theta_hat[i];
    const double err = std::abs(direct.theta_hat.back() - 0.25);
    return Outcome{err <= 0.01 && same,
                   "theta_hat " + fmt(direct.theta_hat.back()) + (same ? ", routes identical" : ", routes differ")};
  });

  criterion(11, "byte-identical CSVs across thread counts", 600, [] {
    const fs::path root = fs::temp_directory_path() / "ergtrack-acceptance";
    fs::remove_all(root);
    std::size_t compared = 0;
    bool ok = true;
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(ERGTRACK_CONFIG_DIR))
      if (e.path().extension() == ".ini" && e.path().stem() != "suite") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    for (const auto& cfg : configs) {
      std::vector<fs::path> dirs;
      for (unsigned threads : {1u, 4u}) {
        experiments::RunOptions o;
        o.out = root / (cfg.stem().string() + "_t" + std::to_string(threads));
        o.exec.threads = threads;
        experiments::run_file(cfg.string(), o);
        dirs.push_back(o.out);
      }
      for (const auto& e : fs::directory_iterator(dirs[0])) {
        if (e.path().extension() != ".csv") continue;
        ok = ok && slurp(e.path()) == slurp(dirs[1] / e.path().filename());
        ++compared;
      }
    }
    return Outcome{ok && compared >= configs.size(),
                   std::to_string(configs.size()) + " configs, " + std::to_string(compared) + " CSV pairs compared"};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
