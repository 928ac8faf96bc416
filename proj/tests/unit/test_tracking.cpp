#include <doctest.h>

#include <cmath>

#include "../oracles/brute_tracking.hpp"
#include "ergtrack/core/error.hpp"
#include "ergtrack/core/rng.hpp"
#include "ergtrack/tracking/tracking.hpp"

using namespace ergtrack;
using namespace ergtrack::tracking;

namespace {

const std::vector<std::vector<int>> kGolden{{1, 1}, {1, 0}};
const std::vector<std::vector<int>> kFull{{1, 1}, {1, 1}};

double hamming(int a, double y) { return a == static_cast<int>(y) ? 0.0 : 1.0; }

Series random_bits(std::uint64_t seed, std::size_t n, double p = 0.5) {
  CounterRng rng(seed);
  Series y(n);
  for (auto& v : y) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return y;
}

}  // namespace

TEST_CASE("empirical cost examples") {
  const CostFunction h = HammingOnLabels{};
  const Series y{0, 1, 0, 1};
  CHECK(empirical_cost(SubshiftSFT::fixed_point(0), h, Word{0}, y) == 0.5);
  const Series z{1, 0, 0, 1, 1, 0};
  Word copy(z.begin(), z.end());
  CHECK(empirical_cost(SubshiftSFT::full_shift(2), h, copy, z) == 0.0);
  const Series ones{1, 1, 1, 1};
  CHECK(empirical_cost(SubshiftSFT::golden_mean(), h, Word{1, 0, 1, 0}, ones) == 0.5);
  CHECK(empirical_cost(SubshiftSFT::golden_mean(), h, Word{0, 1, 0, 1}, ones) == 0.5);
  CHECK_THROWS(empirical_cost(SubshiftSFT::golden_mean(), h, Word{0}, Series{}));
}

TEST_CASE("golden mean against 1111 matches exhaustive enumeration") {
  const Series ones{1, 1, 1, 1};
  const auto brute = oracle::brute_tracking(kGolden, ones, hamming);
  CHECK(brute.total == 2.0);
  const auto r = optimal_tracking({SubshiftSFT::golden_mean(), HammingOnLabels{}, ones, {}});
  CHECK(r.value == 0.5);
  CHECK(std::get<Word>(r.argmin_state) == Word{0, 1, 0, 1});
}

TEST_CASE("forced and diagonal values") {
  for (std::size_t n : {2u, 4u, 10u, 64u}) {
    Series y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = static_cast<double>(k % 2);
    CHECK(optimal_tracking({SubshiftSFT::fixed_point(0), HammingOnLabels{}, y, {}}).value == 0.5);
    const auto noise = random_bits(n, n);
    CHECK(optimal_tracking({SubshiftSFT::full_shift(2), HammingOnLabels{}, noise, {}}).value == 0.0);
  }
}

TEST_CASE("dynamic program agrees with brute force") {
  CounterRng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const auto y = random_bits(1000 + trial, n, 0.3 + 0.4 * rng.uniform());
    for (const auto& [adj, sft] : {std::pair{kGolden, SubshiftSFT::golden_mean()},
                                   std::pair{kFull, SubshiftSFT::full_shift(2)}}) {
      const auto brute = oracle::brute_tracking(adj, y, hamming);
      const auto r = optimal_tracking({sft, HammingOnLabels{}, y, {}});
      CHECK(r.value * static_cast<double>(n) == brute.total);
      const auto& w = std::get<Word>(r.argmin_state);
      CHECK(std::vector<int>(w.begin(), w.end()) == brute.word);
    }
  }
}

TEST_CASE("tabulated costs agree with brute force") {
  const SubshiftSFT sft(3, {{true, true, false}, {false, true, true}, {true, false, false}});
  const std::vector<std::vector<int>> adj{{1, 1, 0}, {0, 1, 1}, {1, 0, 0}};
  const std::vector<std::vector<double>> table{{0, 2, 1}, {3, 0, 1}, {1, 1, 0}};
  CounterRng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    Series y(n);
    for (auto& v : y) v = static_cast<double>(rng.below(3));
    const auto brute = oracle::brute_tracking(adj, y, [&](int a, double b) { return table[a][static_cast<int>(b)]; });
    const auto r = optimal_tracking({sft, TabulatedCost(table), y, {}});
    CHECK(r.value * static_cast<double>(n) == brute.total);
  }
}

TEST_CASE("superadditivity examples") {
  const Series y{0, 1, 0, 1};
  const auto rep = superadditivity(SubshiftSFT::fixed_point(0), HammingOnLabels{}, y, 2, 2);
  CHECK(rep.whole == 2.0);
  CHECK(rep.head == 1.0);
  CHECK(rep.tail == 1.0);
  CHECK(rep.holds);
  const auto noise = random_bits(3, 20);
  const auto full = superadditivity(SubshiftSFT::full_shift(2), HammingOnLabels{}, noise, 9, 11);
  CHECK(full.whole == 0.0);
  CHECK(full.holds);
  CHECK_THROWS(superadditivity(SubshiftSFT::full_shift(2), HammingOnLabels{}, noise, 15, 11));
}

TEST_CASE("superadditivity over random golden mean instances") {
  CounterRng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(10), n = 1 + rng.below(10);
    const auto y = random_bits(rng.next_u64(), m + n, 0.2 + 0.6 * rng.uniform());
    const auto rep = superadditivity(SubshiftSFT::golden_mean(), HammingOnLabels{}, y, m, n);
    CHECK(rep.slack >= -1e-12);
    CHECK(superadditivity_check(SubshiftSFT::golden_mean(), HammingOnLabels{}, y, m, n));
  }
}

TEST_CASE("scaling equivariance") {
  const std::vector<std::vector<double>> base{{0, 2}, {3, 1}};
  const double a = 3.0;
  const double shift[] = {5.0, -2.0};
  std::vector<std::vector<double>> scaled = base;
  for (int x = 0; x < 2; ++x)
    for (int b = 0; b < 2; ++b) scaled[x][b] = a * base[x][b] + shift[b];
  CounterRng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + rng.below(40);
    const auto y = random_bits(rng.next_u64(), n);
    const auto r0 = optimal_tracking({SubshiftSFT::golden_mean(), TabulatedCost(base), y, {}});
    const auto r1 = optimal_tracking({SubshiftSFT::golden_mean(), TabulatedCost(scaled), y, {}});
    double mean_shift = 0.0;
    for (double v : y) mean_shift += shift[static_cast<int>(v)];
    mean_shift /= static_cast<double>(n);
    CHECK(r1.value == doctest::Approx(a * r0.value + mean_shift).epsilon(1e-12));
    CHECK(r1.argmin_state == r0.argmin_state);
  }
}

TEST_CASE("value is recomputable from the argmin") {
  const auto y = random_bits(8, 300);
  const TopologicalSystem rot = CircleRotation{Angle::real(0.3), {}};
  const auto r = optimal_tracking({rot, HammingOnLabels{}, y, {}});
  const double again = empirical_cost(rot, HammingOnLabels{}, r.argmin_state, y);
  CHECK(std::abs(again - r.value) <= 1e-12 * std::max(1.0, std::abs(r.value)));
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[1].value <= r.trace[0].value);
}

TEST_CASE("rotation reference finds its own orbit") {
  const Angle angle = Angle::real(0.3);
  const TopologicalSystem rot = CircleRotation{angle, {}};
  const auto states = iterate(rot, CirclePoint{0.4125}, 400);
  Series y;
  for (const auto& s : states) y.push_back(Partition{}.label(std::get<CirclePoint>(s).x));
  const auto r = optimal_tracking({rot, HammingOnLabels{}, y, {}});
  CHECK(r.value == 0.0);
}

TEST_CASE("results do not depend on thread count") {
  const auto base = std::make_shared<const ObservationSource>(RotationOrbit{Angle::real(0.2), 0.1}, 1);
  const auto y = sample(ObservationSource(NoisyLabelChannel{base, 0.1, {}}, 4), 2000);
  CandidateResolution res;
  res.step = 1e-2;
  res.u_step = 1e-2;
  TrackingProblem prob{FiberProduct{0.0, 0.5, {}}, HammingOnLabels{}, y, res};
  const auto r1 = optimal_tracking(prob, Execution{1});
  const auto r4 = optimal_tracking(prob, Execution{4});
  CHECK(r1.argmin_state == r4.argmin_state);
  CHECK(r1.value == r4.value);
}

TEST_CASE("phi projection") {
  TrackingResult r;
  r.argmin_state = FiberPoint{Angle::real(0.25), 0.1};
  CHECK(phi_estimate(r) == 0.25);
  r.argmin_state = ParamPoint{0.7};
  CHECK(phi_estimate(r) == 0.7);
  r.argmin_state = Word{0, 1};
  CHECK_THROWS_AS(phi_estimate(r), ConfigError);
  r.argmin_state = CirclePoint{0.2};
  CHECK_THROWS_AS(phi_estimate(r), ConfigError);
}

TEST_CASE("track limit estimate") {
  const ObservationSource period2(MarkovChain{{{0.0, 1.0}, {1.0, 0.0}}}, 9);
  const auto trace = track_limit_estimate(SubshiftSFT::fixed_point(0), HammingOnLabels{}, period2, {2, 4, 8, 16});
  REQUIRE(trace.rows.size() == 4);
  for (const auto& row : trace.rows) CHECK(row.value == 0.5);
  const ObservationSource coin(IIDBinary{0.5}, 9);
  for (const auto& row : track_limit_estimate(SubshiftSFT::full_shift(2), HammingOnLabels{}, coin, {5, 50, 500}).rows)
    CHECK(row.value == 0.0);
  CHECK_THROWS(track_limit_estimate(SubshiftSFT::full_shift(2), HammingOnLabels{}, coin, {5, 5}));
}

TEST_CASE("infinite costs") {
  const CostFunction c = NegLogDensity{"point", [](double theta, double u) {
                                         return theta == u ? 0.0 : -std::numeric_limits<double>::infinity();
                                       }};
  const auto r = optimal_tracking({IdentityOnParams{0.0, 1.0}, c, Series{0.37, 0.91}, {}});
  CHECK(r.infeasible);
  const auto ok = optimal_tracking({IdentityOnParams{0.0, 1.0}, c, Series{0.5, 0.5}, {}});
  CHECK_FALSE(ok.infeasible);
  CHECK(phi_estimate(ok) == 0.5);
}

TEST_CASE("rotation cost profile matches direct evaluation") {
  const auto y = random_bits(12, 257);
  const Angle angle = Angle::real(std::sqrt(2.0) / 4);
  std::vector<double> out;
  rotation_cost_profile(angle, Partition{}, HammingOnLabels{}, y, 0.0, 1.0 / 997, 997, out);
  const TopologicalSystem rot = CircleRotation{angle, {}};
  for (std::size_t j = 0; j < out.size(); j += 13) {
    const double direct = empirical_cost(rot, HammingOnLabels{}, CirclePoint{0.0 + static_cast<double>(j) * (1.0 / 997)}, y);
    CHECK(out[j] == std::round(direct * 257));
  }
}
