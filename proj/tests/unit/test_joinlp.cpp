#include <doctest.h>

#include <string>

#include "../oracles/vertex_enum.hpp"
#include "ergtrack/core/error.hpp"
#include "ergtrack/joinlp/joining.hpp"
#include "ergtrack/tracking/tracking.hpp"

using namespace ergtrack;
using namespace ergtrack::joinlp;

namespace {

const TabulatedCost kHamming({{0, 1}, {1, 0}});

BlockDistribution coin_blocks(std::size_t len, double p = 0.5) {
  return block_distribution(ObservationSource(IIDBinary{p}, 1), len);
}

JoiningLPInstance instance(const SubshiftSFT& sft, const ObservationSource& src, const TabulatedCost& cost,
                           std::size_t k) {
  return build_instance(sft, block_distribution(src, k + 1), cost, k);
}

}  // namespace

TEST_CASE("rational conversion reads the shortest decimal") {
  CHECK(to_rational(0.9) == Rational(9, 10));
  CHECK(to_rational(0.25) == Rational(1, 4));
  CHECK(to_rational(-3.0) == Rational(-3));
  CHECK(to_string(Rational(5, 32)) == "5/32");
}

TEST_CASE("simplex on small programs") {
  // min -x - y  s.t.  x + y + s = 4,  x + 3y + t = 6
  LinearProgram<Rational> lp;
  lp.rows = 2;
  lp.cols = 4;
  lp.a = {1, 1, 1, 0, 1, 3, 0, 1};
  lp.b = {4, 6};
  lp.c = {-1, -1, 0, 0};
  const auto s = solve_lp(lp);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.value == -4);
  LinearProgram<Rational> bad = lp;
  bad.b = {-1, 6};
  bad.a = {1, 1, 1, 0, 1, 3, 0, 1};
  CHECK(solve_lp(bad).status == LpStatus::infeasible);
  LinearProgram<Rational> open;
  open.rows = 1;
  open.cols = 2;
  open.a = {1, -1};
  open.b = {0};
  open.c = {-1, 0};
  CHECK(solve_lp(open).status == LpStatus::unbounded);
}

TEST_CASE("block distributions") {
  const auto coin = coin_blocks(3);
  CHECK(coin.probs.size() == 8);
  for (const auto& [w, p] : coin.probs) CHECK(p == Rational(1, 8));
  const ObservationSource chain(MarkovChain{{{0.9, 0.1}, {0.3, 0.7}}}, 1);
  const auto b = block_distribution(chain, 2);
  CHECK(b.probs.at(Word{0, 1}) == Rational(3, 4) * Rational(1, 10));
  CHECK(b.probs.at(Word{1, 1}) == Rational(1, 4) * Rational(7, 10));
  CHECK_NOTHROW(check_shift_consistent(b));
  CHECK_THROWS_AS(block_distribution(ObservationSource(IIDGaussian{}, 1), 2), ConfigError);
}

TEST_CASE("inconsistent blocks are rejected") {
  BlockDistribution bad;
  bad.length = 2;
  bad.alphabet = 2;
  bad.probs = {{Word{0, 0}, Rational(1, 2)}, {Word{0, 1}, Rational(1, 2)}};
  CHECK_THROWS_WITH_AS(check_shift_consistent(bad), doctest::Contains("shift-consistent"), ConfigError);
  CHECK_THROWS_AS(build_instance(SubshiftSFT::golden_mean(), bad, kHamming, 1), ConfigError);
  bad.probs = {{Word{0, 0}, Rational(1, 2)}, {Word{1, 1}, Rational(1, 4)}};
  CHECK_THROWS_AS(check_shift_consistent(bad), ConfigError);
}

TEST_CASE("variable counts") {
  CHECK(build_instance(SubshiftSFT::fixed_point(0), coin_blocks(2), kHamming, 1).variable_count() == 2 * 2);
  const auto gm = build_instance(SubshiftSFT::golden_mean(), coin_blocks(2), kHamming, 1);
  CHECK(gm.variable_count() == 3 * 4);
  CHECK(gm.x_blocks == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}});
  const ObservationSource period2(MarkovChain{{{0.0, 1.0}, {1.0, 0.0}}}, 1);
  CHECK(instance(SubshiftSFT::fixed_point(0), period2, kHamming, 1).variable_count() == 2);
}

TEST_CASE("forced value of the fixed point against a period-two source") {
  const ObservationSource period2(MarkovChain{{{0.0, 1.0}, {1.0, 0.0}}}, 1);
  const auto inst = instance(SubshiftSFT::fixed_point(0), period2, kHamming, 1);
  const auto r = solve(inst);
  CHECK(r.status == LpStatus::optimal);
  CHECK(r.value == Rational(1, 2));
  const auto face = optimal_face_probe(inst, r, 4);
  CHECK(face.singleton());
  CHECK(face.summary == "singleton face");
}

TEST_CASE("cost that ignores the reference") {
  const TabulatedCost f({{2, 5}, {2, 5}});
  const auto inst = instance(SubshiftSFT::golden_mean(), ObservationSource(IIDBinary{0.3}, 1), f, 2);
  const auto r = solve(inst);
  CHECK(r.value == Rational(29, 10));
  CHECK(r.product_value == r.value);
  const auto face = optimal_face_probe(inst, r, 5);
  CHECK(face.convex);
  CHECK(face.worst_gap == 0);
}

TEST_CASE("simplex agrees with exhaustive vertex enumeration") {
  const std::vector<std::vector<int>> golden{{1, 1}, {1, 0}};
  struct Case {
    double p;
    std::vector<std::vector<double>> cost;
  };
  const std::vector<Case> cases{{0.5, {{0, 1}, {1, 0}}}, {0.3, {{0, 1}, {1, 0}}}, {0.5, {{1, 1}, {0, 0}}},
                                {0.7, {{0, 2}, {3, 1}}}};
  for (const auto& c : cases) {
    std::vector<std::vector<oracle::Q>> q(2, std::vector<oracle::Q>(2));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) q[a][b] = to_rational(c.cost[a][b]);
    const auto lp = oracle::level_one_lp(golden, to_rational(c.p), q);
    const auto brute = oracle::enumerate_vertices(lp);
    CHECK(brute.vertices > 0);
    const auto r = solve(build_instance(SubshiftSFT::golden_mean(), coin_blocks(2, c.p), TabulatedCost(c.cost), 1));
    CHECK(r.value == brute.value);
  }
}

TEST_CASE("golden mean against a fair coin") {
  const auto inst = build_instance(SubshiftSFT::golden_mean(), coin_blocks(2), kHamming, 1);
  const auto r = solve(inst);
  CHECK(r.value == Rational(1, 8));
  const auto [marginal, stationary] = residuals(inst, r.measure);
  CHECK(marginal == 0);
  CHECK(stationary == 0);
  CHECK(objective(inst, r.measure) == r.value);
  const auto witness = product_witness(inst);
  const auto [wm, ws] = residuals(inst, witness);
  CHECK(wm == 0);
  CHECK(ws == 0);
  CHECK(objective(inst, witness) >= r.value);
  const auto f = solve(inst, SolveMode::floating);
  CHECK(f.value_float == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(f.stationarity_residual <= 1e-9);
}

TEST_CASE("relaxation ladders") {
  const BlockFamily coin = [](std::size_t len) { return coin_blocks(len); };
  for (const auto& v : relaxation_ladder(SubshiftSFT::full_shift(2), coin, kHamming, 3)) CHECK(v == 0);
  for (const auto& v : relaxation_ladder(SubshiftSFT::fixed_point(0), coin, kHamming, 3)) CHECK(v == Rational(1, 2));
  const auto gm = relaxation_ladder(SubshiftSFT::golden_mean(), coin, kHamming, 3);
  REQUIRE(gm.size() == 3);
  CHECK(gm[0] <= gm[1]);
  CHECK(gm[1] <= gm[2]);
  // The true value 1/6 bounds every relaxation from above.
  for (const auto& v : gm) CHECK(v <= Rational(1, 6));
}

TEST_CASE("variable cap") {
  const BlockFamily coin = [](std::size_t len) { return coin_blocks(len); };
  try {
    relaxation_ladder(SubshiftSFT::full_shift(2), coin, kHamming, 6, 100);
    FAIL("expected a capacity error");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("variables") != std::string::npos);
  }
}

TEST_CASE("symmetric instance has a convex optimal face") {
  const TabulatedCost zero_costs({{1, 1}, {0, 0}});
  const auto inst = build_instance(SubshiftSFT::golden_mean(), coin_blocks(2), zero_costs, 1);
  const auto r = solve(inst);
  CHECK(r.value == Rational(1, 2));
  const auto face = optimal_face_probe(inst, r, 6);
  CHECK(face.vertices.size() >= 2);
  CHECK(face.midpoints_checked >= 1);
  CHECK(face.convex);
  CHECK(face.worst_gap == 0);
}

TEST_CASE("tracking values sit above the first relaxation") {
  const auto c1 = solve(build_instance(SubshiftSFT::golden_mean(), coin_blocks(2), kHamming, 1)).value.get_d();
  const ObservationSource coin(IIDBinary{0.5}, 31);
  const auto trace = tracking::track_limit_estimate(SubshiftSFT::golden_mean(), HammingOnLabels{}, coin,
                                                    {256, 1024, 4096, 16384});
  CHECK(trace.rows.back().value >= c1 - 1e-9);
  CHECK(trace.rows.back().value <= c1 + 0.05);
}
