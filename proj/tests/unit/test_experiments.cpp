#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ergtrack/core/config.hpp"
#include "ergtrack/core/error.hpp"
#include "ergtrack/experiments/experiments.hpp"
#include "ergtrack/joinlp/joining.hpp"

using namespace ergtrack;
using namespace ergtrack::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ergtrack-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kTrack = R"(schema = ergtrack-config/1

[experiment]
kind = track
seed = 5

[reference]
kind = golden_mean

[source]
kind = iid_binary
prob = 0.5

[cost]
kind = hamming

[track]
schedule = 16 64 256
)";

const char* kQuantid = R"(schema = ergtrack-config/1

[experiment]
kind = quantid
seed = 9

[quantid]
theta_star = 0.3
p = 0.1
n = 2000
theta_step = 0.01
u_step = 0.01

[checks]
abs_error_max = 0.05
)";

const char* kJoin = R"(schema = ergtrack-config/1

[experiment]
kind = joinlp
seed = 1

[reference]
kind = golden_mean

[source]
kind = iid_binary
prob = 0.5

[cost]
kind = hamming

[joinlp]
k_max = 1
)";

RunOptions opts(const fs::path& out, unsigned threads = 1) {
  RunOptions o;
  o.out = out;
  o.exec.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("config parsing diagnostics") {
  CHECK_THROWS_WITH_AS(Config::parse("[a]\nx = 1\n"), doctest::Contains("schema"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("schema = ergtrack-config/1\n[a]\nnonsense line\n"), doctest::Contains("3"),
                       ConfigError);
  auto c = Config::parse("schema = ergtrack-config/1\n[a]\nx = 1\ny = 2\n");
  CHECK(c.section("a").get_double("x") == 1.0);
  CHECK_THROWS_WITH_AS(c.finish(), doctest::Contains("y"), ConfigError);
}

TEST_CASE("minimal track run writes one csv and a manifest") {
  const auto out = scratch("track");
  const auto m = run(Config::parse(kTrack), opts(out));
  CHECK(m.outputs == std::vector<std::string>{"trace.csv"});
  CHECK(m.passed());
  const auto csv = slurp(out / "trace.csv");
  CHECK(csv.rfind("n,argmin_id,theta_hat,value\n16,", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["kind"] == "track");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["outputs"].size() == 1);
}

TEST_CASE("missing seed is named") {
  std::string text = kTrack;
  text.erase(text.find("seed = 5\n"), 9);
  CHECK_THROWS_WITH_AS(run(Config::parse(text), opts(scratch("noseed"))), doctest::Contains("seed"), ConfigError);
}

TEST_CASE("unknown kind lists the registry") {
  std::string text = kTrack;
  text.replace(text.find("kind = track"), 12, "kind = trak");
  CHECK_THROWS_WITH_AS(run(Config::parse(text), opts(scratch("kind"))), doctest::Contains("quantid"), ConfigError);
}

TEST_CASE("unknown keys and metrics are rejected") {
  std::string text = kTrack;
  text += "shedule = 5\n";
  CHECK_THROWS_WITH_AS(run(Config::parse(text), opts(scratch("typo"))), doctest::Contains("shedule"), ConfigError);
  std::string bad_check = kTrack;
  bad_check += "\n[checks]\nvalu_max = 1\n";
  CHECK_THROWS_WITH_AS(run(Config::parse(bad_check), opts(scratch("metric"))), doctest::Contains("valu"),
                       ConfigError);
}

TEST_CASE("subcommand kind must match") {
  auto o = opts(scratch("mismatch"));
  o.expected_kind = "mle";
  CHECK_THROWS_AS(run(Config::parse(kTrack), o), ConfigError);
}

TEST_CASE("failing checks fail the run") {
  std::string text = kTrack;
  text += "\n[checks]\nfinal_value_max = -1\n";
  const auto m = run(Config::parse(text), opts(scratch("fail")));
  CHECK_FALSE(m.passed());
  REQUIRE(m.checks.size() == 1);
  CHECK(m.checks[0].op == "<=");
}

TEST_CASE("outputs are byte identical across thread counts") {
  const auto a = scratch("rep1");
  const auto b = scratch("rep4");
  run(Config::parse(kQuantid), opts(a, 1));
  run(Config::parse(kQuantid), opts(b, 4));
  CHECK(slurp(a / "estimate.csv") == slurp(b / "estimate.csv"));
  CHECK(slurp(a / "config.ini") == slurp(b / "config.ini"));
}

TEST_CASE("seed override changes the data") {
  const auto a = scratch("seedA");
  const auto b = scratch("seedB");
  auto o = opts(b);
  o.seed = 10;
  const auto ma = run(Config::parse(kQuantid), opts(a));
  const auto mb = run(Config::parse(kQuantid), o);
  CHECK(mb.seed == 10);
  CHECK(ma.config_hash != mb.config_hash);
}

TEST_CASE("sweep over the noise level") {
  const auto out = scratch("sweep");
  const auto ms = sweep(Config::parse(kQuantid), "quantid.p", {"0", "0.1", "0.2"}, opts(out));
  REQUIRE(ms.size() == 3);
  CHECK(ms[0].seed != ms[1].seed);
  const auto summary = slurp(out / "summary.csv");
  std::size_t lines = 0;
  for (char ch : summary) lines += ch == '\n';
  CHECK(lines == 4);
  CHECK(summary.rfind("quantid.p,seed,passed,", 0) == 0);
}

TEST_CASE("sweep over k reproduces the relaxation ladder") {
  const auto out = scratch("ladder");
  const auto ms = sweep(Config::parse(kJoin), "joinlp.k_max", {"1", "2", "3"}, opts(out));
  const joinlp::BlockFamily coin = [](std::size_t len) {
    return joinlp::block_distribution(ObservationSource(IIDBinary{0.5}, 1), len);
  };
  const auto ladder = joinlp::relaxation_ladder(SubshiftSFT::golden_mean(), coin, TabulatedCost({{0, 1}, {1, 0}}), 3);
  for (std::size_t k = 1; k <= 3; ++k) CHECK(ms[k - 1].metrics.at("c" + std::to_string(k)) == ladder[k - 1].get_d());
}

TEST_CASE("sweep rejects non-numeric axes") {
  CHECK_THROWS_AS(sweep(Config::parse(kTrack), "cost.kind", {"1"}, opts(scratch("axis"))), ConfigError);
  CHECK_THROWS_AS(sweep(Config::parse(kTrack), "track.nothing", {"1"}, opts(scratch("axis"))), ConfigError);
  CHECK_THROWS_AS(sweep(Config::parse(kJoin), "joinlp.k_max", {"two"}, opts(scratch("axis"))), ConfigError);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3u) == 3);
  CHECK_THROWS(resolve_threads(0u));
  ::setenv(kThreadsEnv, "5", 1);
  CHECK(resolve_threads(std::nullopt) == 5);
  CHECK(resolve_threads(2u) == 2);
  ::setenv(kThreadsEnv, "x", 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt), ConfigError);
  ::unsetenv(kThreadsEnv);
  CHECK(resolve_threads(std::nullopt) == 1);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456789.123456789, -2.5}) CHECK(std::stod(format_double(v)) == v);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("svg plot is well formed") {
  const auto svg = line_plot_svg("t", "x", "y", {{1, 1}, {10, 0.1}, {100, 0.01}}, true, true);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("random superadditivity instances") {
  const auto rows = superadditivity_instances(1, 100, 10);
  CHECK(rows.size() == 100);
  for (const auto& r : rows) {
    CHECK(r.holds);
    CHECK(r.slack >= -1e-12);
    CHECK((r.m >= 1 && r.m <= 10 && r.n >= 1 && r.n <= 10));
  }
  const auto again = superadditivity_instances(1, 100, 10);
  CHECK(again[37].whole == rows[37].whole);
}
