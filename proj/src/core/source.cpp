#include "ergtrack/core/source.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "ergtrack/core/error.hpp"
#include "ergtrack/core/rng.hpp"

namespace ergtrack {

namespace {

constexpr std::uint64_t kFlipStream = 0x666c6970;  // "flip"

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_markov(const std::vector<std::vector<double>>& p) {
  const std::size_t k = p.size();
  if (k == 0) throw ConfigError("Markov chain needs at least one state");
  for (std::size_t i = 0; i < k; ++i) {
    if (p[i].size() != k) throw ConfigError("transition matrix must be square");
    double sum = 0.0;
    for (double v : p[i]) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("transition matrix row " + std::to_string(i) + " has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("transition matrix row " + std::to_string(i) + " sums to " + std::to_string(sum) + ", not 1");
  }
  // Irreducible iff every state reaches every other along positive entries.
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<bool> seen(k, false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < k; ++b)
        if (p[a][b] > 0.0 && !seen[b]) {
          seen[b] = true;
          stack.push_back(b);
        }
    }
    for (std::size_t b = 0; b < k; ++b)
      if (!seen[b]) throw ConfigError("transition matrix is reducible (state " + std::to_string(b) +
                                      " unreachable from " + std::to_string(s) + ")");
  }
}

std::size_t draw_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

ObservationSource::ObservationSource(Kind kind, std::uint64_t seed) : kind_(std::move(kind)), seed_(seed) {
  std::visit(Overloaded{
                 [](const MarkovChain& m) { check_markov(m.transition); },
                 [](const IIDBinary& b) {
                   if (!(b.prob >= 0.0 && b.prob <= 1.0)) throw ConfigError("success probability must lie in [0,1]");
                 },
                 [](const RotationOrbit& r) {
                   if (r.init && !(*r.init >= 0.0 && *r.init < 1.0))
                     throw ConfigError("rotation orbit init must lie in [0,1)");
                 },
                 [](const NoisyLabelChannel& c) {
                   if (!c.base) throw ConfigError("noisy label channel needs a base source");
                   if (!(c.flip >= 0.0 && c.flip < 0.5)) throw ConfigError("flip probability must lie in [0, 1/2)");
                   if (c.base->as<IIDGaussian>() || c.base->as<SignedCoin>())
                     throw ConfigError("noisy label channel needs a label or point-valued base source");
                 },
                 [](const IIDGaussian& g) {
                   if (!(g.sd > 0.0) || !std::isfinite(g.mean)) throw ConfigError("gaussian source needs sd > 0");
                 },
                 [](const SignedCoin&) {},
             },
             kind_);
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition) {
  check_markov(transition);
  const auto k = static_cast<Eigen::Index>(transition.size());
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = transition[j][i] - (i == j ? 1.0 : 0.0);
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + k};
}

Series sample(const ObservationSource& source, std::size_t n) {
  if (n == 0) throw ConfigError("sample needs n >= 1");
  Series out;
  out.reserve(n);
  CounterRng rng(source.seed());
  std::visit(Overloaded{
                 [&](const MarkovChain& m) {
                   const auto pi = stationary_distribution(m.transition);
                   std::size_t state = draw_index(pi, rng.uniform());
                   out.push_back(static_cast<double>(state));
                   for (std::size_t i = 1; i < n; ++i) {
                     state = draw_index(m.transition[state], rng.uniform());
                     out.push_back(static_cast<double>(state));
                   }
                 },
                 [&](const IIDBinary& b) {
                   for (std::size_t i = 0; i < n; ++i) out.push_back(rng.bernoulli(b.prob) ? 1.0 : 0.0);
                 },
                 [&](const RotationOrbit& r) {
                   double u;
                   if (r.init) {
                     u = *r.init;
                   } else if (r.angle.exact()) {
                     const auto den = static_cast<std::uint64_t>(r.angle.den());
                     u = static_cast<double>(rng.below(den)) / static_cast<double>(den);
                   } else {
                     u = rng.uniform();
                   }
                   for (std::size_t i = 0; i < n; ++i) out.push_back(rotate(u, r.angle, i));
                 },
                 [&](const NoisyLabelChannel& c) {
                   const Series base = sample(*c.base, n);
                   const bool points = c.base->as<RotationOrbit>() != nullptr;
                   CounterRng flips(source.seed(), kFlipStream);
                   for (std::size_t i = 0; i < n; ++i) {
                     int label = points ? c.partition.label(base[i]) : static_cast<int>(base[i]);
                     if (label != 0 && label != 1) throw ConfigError("noisy label channel needs a binary base");
                     if (flips.bernoulli(c.flip)) label ^= 1;
                     out.push_back(static_cast<double>(label));
                   }
                 },
                 [&](const IIDGaussian& g) {
                   for (std::size_t i = 0; i < n; ++i) out.push_back(g.mean + g.sd * rng.normal());
                 },
                 [&](const SignedCoin&) {
                   for (std::size_t i = 0; i < n; ++i) out.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
                 },
             },
             source.kind());
  return out;
}

Word to_word(const Series& values) {
  Word w;
  w.reserve(values.size());
  for (double v : values) {
    if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v))
      throw InvalidState("observation " + std::to_string(v) + " is not a symbol");
    w.push_back(static_cast<Symbol>(v));
  }
  return w;
}

Series to_series(const Word& word) { return Series(word.begin(), word.end()); }

}  // namespace ergtrack
