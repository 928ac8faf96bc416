#include "ergtrack/core/system.hpp"

#include <algorithm>
#include <cstdio>

#include "ergtrack/core/error.hpp"

namespace ergtrack {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SubshiftSFT::SubshiftSFT(std::size_t alphabet, std::vector<std::vector<bool>> adjacency)
    : alphabet_(alphabet), adjacency_(std::move(adjacency)) {
  if (alphabet_ == 0 || alphabet_ > 16) throw ConfigError("SFT alphabet size must be in [1,16]");
  if (adjacency_.size() != alphabet_) throw ConfigError("SFT adjacency must have one row per symbol");
  for (const auto& row : adjacency_)
    if (row.size() != alphabet_) throw ConfigError("SFT adjacency must be square");

  // Prune symbols that cannot continue forever; what is left is the support of the shift space.
  live_.assign(alphabet_, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t a = 0; a < alphabet_; ++a) {
      if (!live_[a]) continue;
      bool has_successor = false;
      for (std::size_t b = 0; b < alphabet_ && !has_successor; ++b) has_successor = adjacency_[a][b] && live_[b];
      if (!has_successor) {
        live_[a] = false;
        changed = true;
      }
    }
  }
  if (std::none_of(live_.begin(), live_.end(), [](bool v) { return v; }))
    throw ConfigError("SFT adjacency has no cycle, so the shift space is empty");
}

SubshiftSFT SubshiftSFT::full_shift(std::size_t alphabet) {
  return SubshiftSFT(alphabet, std::vector<std::vector<bool>>(alphabet, std::vector<bool>(alphabet, true)));
}

SubshiftSFT SubshiftSFT::golden_mean() { return SubshiftSFT(2, {{true, true}, {true, false}}); }

SubshiftSFT SubshiftSFT::fixed_point(Symbol symbol) {
  const std::size_t k = static_cast<std::size_t>(symbol) + 1;
  std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
  adj[symbol][symbol] = true;
  return SubshiftSFT(k, std::move(adj));
}

bool SubshiftSFT::admissible(const Word& w) const {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= alphabet_ || !live_[w[i]]) return false;
    if (i + 1 < w.size() && !adjacency_[w[i]][w[i + 1]]) return false;
  }
  return true;
}

bool SubshiftSFT::cyclically_admissible(const Word& w) const {
  return !w.empty() && admissible(w) && adjacency_[w.back()][w.front()];
}

std::vector<Word> SubshiftSFT::words(std::size_t length) const {
  std::vector<Word> out;
  if (length == 0) return {Word{}};
  Word w(length, 0);
  // Depth-first in lexicographic order.
  std::vector<std::size_t> next(length, 0);
  std::size_t depth = 0;
  while (true) {
    if (next[depth] >= alphabet_) {
      if (depth == 0) break;
      next[depth] = 0;
      --depth;
      continue;
    }
    const auto a = static_cast<Symbol>(next[depth]++);
    if (!live_[a] || (depth > 0 && !adjacency_[w[depth - 1]][a])) continue;
    w[depth] = a;
    if (depth + 1 == length) {
      out.push_back(w);
    } else {
      ++depth;
    }
  }
  return out;
}

TopologicalSystem::TopologicalSystem(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const CircleRotation& c) {
                   if (c.angle.value() < 0.0 || c.angle.value() > 0.5)
                     throw ConfigError("rotation angle must lie in [0, 1/2]");
                 },
                 [](const SubshiftSFT&) {},
                 [](const IdentityOnParams& p) {
                   if (!(p.lo <= p.hi)) throw ConfigError("parameter interval must satisfy lo <= hi");
                 },
                 [](const FiberProduct& f) {
                   if (!(f.lo <= f.hi) || f.lo < 0.0 || f.hi > 0.5)
                     throw ConfigError("fiber parameter interval must be a subinterval of [0, 1/2]");
                 },
             },
             kind_);
}

std::string TopologicalSystem::candidate_scheme() const {
  return std::visit(Overloaded{
                        [](const CircleRotation&) {
                          return std::string("u-grid over [0,1) at the candidate step, then one local refinement");
                        },
                        [](const SubshiftSFT&) {
                          return std::string("all admissible words of the horizon length (exact dynamic program)");
                        },
                        [](const IdentityOnParams&) {
                          return std::string("parameter grid over [lo,hi], then one local refinement");
                        },
                        [](const FiberProduct&) {
                          return std::string("theta-grid x u-grid, then one refinement round in both coordinates");
                        },
                    },
                    kind_);
}

void TopologicalSystem::validate(const State& x) const {
  std::visit(Overloaded{
                 [&](const CirclePoint& p) {
                   if (!as<CircleRotation>()) throw InvalidState("circle point used with a non-rotation system");
                   if (!(p.x >= 0.0 && p.x < 1.0)) throw InvalidState("circle point must lie in [0,1)");
                 },
                 [&](const Word& w) {
                   const auto* sft = as<SubshiftSFT>();
                   if (!sft) throw InvalidState("word used with a non-SFT system");
                   if (!sft->cyclically_admissible(w))
                     throw InvalidState("word violates the SFT adjacency (periodic extension included)");
                 },
                 [&](const ParamPoint& p) {
                   const auto* id = as<IdentityOnParams>();
                   if (!id) throw InvalidState("parameter point used with a non-parameter system");
                   if (p.theta < id->lo || p.theta > id->hi) throw InvalidState("parameter outside [lo,hi]");
                 },
                 [&](const FiberPoint& p) {
                   const auto* f = as<FiberProduct>();
                   if (!f) throw InvalidState("fiber point used with a non-fiber system");
                   if (p.theta.value() < f->lo || p.theta.value() > f->hi)
                     throw InvalidState("fiber parameter outside [lo,hi]");
                   if (!(p.u >= 0.0 && p.u < 1.0)) throw InvalidState("fiber generator must lie in [0,1)");
                 },
             },
             x);
}

namespace {

State advance(const TopologicalSystem& sys, const State& x, std::size_t k) {
  return std::visit(Overloaded{
                        [&](const CirclePoint& p) -> State {
                          return CirclePoint{rotate(p.x, sys.as<CircleRotation>()->angle, k)};
                        },
                        [&](const Word& w) -> State {
                          Word out(w.size());
                          const std::size_t s = k % w.size();
                          std::rotate_copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(s), w.end(), out.begin());
                          return out;
                        },
                        [&](const ParamPoint& p) -> State { return p; },
                        [&](const FiberPoint& p) -> State { return FiberPoint{p.theta, rotate(p.u, p.theta, k)}; },
                    },
                    x);
}

}  // namespace

State TopologicalSystem::step(const State& x) const {
  validate(x);
  return advance(*this, x, 1);
}

Symbol TopologicalSystem::symbol_at(const State& x, std::size_t k) const {
  return std::visit(Overloaded{
                        [&](const CirclePoint& p) -> Symbol {
                          const auto& rot = std::get<CircleRotation>(kind_);
                          return rot.partition.label_shifted(p.x, rot.angle.step(k));
                        },
                        [&](const Word& w) -> Symbol { return w[k % w.size()]; },
                        [&](const ParamPoint&) -> Symbol {
                          throw ConfigError("parameter states carry no symbol; use a parametric cost");
                        },
                        [&](const FiberPoint& p) -> Symbol {
                          return std::get<FiberProduct>(kind_).partition.label_shifted(p.u, p.theta.step(k));
                        },
                    },
                    x);
}

std::vector<State> iterate(const TopologicalSystem& system, const State& x0, std::size_t n) {
  if (n == 0) throw ConfigError("iterate needs n >= 1");
  system.validate(x0);
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(advance(system, x0, k));
  return out;
}

std::string describe(const State& x) {
  return std::visit(Overloaded{
                        [](const CirclePoint& p) { return "x=" + fmt_double(p.x); },
                        [](const Word& w) {
                          std::string s;
                          const std::size_t shown = std::min<std::size_t>(w.size(), 64);
                          for (std::size_t i = 0; i < shown; ++i) s += "0123456789abcdef"[w[i] & 15];
                          if (shown < w.size()) s += "+";
                          return s;
                        },
                        [](const ParamPoint& p) { return "theta=" + fmt_double(p.theta); },
                        [](const FiberPoint& p) { return "theta=" + p.theta.to_string() + ";u=" + fmt_double(p.u); },
                    },
                    x);
}

}  // namespace ergtrack
