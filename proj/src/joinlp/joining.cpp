#include "ergtrack/joinlp/joining.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "ergtrack/core/error.hpp"
#include "ergtrack/core/rng.hpp"

namespace ergtrack::joinlp {

namespace {

std::string word_text(const Word& w) {
  std::string s;
  for (Symbol a : w) s += "0123456789abcdef"[a & 15];
  return s;
}

Word prefix(const Word& w, std::size_t len) { return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(len)); }
Word suffix(const Word& w, std::size_t len) { return Word(w.end() - static_cast<std::ptrdiff_t>(len), w.end()); }

// All words of the given length over {0..alphabet-1}, lexicographic.
std::vector<Word> all_words(std::size_t alphabet, std::size_t length) {
  std::vector<Word> out;
  Word w(length, 0);
  while (true) {
    out.push_back(w);
    std::size_t i = length;
    while (i > 0) {
      --i;
      if (++w[i] < alphabet) break;
      w[i] = 0;
      if (i == 0) return out;
    }
    if (length == 0) return out;
  }
}

// Solves A x = b exactly (A square, nonsingular) by Gauss-Jordan elimination.
std::vector<Rational> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && sgn(a[piv][col]) == 0) ++piv;
    if (piv == n) throw ConfigError("singular system while computing a stationary law");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    const Rational inv = 1 / a[col][col];
    for (auto& v : a[col]) v *= inv;
    b[col] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || sgn(a[r][col]) == 0) continue;
      const Rational f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

Rational abs_q(const Rational& v) { return sgn(v) < 0 ? Rational(-v) : v; }

}  // namespace

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw ConfigError("cannot convert a non-finite value to a fraction");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  const std::string text(buf, res.ptr);
  std::string digits;
  long exponent = 0;
  bool negative = false;
  bool after_point = false;
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') {
    negative = true;
    ++i;
  }
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '.') {
      after_point = true;
    } else if (ch == 'e' || ch == 'E') {
      exponent += std::stol(text.substr(i + 1));
      break;
    } else {
      digits += ch;
      if (after_point) --exponent;
    }
  }
  mpz_class mant(digits.empty() ? "0" : digits, 10);
  if (negative) mant = -mant;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  Rational q = exponent >= 0 ? Rational(mant * scale) : Rational(mant, scale);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& value) { return value.get_str(); }

BlockDistribution block_distribution(const ObservationSource& source, std::size_t length) {
  if (length == 0) throw ConfigError("block length must be >= 1");
  BlockDistribution out;
  out.length = length;
  if (const auto* b = source.as<IIDBinary>()) {
    out.alphabet = 2;
    const Rational p = to_rational(b->prob);
    const Rational q = 1 - p;
    for (const auto& w : all_words(2, length)) {
      Rational prob = 1;
      for (Symbol a : w) prob *= a ? p : q;
      if (sgn(prob) > 0) out.probs.emplace(w, prob);
    }
    return out;
  }
  if (const auto* m = source.as<MarkovChain>()) {
    const std::size_t k = m->transition.size();
    out.alphabet = k;
    std::vector<std::vector<Rational>> p(k, std::vector<Rational>(k));
    for (std::size_t i = 0; i < k; ++i) {
      Rational rest = 1;
      for (std::size_t j = 0; j + 1 < k; ++j) {
        p[i][j] = to_rational(m->transition[i][j]);
        rest -= p[i][j];
      }
      if (sgn(rest) < 0) throw ConfigError("transition row " + std::to_string(i) + " exceeds 1 in exact arithmetic");
      p[i][k - 1] = rest;
    }
    // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k));
    std::vector<Rational> rhs(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) a[i][j] = p[j][i] - (i == j ? 1 : 0);
    for (std::size_t j = 0; j < k; ++j) a[k - 1][j] = 1;
    rhs[k - 1] = 1;
    const auto pi = solve_square(std::move(a), std::move(rhs));
    for (const auto& w : all_words(k, length)) {
      Rational prob = pi[w[0]];
      for (std::size_t t = 1; t < w.size() && sgn(prob) > 0; ++t) prob *= p[w[t - 1]][w[t]];
      if (sgn(prob) > 0) out.probs.emplace(w, prob);
    }
    return out;
  }
  throw ConfigError("exact block laws are available only for iid_binary and markov sources");
}

void check_shift_consistent(const BlockDistribution& blocks) {
  if (blocks.length == 0) throw ConfigError("block length must be >= 1");
  Rational total = 0;
  for (const auto& [w, pr] : blocks.probs) {
    if (w.size() != blocks.length)
      throw ConfigError("block " + word_text(w) + " has length " + std::to_string(w.size()) + ", expected " +
                        std::to_string(blocks.length));
    for (Symbol a : w)
      if (a >= blocks.alphabet) throw ConfigError("block " + word_text(w) + " uses a symbol outside the alphabet");
    if (sgn(pr) < 0) throw ConfigError("block " + word_text(w) + " has negative probability " + to_string(pr));
    total += pr;
  }
  if (total != 1) throw ConfigError("block probabilities sum to " + to_string(total) + ", not 1");
  if (blocks.length == 1) return;
  std::map<Word, Rational> left, right;
  for (const auto& [w, pr] : blocks.probs) {
    left[prefix(w, w.size() - 1)] += pr;
    right[suffix(w, w.size() - 1)] += pr;
  }
  std::set<Word> keys;
  for (const auto& [w, pr] : left) keys.insert(w);
  for (const auto& [w, pr] : right) keys.insert(w);
  for (const auto& w : keys) {
    const Rational l = left.count(w) ? left[w] : Rational(0);
    const Rational r = right.count(w) ? right[w] : Rational(0);
    if (l != r)
      throw ConfigError("blocks are not shift-consistent: P(" + word_text(w) + "*) = " + to_string(l) + " but P(*" +
                        word_text(w) + ") = " + to_string(r));
  }
}

JoiningLPInstance build_instance(const SubshiftSFT& x_sft, const BlockDistribution& y_blocks,
                                 const TabulatedCost& cost, std::size_t k, std::size_t variable_cap) {
  if (k == 0) throw ConfigError("relaxation level k must be >= 1");
  if (y_blocks.length != k + 1)
    throw ConfigError("y blocks have length " + std::to_string(y_blocks.length) + ", level k=" + std::to_string(k) +
                      " needs " + std::to_string(k + 1));
  check_shift_consistent(y_blocks);

  JoiningLPInstance inst;
  inst.x_graph = x_sft;
  inst.y_blocks = y_blocks;
  inst.k = k;
  inst.x_blocks = x_sft.words(k + 1);
  for (const auto& [w, pr] : y_blocks.probs) inst.y_words.push_back(w);
  const std::size_t count = inst.x_blocks.size() * inst.y_words.size();
  if (count > variable_cap)
    throw CapacityError("level k=" + std::to_string(k) + " needs " + std::to_string(count) +
                        " variables, above the cap of " + std::to_string(variable_cap));
  if (cost.rows() < x_sft.alphabet() || cost.cols() < y_blocks.alphabet)
    throw ConfigError("cost table is smaller than the alphabets");
  inst.cost_table.assign(x_sft.alphabet(), std::vector<Rational>(y_blocks.alphabet));
  for (std::size_t a = 0; a < x_sft.alphabet(); ++a)
    for (std::size_t b = 0; b < y_blocks.alphabet; ++b) inst.cost_table[a][b] = to_rational(cost(a, b));

  for (std::size_t i = 0; i < inst.x_blocks.size(); ++i)
    for (std::size_t j = 0; j < inst.y_words.size(); ++j) inst.variables.emplace_back(i, j);

  const std::size_t n = inst.variables.size();
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  auto var_index = [&](std::size_t i, std::size_t j) { return i * inst.y_words.size() + j; };

  for (std::size_t j = 0; j < inst.y_words.size(); ++j) {
    std::vector<Rational> row(n, 0);
    for (std::size_t i = 0; i < inst.x_blocks.size(); ++i) row[var_index(i, j)] = 1;
    rows.push_back(std::move(row));
    rhs.push_back(y_blocks.probs.at(inst.y_words[j]));
    inst.row_labels.push_back("marginal[y=" + word_text(inst.y_words[j]) + "]");
  }
  inst.marginal_rows = rows.size();
  rows.emplace_back(n, Rational(1));
  rhs.emplace_back(1);
  inst.mass_row = rows.size() - 1;
  inst.row_labels.emplace_back("mass");

  std::set<Word> y_short;
  for (const auto& w : inst.y_words) {
    y_short.insert(prefix(w, k));
    y_short.insert(suffix(w, k));
  }
  const auto x_short = x_sft.words(k);
  std::map<Word, std::size_t> x_short_index, y_short_index;
  for (std::size_t i = 0; i < x_short.size(); ++i) x_short_index[x_short[i]] = i;
  std::size_t idx = 0;
  std::vector<Word> y_short_list(y_short.begin(), y_short.end());
  for (const auto& w : y_short_list) y_short_index[w] = idx++;
  // One row per (x k-block, y k-block): inflow through prefixes equals outflow through suffixes.
  std::vector<std::vector<Rational>> shift_rows(x_short.size() * y_short_list.size(), std::vector<Rational>(n, 0));
  for (std::size_t v = 0; v < n; ++v) {
    const auto& [i, j] = inst.variables[v];
    const Word& xb = inst.x_blocks[i];
    const Word& yb = inst.y_words[j];
    const std::size_t pre = x_short_index.at(prefix(xb, k)) * y_short_list.size() + y_short_index.at(prefix(yb, k));
    const std::size_t suf = x_short_index.at(suffix(xb, k)) * y_short_list.size() + y_short_index.at(suffix(yb, k));
    shift_rows[pre][v] += 1;
    shift_rows[suf][v] -= 1;
  }
  for (std::size_t r = 0; r < shift_rows.size(); ++r) {
    if (std::all_of(shift_rows[r].begin(), shift_rows[r].end(), [](const Rational& q) { return sgn(q) == 0; }))
      continue;
    rows.push_back(std::move(shift_rows[r]));
    rhs.emplace_back(0);
    inst.row_labels.push_back("shift[x=" + word_text(x_short[r / y_short_list.size()]) +
                              ",y=" + word_text(y_short_list[r % y_short_list.size()]) + "]");
  }

  auto& lp = inst.lp;
  lp.rows = rows.size();
  lp.cols = n;
  lp.a.reserve(lp.rows * n);
  for (auto& row : rows)
    for (auto& q : row) lp.a.push_back(std::move(q));
  lp.b = std::move(rhs);
  lp.c.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& [i, j] = inst.variables[v];
    lp.c[v] = inst.cost_table[inst.x_blocks[i][0]][inst.y_words[j][0]];
  }
  return inst;
}

std::pair<Rational, Rational> residuals(const JoiningLPInstance& inst, const std::vector<Rational>& x) {
  Rational marginal = 0, shift = 0;
  for (std::size_t r = 0; r < inst.lp.rows; ++r) {
    Rational acc = -inst.lp.b[r];
    for (std::size_t v = 0; v < inst.lp.cols; ++v)
      if (sgn(inst.lp.at(r, v)) != 0 && sgn(x[v]) != 0) acc += inst.lp.at(r, v) * x[v];
    acc = abs_q(acc);
    auto& slot = r <= inst.mass_row ? marginal : shift;
    if (acc > slot) slot = acc;
  }
  return {marginal, shift};
}

Rational objective(const JoiningLPInstance& inst, const std::vector<Rational>& x) {
  Rational acc = 0;
  for (std::size_t v = 0; v < inst.lp.cols; ++v)
    if (sgn(x[v]) != 0) acc += inst.lp.c[v] * x[v];
  return acc;
}

std::vector<Rational> product_witness(const JoiningLPInstance& inst) {
  const auto& sft = inst.x_graph;
  // Follow smallest live successors from the smallest live symbol until a symbol repeats.
  std::vector<Symbol> path;
  std::vector<std::ptrdiff_t> seen_at(sft.alphabet(), -1);
  Symbol a = 0;
  while (!sft.live()[a]) ++a;
  while (seen_at[a] < 0) {
    seen_at[a] = static_cast<std::ptrdiff_t>(path.size());
    path.push_back(a);
    Symbol b = 0;
    while (!(sft.allowed(a, b) && sft.live()[b])) ++b;
    a = b;
  }
  const Word cycle(path.begin() + seen_at[a], path.end());
  const std::size_t period = cycle.size();
  std::map<Word, Rational> mu;
  for (std::size_t s = 0; s < period; ++s) {
    Word block(inst.k + 1);
    for (std::size_t t = 0; t <= inst.k; ++t) block[t] = cycle[(s + t) % period];
    mu[block] += Rational(1, static_cast<unsigned long>(period));
  }
  std::vector<Rational> x(inst.variables.size(), 0);
  for (std::size_t v = 0; v < x.size(); ++v) {
    const auto& [i, j] = inst.variables[v];
    const auto it = mu.find(inst.x_blocks[i]);
    if (it != mu.end()) x[v] = it->second * inst.y_blocks.probs.at(inst.y_words[j]);
  }
  return x;
}

JoiningLPResult solve(const JoiningLPInstance& inst, SolveMode mode) {
  JoiningLPResult out;
  out.mode = mode;
  const auto witness = product_witness(inst);
  const auto [wm, ws] = residuals(inst, witness);
  if (sgn(wm) != 0 || sgn(ws) != 0) throw std::logic_error("product witness is infeasible; instance is malformed");
  out.product_value = objective(inst, witness);

  if (mode == SolveMode::rational) {
    auto sol = solve_lp(inst.lp);
    out.status = sol.status;
    out.pivots = sol.pivots;
    if (sol.status != LpStatus::optimal) return out;
    out.value = sol.value;
    out.value_float = sol.value.get_d();
    out.measure = std::move(sol.x);
    for (const auto& q : out.measure) out.measure_float.push_back(q.get_d());
    const auto [m, s] = residuals(inst, out.measure);
    out.marginal_residual = m.get_d();
    out.stationarity_residual = s.get_d();
    return out;
  }

  LinearProgram<double> lp;
  lp.rows = inst.lp.rows;
  lp.cols = inst.lp.cols;
  for (const auto& q : inst.lp.a) lp.a.push_back(q.get_d());
  for (const auto& q : inst.lp.b) lp.b.push_back(q.get_d());
  for (const auto& q : inst.lp.c) lp.c.push_back(q.get_d());
  auto sol = solve_lp(lp);
  out.status = sol.status;
  out.pivots = sol.pivots;
  if (sol.status != LpStatus::optimal) return out;
  out.value_float = sol.value;
  out.value = to_rational(sol.value);
  out.measure_float = sol.x;
  for (std::size_t r = 0; r < lp.rows; ++r) {
    double acc = -lp.b[r];
    for (std::size_t v = 0; v < lp.cols; ++v) acc += lp.a[r * lp.cols + v] * sol.x[v];
    auto& slot = r <= inst.mass_row ? out.marginal_residual : out.stationarity_residual;
    slot = std::max(slot, std::abs(acc));
  }
  return out;
}

std::vector<Rational> relaxation_ladder(const SubshiftSFT& x_sft, const BlockFamily& y_blocks,
                                        const TabulatedCost& cost, std::size_t k_max, std::size_t variable_cap) {
  if (k_max == 0) throw ConfigError("k_max must be >= 1");
  std::vector<Rational> values;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto inst = build_instance(x_sft, y_blocks(k + 1), cost, k, variable_cap);
    const auto res = solve(inst, SolveMode::rational);
    if (res.status != LpStatus::optimal) throw ConfigError("level k=" + std::to_string(k) + " is infeasible");
    values.push_back(res.value);
  }
  return values;
}

FaceReport optimal_face_probe(const JoiningLPInstance& inst, const JoiningLPResult& solved, std::size_t n_vertices,
                              std::uint64_t seed) {
  if (solved.status != LpStatus::optimal) throw ConfigError("face probe needs a solved, feasible instance");
  JoiningLPResult exact = solved;
  if (exact.measure.empty()) exact = solve(inst, SolveMode::rational);

  FaceReport report;
  report.vertices.push_back(exact.measure);

  // Optimal face: the original rows plus c.x = optimum.
  LinearProgram<Rational> face = inst.lp;
  face.rows += 1;
  face.a.insert(face.a.end(), inst.lp.c.begin(), inst.lp.c.end());
  face.b.push_back(exact.value);
  CounterRng rng(seed, 0x66616365);  // "face"
  const std::size_t attempts = 8 * std::max<std::size_t>(n_vertices, 1);
  for (std::size_t t = 0; t < attempts && report.vertices.size() < n_vertices; ++t) {
    for (auto& q : face.c) q = static_cast<long>(rng.below(7)) - 3;
    const auto sol = solve_lp(face);
    if (sol.status != LpStatus::optimal) continue;
    if (std::find(report.vertices.begin(), report.vertices.end(), sol.x) == report.vertices.end())
      report.vertices.push_back(sol.x);
  }

  report.worst_gap = 0;
  for (std::size_t i = 0; i < report.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < report.vertices.size(); ++j) {
      std::vector<Rational> mid(inst.lp.cols);
      bool nonneg = true;
      for (std::size_t v = 0; v < mid.size(); ++v) {
        mid[v] = (report.vertices[i][v] + report.vertices[j][v]) / 2;
        nonneg = nonneg && sgn(mid[v]) >= 0;
      }
      const auto [m, s] = residuals(inst, mid);
      const Rational gap = abs_q(objective(inst, mid) - exact.value);
      for (const Rational* g : {&m, &s, &gap})
        if (*g > report.worst_gap) report.worst_gap = *g;
      const bool ok = nonneg && report.worst_gap.get_d() <= 1e-9;
      report.convex = report.convex && ok;
      ++report.midpoints_checked;
    }
  }
  if (report.singleton()) {
    report.summary = "singleton face";
  } else {
    report.summary = std::to_string(report.vertices.size()) + " optimal vertices, " +
                     std::to_string(report.midpoints_checked) + " midpoints " +
                     (report.convex ? "feasible and optimal" : "FAILED");
  }
  return report;
}

}  // namespace ergtrack::joinlp
