#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

// Level-one joining LP for a binary SFT against an i.i.d. binary source, solved by
// enumerating every basis. Shares no code with the library's instance builder or simplex.
namespace oracle {

using Q = mpq_class;

struct SmallLp {
  std::vector<std::vector<Q>> a;
  std::vector<Q> b;
  std::vector<Q> c;
};

// Variables: (x0 x1, y0 y1) with x0 x1 allowed and y-block of positive probability.
inline SmallLp level_one_lp(const std::vector<std::vector<int>>& adj, const Q& p1,
                            const std::vector<std::vector<Q>>& cost) {
  struct Var {
    int x0, x1, y0, y1;
  };
  std::vector<Var> vars;
  auto py = [&](int s) { return s == 1 ? p1 : Q(1) - p1; };
  for (int x0 = 0; x0 < 2; ++x0)
    for (int x1 = 0; x1 < 2; ++x1)
      if (adj[x0][x1])
        for (int y0 = 0; y0 < 2; ++y0)
          for (int y1 = 0; y1 < 2; ++y1)
            if (py(y0) * py(y1) > 0) vars.push_back({x0, x1, y0, y1});
  SmallLp lp;
  for (const auto& v : vars) lp.c.push_back(cost[v.x0][v.y0]);
  for (int y0 = 0; y0 < 2; ++y0)
    for (int y1 = 0; y1 < 2; ++y1) {
      if (py(y0) * py(y1) == 0) continue;
      std::vector<Q> row;
      for (const auto& v : vars) row.push_back(v.y0 == y0 && v.y1 == y1 ? 1 : 0);
      lp.a.push_back(row);
      lp.b.push_back(py(y0) * py(y1));
    }
  lp.a.push_back(std::vector<Q>(vars.size(), 1));
  lp.b.push_back(1);
  for (int xs = 0; xs < 2; ++xs)
    for (int ys = 0; ys < 2; ++ys) {
      std::vector<Q> row;
      for (const auto& v : vars) {
        Q coef = 0;
        if (v.x0 == xs && v.y0 == ys) coef += 1;
        if (v.x1 == xs && v.y1 == ys) coef -= 1;
        row.push_back(coef);
      }
      lp.a.push_back(row);
      lp.b.push_back(0);
    }
  return lp;
}

// Solves the square system given by the columns in `basis`; empty if singular.
inline std::optional<std::vector<Q>> solve_basis(const SmallLp& lp, const std::vector<std::size_t>& rows,
                                                 const std::vector<std::size_t>& basis) {
  const std::size_t r = rows.size();
  std::vector<std::vector<Q>> m(r, std::vector<Q>(r + 1));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) m[i][j] = lp.a[rows[i]][basis[j]];
    m[i][r] = lp.b[rows[i]];
  }
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    while (piv < r && m[piv][col] == 0) ++piv;
    if (piv == r) return std::nullopt;
    std::swap(m[piv], m[col]);
    for (std::size_t i = 0; i < r; ++i) {
      if (i == col || m[i][col] == 0) continue;
      const Q f = m[i][col] / m[col][col];
      for (std::size_t j = col; j <= r; ++j) m[i][j] -= f * m[col][j];
    }
  }
  std::vector<Q> x(r);
  for (std::size_t i = 0; i < r; ++i) x[i] = m[i][r] / m[i][i];
  return x;
}

inline std::size_t rank(std::vector<std::vector<Q>> m) {
  std::size_t r = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t col = 0; col < cols && r < m.size(); ++col) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < m.size(); ++i) {
      if (m[i][col] == 0) continue;
      const Q f = m[i][col] / m[r][col];
      for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  return r;
}

// Indices of a maximal set of linearly independent rows of [A | b].
inline std::vector<std::size_t> independent_rows(const SmallLp& lp) {
  std::vector<std::vector<Q>> kept_rows;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < lp.a.size(); ++i) {
    auto trial = kept_rows;
    trial.push_back(lp.a[i]);
    trial.back().push_back(lp.b[i]);
    if (rank(trial) > kept_rows.size()) {
      kept_rows = std::move(trial);
      keep.push_back(i);
    }
  }
  return keep;
}

struct VertexResult {
  Q value;
  std::size_t vertices = 0;
};

inline VertexResult enumerate_vertices(const SmallLp& lp) {
  const auto rows = independent_rows(lp);
  const std::size_t r = rows.size();
  const std::size_t n = lp.c.size();
  VertexResult out;
  bool found = false;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(r), true);
  do {
    std::vector<std::size_t> basis;
    for (std::size_t j = 0; j < n; ++j)
      if (pick[j]) basis.push_back(j);
    const auto x = solve_basis(lp, rows, basis);
    if (!x) continue;
    if (std::any_of(x->begin(), x->end(), [](const Q& q) { return q < 0; })) continue;
    Q value = 0;
    for (std::size_t j = 0; j < r; ++j) value += lp.c[basis[j]] * (*x)[j];
    ++out.vertices;
    if (!found || value < out.value) out.value = value;
    found = true;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

}  // namespace oracle
