#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace ergtrack::joinlp {

using Rational = mpq_class;

/// min c.x  subject to  A x = b, x >= 0. A is row-major rows x cols.
template <class Scalar>
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Scalar> a;
  std::vector<Scalar> b;
  std::vector<Scalar> c;

  Scalar& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Scalar& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

enum class LpStatus { optimal, infeasible, unbounded };

template <class Scalar>
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Scalar value{};
  std::vector<Scalar> x;
  std::size_t pivots = 0;
};

/// Zero tests: exact for rationals, absolute epsilon for doubles.
template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static bool is_zero(const Rational& v) { return sgn(v) == 0; }
  static bool is_negative(const Rational& v) { return sgn(v) < 0; }
  static bool is_positive(const Rational& v) { return sgn(v) > 0; }
};

template <>
struct ScalarTraits<double> {
  static constexpr double eps = 1e-11;
  static bool is_zero(double v) { return std::abs(v) <= eps; }
  static bool is_negative(double v) { return v < -eps; }
  static bool is_positive(double v) { return v > eps; }
};

/// Two-phase primal simplex with Bland's rule (smallest entering index, smallest
/// leaving basic index on ratio ties), so it terminates on degenerate problems.
/// Redundant equality rows are detected after phase I and dropped.
template <class Scalar>
class Simplex {
  using T = ScalarTraits<Scalar>;

 public:
  explicit Simplex(const LinearProgram<Scalar>& lp) : lp_(lp) {}

  LpSolution<Scalar> solve() {
    const std::size_t m = lp_.rows;
    const std::size_t n = lp_.cols;
    if (lp_.a.size() != m * n || lp_.b.size() != m || lp_.c.size() != n)
      throw std::invalid_argument("linear program shape mismatch");

    // Tableau columns: n structural, m artificial, 1 right-hand side.
    width_ = n + m + 1;
    tab_.assign(m, std::vector<Scalar>(width_, Scalar(0)));
    basis_.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const bool flip = T::is_negative(lp_.b[i]);
      for (std::size_t j = 0; j < n; ++j) tab_[i][j] = flip ? Scalar(-lp_.at(i, j)) : lp_.at(i, j);
      tab_[i][n + i] = Scalar(1);
      tab_[i][width_ - 1] = flip ? Scalar(-lp_.b[i]) : lp_.b[i];
      basis_[i] = n + i;
    }
    active_.assign(m, true);

    LpSolution<Scalar> out;
    // Phase I: minimise the sum of artificials.
    std::vector<Scalar> phase1(n + m, Scalar(0));
    for (std::size_t j = n; j < n + m; ++j) phase1[j] = Scalar(1);
    if (!run(phase1, n + m, out.pivots)) throw std::logic_error("phase I cannot be unbounded");
    Scalar infeasibility(0);
    for (std::size_t i = 0; i < m; ++i)
      if (active_[i] && basis_[i] >= n) infeasibility += tab_[i][width_ - 1];
    if (T::is_positive(infeasibility)) {
      out.status = LpStatus::infeasible;
      return out;
    }
    // Drive remaining (zero-level) artificials out, or drop their rows as redundant.
    for (std::size_t i = 0; i < m; ++i) {
      if (!active_[i] || basis_[i] < n) continue;
      std::size_t q = n;
      for (std::size_t j = 0; j < n; ++j)
        if (!T::is_zero(tab_[i][j])) {
          q = j;
          break;
        }
      if (q == n) {
        active_[i] = false;
      } else {
        pivot(i, q);
        ++out.pivots;
      }
    }
    // Phase II on structural columns only.
    if (!run(lp_.c, n, out.pivots)) {
      out.status = LpStatus::unbounded;
      return out;
    }
    out.status = LpStatus::optimal;
    out.x.assign(n, Scalar(0));
    for (std::size_t i = 0; i < m; ++i)
      if (active_[i] && basis_[i] < n) out.x[basis_[i]] = tab_[i][width_ - 1];
    out.value = Scalar(0);
    for (std::size_t j = 0; j < n; ++j)
      if (!T::is_zero(out.x[j])) out.value += lp_.c[j] * out.x[j];
    return out;
  }

 private:
  // Minimises cost over columns [0, limit). Returns false if unbounded.
  bool run(const std::vector<Scalar>& cost, std::size_t limit, std::size_t& pivots) {
    const std::size_t m = tab_.size();
    std::vector<Scalar> reduced(limit);
    while (true) {
      // reduced_j = c_j - c_B^T B^{-1} A_j
      for (std::size_t j = 0; j < limit; ++j) reduced[j] = cost[j];
      for (std::size_t i = 0; i < m; ++i) {
        if (!active_[i]) continue;
        const Scalar& cb = basis_[i] < cost.size() ? cost[basis_[i]] : zero_;
        if (T::is_zero(cb)) continue;
        for (std::size_t j = 0; j < limit; ++j)
          if (!T::is_zero(tab_[i][j])) reduced[j] -= cb * tab_[i][j];
      }
      std::size_t q = limit;
      for (std::size_t j = 0; j < limit; ++j)
        if (T::is_negative(reduced[j])) {
          q = j;
          break;
        }
      if (q == limit) return true;
      std::size_t r = m;
      Scalar best_ratio(0);
      for (std::size_t i = 0; i < m; ++i) {
        if (!active_[i] || !T::is_positive(tab_[i][q])) continue;
        Scalar ratio = tab_[i][width_ - 1] / tab_[i][q];
        if (r == m || ratio < best_ratio || (!(best_ratio < ratio) && basis_[i] < basis_[r])) {
          r = i;
          best_ratio = ratio;
        }
      }
      if (r == m) return false;
      pivot(r, q);
      ++pivots;
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    auto& row = tab_[r];
    const Scalar inv = Scalar(1) / row[q];
    for (auto& v : row)
      if (!T::is_zero(v)) v *= inv;
    row[q] = Scalar(1);
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (i == r || !active_[i]) continue;
      auto& other = tab_[i];
      if (T::is_zero(other[q])) continue;
      const Scalar f = other[q];
      for (std::size_t j = 0; j < width_; ++j)
        if (!T::is_zero(row[j])) other[j] -= f * row[j];
      other[q] = Scalar(0);
    }
    basis_[r] = q;
  }

  const LinearProgram<Scalar>& lp_;
  std::size_t width_ = 0;
  std::vector<std::vector<Scalar>> tab_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  Scalar zero_{0};
};

template <class Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp) {
  return Simplex<Scalar>(lp).solve();
}

}  // namespace ergtrack::joinlp
