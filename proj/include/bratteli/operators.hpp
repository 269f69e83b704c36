#pragma once

// The averaging operator L, its adjoint L* on level measures, projected vertex
// measures mu_v^k, the Martin kernel, and cotransition (Markov) matrices.

#include "graph.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bratteli {

template <Scalar S>
struct LevelFunction {
  std::size_t level = 0;
  std::vector<S> values;
};

template <Scalar S>
struct LevelMeasure {
  std::size_t level = 0;
  std::vector<S> weights;

  static LevelMeasure delta(std::size_t level, std::size_t size, std::size_t index) {
    LevelMeasure m{level, std::vector<S>(size, S(0))};
    m.weights.at(index) = S(1);
    return m;
  }

  S total() const {
    Accumulator<S> acc;
    for (const S& w : weights) acc.add(w);
    return acc.value();
  }

  bool is_probability() const {
    return std::all_of(weights.begin(), weights.end(), [](const S& w) { return !(w < 0); }) && is_one(total());
  }

  friend bool operator==(const LevelMeasure&, const LevelMeasure&) = default;
};

inline LevelMeasure<double> to_float(const LevelMeasure<Rational>& m) {
  LevelMeasure<double> out{m.level, {}};
  out.weights.reserve(m.weights.size());
  for (const Rational& q : m.weights) out.weights.push_back(q.get_d());
  return out;
}

/// Column-stochastic matrix from level `source` down to level `target`
/// (source > target). Column v lists a probability vector on the target
/// level, stored sparsely with ascending row indices.
template <Scalar S>
class MarkovMatrix {
 public:
  MarkovMatrix() = default;
  MarkovMatrix(std::size_t target_level, std::size_t source_level, std::size_t target_size)
      : target_level_(target_level), source_level_(source_level), target_size_(target_size) {}

  std::size_t target_level() const { return target_level_; }
  std::size_t source_level() const { return source_level_; }
  std::size_t target_size() const { return target_size_; }
  std::size_t source_size() const { return offsets_.size() - 1; }

  /// Appends the next column; entries must be sorted by row and nonzero.
  void push_column(std::span<const std::pair<std::size_t, S>> entries) {
    for (const auto& [r, x] : entries) {
      rows_.push_back(r);
      values_.push_back(x);
    }
    offsets_.push_back(rows_.size());
  }

  std::span<const std::size_t> column_rows(std::size_t v) const {
    return {rows_.data() + offsets_.at(v), rows_.data() + offsets_.at(v + 1)};
  }
  std::span<const S> column_values(std::size_t v) const {
    return {values_.data() + offsets_.at(v), values_.data() + offsets_.at(v + 1)};
  }

  S at(std::size_t u, std::size_t v) const {
    const auto rows = column_rows(v);
    const auto it = std::lower_bound(rows.begin(), rows.end(), u);
    if (it == rows.end() || *it != u) return S(0);
    return column_values(v)[static_cast<std::size_t>(it - rows.begin())];
  }

  /// Dense copy of column v.
  std::vector<S> column(std::size_t v) const {
    std::vector<S> out(target_size_, S(0));
    const auto rows = column_rows(v);
    const auto vals = column_values(v);
    for (std::size_t k = 0; k < rows.size(); ++k) out[rows[k]] = vals[k];
    return out;
  }

  LevelMeasure<S> apply(const LevelMeasure<S>& mu) const {
    if (mu.level != source_level_ || mu.weights.size() != source_size()) {
      throw std::invalid_argument("measure does not live on the matrix source level");
    }
    LevelMeasure<S> out{target_level_, std::vector<S>(target_size_, S(0))};
    for (std::size_t v = 0; v < source_size(); ++v) {
      if (is_zero(mu.weights[v])) continue;
      const auto rows = column_rows(v);
      const auto vals = column_values(v);
      for (std::size_t k = 0; k < rows.size(); ++k) out.weights[rows[k]] += vals[k] * mu.weights[v];
    }
    return out;
  }

  friend bool operator==(const MarkovMatrix&, const MarkovMatrix&) = default;

 private:
  std::size_t target_level_ = 0;
  std::size_t source_level_ = 0;
  std::size_t target_size_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> rows_;
  std::vector<S> values_;
};

namespace detail {

/// Dense accumulator with a touched list, reused across columns.
template <Scalar S>
class SparseScratch {
 public:
  explicit SparseScratch(std::size_t size) : values_(size, S(0)), mark_(size, 0) {}

  void add(std::size_t i, const S& x) {
    if (!mark_[i]) {
      mark_[i] = 1;
      touched_.push_back(i);
    }
    values_[i] += x;
  }

  /// Moves the accumulated entries out (sorted by index) and clears.
  std::vector<std::pair<std::size_t, S>> drain() {
    std::sort(touched_.begin(), touched_.end());
    std::vector<std::pair<std::size_t, S>> out;
    out.reserve(touched_.size());
    for (std::size_t i : touched_) {
      if (!is_zero(values_[i])) out.emplace_back(i, values_[i]);
      values_[i] = S(0);
      mark_[i] = 0;
    }
    touched_.clear();
    return out;
  }

 private:
  std::vector<S> values_;
  std::vector<char> mark_;
  std::vector<std::size_t> touched_;
};

inline void check_level(std::size_t level, std::size_t depth, const char* what) {
  if (level > depth) {
    throw std::out_of_range(std::string(what) + ": level " + std::to_string(level) + " beyond depth " + std::to_string(depth));
  }
}

/// Exact iterated L* on a common-denominator integer vector. Every step
/// scales by the lcm of the cotransition denominators it touches and then
/// strips the gcd, so no per-entry rational normalization is paid.
template <EquippedGraphLike G>
std::vector<Rational> project_exact(const G& g, std::size_t level, const std::vector<Rational>& weights, std::size_t target) {
  Integer den = 1;
  for (const Rational& w : weights) {
    if (sgn(w) != 0) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), w.get_den_mpz_t());
  }
  std::vector<Integer> num(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (sgn(weights[i]) != 0) num[i] = weights[i].get_num() * (den / weights[i].get_den());
  }
  Integer step_den, scaled;
  for (std::size_t n = level; n > target; --n) {
    step_den = 1;
    for (std::size_t v = 0; v < num.size(); ++v) {
      if (sgn(num[v]) == 0) continue;
      g.for_each_predecessor(n, v, [&](std::size_t, const Rational& lam) {
        mpz_lcm(step_den.get_mpz_t(), step_den.get_mpz_t(), lam.get_den_mpz_t());
      });
    }
    std::vector<Integer> next(g.level_size(n - 1));
    for (std::size_t v = 0; v < num.size(); ++v) {
      if (sgn(num[v]) == 0) continue;
      g.for_each_predecessor(n, v, [&](std::size_t u, const Rational& lam) {
        mpz_divexact(scaled.get_mpz_t(), step_den.get_mpz_t(), lam.get_den_mpz_t());
        scaled *= lam.get_num();
        mpz_addmul(next[u].get_mpz_t(), num[v].get_mpz_t(), scaled.get_mpz_t());
      });
    }
    den *= step_den;
    Integer common = den;
    for (const Integer& x : next) {
      if (sgn(x) == 0) continue;
      mpz_gcd(common.get_mpz_t(), common.get_mpz_t(), x.get_mpz_t());
      if (common == 1) break;
    }
    if (common != 1) {
      for (Integer& x : next) {
        if (sgn(x) != 0) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), common.get_mpz_t());
      }
      mpz_divexact(den.get_mpz_t(), den.get_mpz_t(), common.get_mpz_t());
    }
    num = std::move(next);
  }
  std::vector<Rational> out(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) {
    out[i] = Rational(num[i], den);
    out[i].canonicalize();
  }
  return out;
}

template <EquippedGraphLike G>
std::vector<double> project_float(const G& g, std::size_t level, std::vector<double> weights, std::size_t target) {
  for (std::size_t n = level; n > target; --n) {
    std::vector<Accumulator<double>> next(g.level_size(n - 1));
    for (std::size_t v = 0; v < weights.size(); ++v) {
      if (weights[v] == 0.0) continue;
      g.for_each_predecessor(n, v, [&](std::size_t u, const double& lam) { next[u].add(lam * weights[v]); });
    }
    weights.assign(next.size(), 0.0);
    for (std::size_t u = 0; u < next.size(); ++u) weights[u] = next[u].value();
  }
  return weights;
}

}  // namespace detail

/// (Lf)(v) = sum over predecessors u of lambda_v^u f(u); maps level n to n+1.
template <EquippedGraphLike G>
LevelFunction<typename G::scalar_type> apply_L(const G& g, const LevelFunction<typename G::scalar_type>& f) {
  using S = typename G::scalar_type;
  if (f.level + 1 > g.depth()) throw std::out_of_range("apply_L: level " + std::to_string(f.level + 1) + " not stored");
  if (f.values.size() != g.level_size(f.level)) throw std::invalid_argument("apply_L: function length != level size");
  LevelFunction<S> out{f.level + 1, std::vector<S>(g.level_size(f.level + 1), S(0))};
  for (std::size_t v = 0; v < out.values.size(); ++v) {
    Accumulator<S> acc;
    g.for_each_predecessor(f.level + 1, v, [&](std::size_t u, const S& lam) {
      S term = lam;
      term *= f.values[u];
      acc.add(term);
    });
    out.values[v] = acc.value();
  }
  return out;
}

/// (L*mu)(u) = sum over successors v of lambda_v^u mu(v); maps level n+1 to n.
template <EquippedGraphLike G>
LevelMeasure<typename G::scalar_type> apply_Lstar(const G& g, const LevelMeasure<typename G::scalar_type>& mu) {
  using S = typename G::scalar_type;
  if (mu.level == 0) throw std::out_of_range("apply_Lstar: nothing below level 0");
  detail::check_level(mu.level, g.depth(), "apply_Lstar");
  if (mu.weights.size() != g.level_size(mu.level)) throw std::invalid_argument("apply_Lstar: measure length != level size");
  LevelMeasure<S> out{mu.level - 1, std::vector<S>(g.level_size(mu.level - 1), S(0))};
  for (std::size_t v = 0; v < mu.weights.size(); ++v) {
    if (is_zero(mu.weights[v])) continue;
    g.for_each_predecessor(mu.level, v, [&](std::size_t u, const S& lam) { out.weights[u] += lam * mu.weights[v]; });
  }
  return out;
}

/// The image of x (on level x.level) on level m <= x.level under iterated L*.
template <EquippedGraphLike G>
LevelMeasure<typename G::scalar_type> project(const G& g, const LevelMeasure<typename G::scalar_type>& x, std::size_t m) {
  using S = typename G::scalar_type;
  if (m > x.level) throw std::invalid_argument("project: target level above source level");
  detail::check_level(x.level, g.depth(), "project");
  if (x.weights.size() != g.level_size(x.level)) throw std::invalid_argument("project: measure length != level size");
  if (m == x.level) return x;
  if constexpr (std::same_as<S, Rational>) {
    return {m, detail::project_exact(g, x.level, x.weights, m)};
  } else {
    return {m, detail::project_float(g, x.level, x.weights, m)};
  }
}

/// mu_v^k: the measure induced by vertex v on level k < level(v).
template <EquippedGraphLike G>
LevelMeasure<typename G::scalar_type> vertex_measure(const G& g, VertexId v, std::size_t k) {
  using S = typename G::scalar_type;
  if (k >= v.level) throw std::invalid_argument("vertex_measure: k must be below level(v)");
  detail::check_level(v.level, g.depth(), "vertex_measure");
  if (v.index >= g.level_size(v.level)) throw std::out_of_range("vertex_measure: index out of range");
  return project(g, LevelMeasure<S>::delta(v.level, g.level_size(v.level), v.index), k);
}

/// K(u, v): sum over paths u -> v of the products of cotransition
/// probabilities, evaluated forward as (L^{gap} 1_u)(v). K(u,u) = 1; zero
/// when no path exists.
template <EquippedGraphLike G>
typename G::scalar_type martin_kernel(const G& g, VertexId u, VertexId v) {
  using S = typename G::scalar_type;
  if (u.level > v.level) throw std::invalid_argument("martin_kernel: level(u) > level(v)");
  detail::check_level(v.level, g.depth(), "martin_kernel");
  if (u.index >= g.level_size(u.level) || v.index >= g.level_size(v.level)) throw std::out_of_range("martin_kernel: index out of range");
  if (u.level == v.level) return u.index == v.index ? S(1) : S(0);
  std::vector<S> h(g.level_size(u.level), S(0));
  h[u.index] = S(1);
  for (std::size_t n = u.level + 1; n <= v.level; ++n) {
    std::vector<S> next(g.level_size(n), S(0));
    for (std::size_t w = 0; w < next.size(); ++w) {
      Accumulator<S> acc;
      g.for_each_predecessor(n, w, [&](std::size_t p, const S& lam) {
        if (!is_zero(h[p])) acc.add(lam * h[p]);
      });
      next[w] = acc.value();
    }
    h = std::move(next);
  }
  return h[v.index];
}

/// The cotransition matrix from level n+1 down to level n.
template <EquippedGraphLike G>
MarkovMatrix<typename G::scalar_type> markov_matrix(const G& g, std::size_t n) {
  using S = typename G::scalar_type;
  if (n + 1 > g.depth()) throw std::out_of_range("markov_matrix: level " + std::to_string(n + 1) + " not stored");
  MarkovMatrix<S> m(n, n + 1, g.level_size(n));
  std::vector<std::pair<std::size_t, S>> col;
  for (std::size_t v = 0; v < g.level_size(n + 1); ++v) {
    col.clear();
    g.for_each_predecessor(n + 1, v, [&](std::size_t u, const S& lam) { col.emplace_back(u, lam); });
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    m.push_column(col);
  }
  return m;
}

/// Product lower * upper: the matrix from upper.source_level() down to
/// lower.target_level().
template <Scalar S>
MarkovMatrix<S> compose(const MarkovMatrix<S>& lower, const MarkovMatrix<S>& upper) {
  if (lower.source_level() != upper.target_level() || lower.source_size() != upper.target_size()) {
    throw std::invalid_argument("compose: level mismatch");
  }
  MarkovMatrix<S> out(lower.target_level(), upper.source_level(), lower.target_size());
  detail::SparseScratch<S> scratch(lower.target_size());
  for (std::size_t w = 0; w < upper.source_size(); ++w) {
    const auto mid_rows = upper.column_rows(w);
    const auto mid_vals = upper.column_values(w);
    for (std::size_t k = 0; k < mid_rows.size(); ++k) {
      const auto rows = lower.column_rows(mid_rows[k]);
      const auto vals = lower.column_values(mid_rows[k]);
      for (std::size_t j = 0; j < rows.size(); ++j) scratch.add(rows[j], vals[j] * mid_vals[k]);
    }
    const auto col = scratch.drain();
    out.push_column(col);
  }
  return out;
}

/// Columns mu_v^m for every v on level n > m, built level by level
/// (C_j = C_{j-1} * P_j), i.e. the composed cotransition matrix.
template <EquippedGraphLike G>
MarkovMatrix<typename G::scalar_type> composed_matrix(const G& g, std::size_t m, std::size_t n) {
  if (m >= n) throw std::invalid_argument("composed_matrix: need m < n");
  detail::check_level(n, g.depth(), "composed_matrix");
  auto acc = markov_matrix(g, m);
  for (std::size_t j = m + 1; j < n; ++j) acc = compose(acc, markov_matrix(g, j));
  return acc;
}

}  // namespace bratteli
