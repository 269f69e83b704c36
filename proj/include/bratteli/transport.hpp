#pragma once

// Kantorovich (optimal transport) distances between finitely supported
// measures on a finite metric space.

#include "numeric.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bratteli {

/// Symmetric table with zero diagonal, stored as the strict upper triangle.
template <Scalar S>
class DistanceTable {
 public:
  DistanceTable() = default;
  explicit DistanceTable(std::size_t size) : size_(size), packed_(size * (size ? size - 1 : 0) / 2, S(0)) {}

  /// From a dense square table; throws unless it is symmetric with zero diagonal.
  static DistanceTable from_dense(const std::vector<std::vector<S>>& dense) {
    DistanceTable t(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i].size() != dense.size()) throw std::invalid_argument("distance table is not square");
      if (!is_zero(dense[i][i])) throw std::invalid_argument("distance table has a nonzero diagonal");
      for (std::size_t j = 0; j < i; ++j) {
        if (dense[i][j] != dense[j][i]) throw std::invalid_argument("distance table is not symmetric");
        if (dense[i][j] < 0) throw std::invalid_argument("negative distance");
        t.set(j, i, dense[i][j]);
      }
    }
    return t;
  }

  std::size_t size() const { return size_; }

  const S& at(std::size_t i, std::size_t j) const {
    static const S zero(0);
    if (i == j) return zero;
    return packed_[slot(i, j)];
  }

  void set(std::size_t i, std::size_t j, S value) {
    if (i == j) {
      if (!is_zero(value)) throw std::invalid_argument("diagonal distances must be zero");
      return;
    }
    packed_[slot(i, j)] = std::move(value);
  }

  S diameter() const {
    S d(0);
    for (const S& x : packed_) {
      if (x > d) d = x;
    }
    return d;
  }

  /// Largest violation of d(i,k) <= d(i,j) + d(j,k) over all triples (0 if none).
  double max_triangle_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size_; ++i) {
      for (std::size_t j = 0; j < size_; ++j) {
        for (std::size_t k = i + 1; k < size_; ++k) {
          const double excess = to_double(at(i, k)) - to_double(at(i, j)) - to_double(at(j, k));
          worst = std::max(worst, excess);
        }
      }
    }
    return worst;
  }

  friend bool operator==(const DistanceTable&, const DistanceTable&) = default;

 private:
  static std::size_t slot(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return j * (j - 1) / 2 + i;
  }

  std::size_t size_ = 0;
  std::vector<S> packed_;
};

template <Scalar S>
using FiniteMetric = DistanceTable<S>;

/// Joint weights on rows x cols with the two marginals as row/column sums.
template <Scalar S>
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> weights;  // row-major

  const S& at(std::size_t i, std::size_t j) const { return weights[i * cols + j]; }

  std::vector<S> row_sums() const {
    std::vector<S> out(rows, S(0));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[i] += at(i, j);
    return out;
  }

  std::vector<S> col_sums() const {
    std::vector<S> out(cols, S(0));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[j] += at(i, j);
    return out;
  }
};

template <Scalar S>
struct TransportResult {
  S distance;
  Coupling<S> coupling;
};

/// Transportation simplex on dense cost tables. Bland's rule throughout:
/// the entering cell is the lowest-index cell with negative reduced cost and
/// the leaving cell is the lowest-index minimizer of the ratio test. One
/// instance per thread; buffers are reused between solves.
template <Scalar S>
class TransportSolver {
 public:
  /// Optimal cost between weight vectors a and b (same total mass) under
  /// cost(i, j). Zero weights are dropped before solving. When
  /// `want_coupling` is set, coupling() afterwards holds an optimal plan
  /// indexed by the original positions.
  template <class Cost>
  S solve(std::span<const S> a, std::span<const S> b, Cost&& cost, bool want_coupling = false) {
    rows_.clear();
    cols_.clear();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > 0) rows_.push_back(i);
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j] > 0) cols_.push_back(j);
    if (rows_.empty() || cols_.empty()) throw std::invalid_argument("transport: empty marginal");
    const std::size_t m = rows_.size();
    const std::size_t n = cols_.size();
    supply_.resize(m);
    demand_.resize(n);
    for (std::size_t i = 0; i < m; ++i) supply_[i] = a[rows_[i]];
    for (std::size_t j = 0; j < n; ++j) demand_[j] = b[cols_[j]];
    cost_.resize(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) cost_[i * n + j] = cost(rows_[i], cols_[j]);
    flow_.assign(m * n, S(0));

    if (m == 1 || n == 1) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) flow_[i * n + j] = m == 1 ? demand_[j] : supply_[i];
    } else if (m == 2 && n == 2) {
      solve_two_by_two();
    } else {
      network_simplex(m, n);
    }

    Accumulator<S> total;
    for (std::size_t k = 0; k < m * n; ++k)
      if (!is_zero(flow_[k])) total.add(flow_[k] * cost_[k]);
    if (want_coupling) {
      coupling_.rows = a.size();
      coupling_.cols = b.size();
      coupling_.weights.assign(a.size() * b.size(), S(0));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) coupling_.weights[rows_[i] * b.size() + cols_[j]] = flow_[i * n + j];
    }
    return total.value();
  }

  const Coupling<S>& coupling() const { return coupling_; }
  std::size_t last_pivots() const { return pivots_; }

 private:
  // One free parameter t = flow(0,0); the cost is linear in t, so an endpoint is optimal.
  void solve_two_by_two() {
    pivots_ = 0;
    const S& a0 = supply_[0];
    const S& b0 = demand_[0];
    const S& b1 = demand_[1];
    S lo = a0 - b1;
    if (lo < 0) lo = 0;
    S hi = a0 < b0 ? a0 : b0;
    S slope = cost_[0] - cost_[1] - cost_[2] + cost_[3];
    const S t = slope < 0 ? hi : lo;
    flow_[0] = t;
    flow_[1] = a0 - t;
    flow_[2] = b0 - t;
    flow_[3] = supply_[1] - b0 + t;
    clamp();
  }

  void clamp() {
    if constexpr (std::same_as<S, double>) {
      for (double& x : flow_)
        if (x < 0.0) x = 0.0;
    }
  }

  void network_simplex(std::size_t m, std::size_t n) {
    // northwest corner start: a staircase spanning tree of m + n - 1 cells
    basic_.assign(m * n, 0);
    basis_.clear();
    {
      std::vector<S> sup(supply_.begin(), supply_.end());
      std::vector<S> dem(demand_.begin(), demand_.end());
      std::size_t i = 0, j = 0;
      while (true) {
        const bool last_row = i + 1 == m;
        const bool last_col = j + 1 == n;
        S x;
        bool advance_row;
        if (last_row && last_col) {
          x = sup[i] < dem[j] ? sup[i] : dem[j];
          if constexpr (std::same_as<S, double>) x = std::max(x, 0.0);
          flow_[i * n + j] = x;
          basic_[i * n + j] = 1;
          basis_.emplace_back(i, j);
          break;
        }
        if (last_row) {
          advance_row = false;
        } else if (last_col) {
          advance_row = true;
        } else {
          advance_row = !(dem[j] < sup[i]);
        }
        x = advance_row ? sup[i] : dem[j];
        if constexpr (std::same_as<S, double>) x = std::max(x, 0.0);
        flow_[i * n + j] = x;
        basic_[i * n + j] = 1;
        basis_.emplace_back(i, j);
        sup[i] -= x;
        dem[j] -= x;
        if (advance_row) {
          ++i;
        } else {
          ++j;
        }
      }
    }

    const std::size_t nodes = m + n;
    u_.resize(m);
    v_.resize(n);
    adj_.assign(nodes, {});
    parent_.assign(nodes, 0);
    pivots_ = 0;
    const std::size_t max_pivots = 50 * (m * n) * (m + n) + 1000;
    while (true) {
      build_adjacency(m, n);
      compute_potentials(m, n);
      std::size_t enter = m * n;
      for (std::size_t k = 0; k < m * n && enter == m * n; ++k) {
        if (basic_[k]) continue;
        S r = cost_[k] - u_[k / n] - v_[k % n];
        if constexpr (std::same_as<S, double>) {
          if (r < -entering_tolerance) enter = k;
        } else {
          if (r < 0) enter = k;
        }
      }
      if (enter == m * n) break;
      if (++pivots_ > max_pivots) throw std::runtime_error("transport: pivot limit exceeded");
      pivot(enter, m, n);
    }
    clamp();
  }

  void build_adjacency(std::size_t m, std::size_t n) {
    for (auto& a : adj_) a.clear();
    for (const auto& [i, j] : basis_) {
      adj_[i].push_back(m + j);
      adj_[m + j].push_back(i);
    }
    (void)n;
  }

  void compute_potentials(std::size_t m, std::size_t n) {
    const std::size_t nodes = m + n;
    seen_.assign(nodes, 0);
    queue_.clear();
    queue_.push_back(0);
    seen_[0] = 1;
    u_[0] = 0;
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      const std::size_t x = queue_[h];
      for (std::size_t y : adj_[x]) {
        if (seen_[y]) continue;
        seen_[y] = 1;
        if (x < m) {  // row x -> column y - m
          v_[y - m] = cost_[x * n + (y - m)] - u_[x];
        } else {
          u_[y] = cost_[y * n + (x - m)] - v_[x - m];
        }
        queue_.push_back(y);
      }
    }
  }

  void pivot(std::size_t enter, std::size_t m, std::size_t n) {
    const std::size_t p = enter / n;
    const std::size_t q = enter % n;
    // tree path from column node q to row node p
    const std::size_t nodes = m + n;
    const std::size_t start = m + q;
    seen_.assign(nodes, 0);
    queue_.clear();
    queue_.push_back(start);
    seen_[start] = 1;
    for (std::size_t h = 0; h < queue_.size() && !seen_[p]; ++h) {
      const std::size_t x = queue_[h];
      for (std::size_t y : adj_[x]) {
        if (seen_[y]) continue;
        seen_[y] = 1;
        parent_[y] = x;
        queue_.push_back(y);
      }
    }
    // walk back from p to start collecting cells; signs alternate starting
    // with '-' on the cell touching column q
    cycle_.clear();
    std::size_t x = p;
    while (x != start) {
      const std::size_t y = parent_[x];
      const std::size_t row = x < m ? x : y;
      const std::size_t col = x < m ? y - m : x - m;
      cycle_.push_back(row * n + col);
      x = y;
    }
    std::reverse(cycle_.begin(), cycle_.end());  // now ordered from column q to row p
    std::size_t leave = m * n;
    S theta(0);
    for (std::size_t k = 0; k < cycle_.size(); k += 2) {
      const std::size_t cell = cycle_[k];
      if (leave == m * n || flow_[cell] < theta || (flow_[cell] == theta && cell < leave)) {
        theta = flow_[cell];
        leave = cell;
      }
    }
    flow_[enter] += theta;
    for (std::size_t k = 0; k < cycle_.size(); ++k) {
      if (k % 2 == 0) {
        flow_[cycle_[k]] -= theta;
      } else {
        flow_[cycle_[k]] += theta;
      }
    }
    flow_[leave] = S(0);
    basic_[leave] = 0;
    basic_[enter] = 1;
    for (auto& cell : basis_) {
      if (cell.first * n + cell.second == leave) {
        cell = {p, q};
        break;
      }
    }
  }

  static constexpr double entering_tolerance = 1e-12;

  std::vector<std::size_t> rows_, cols_;
  std::vector<S> supply_, demand_, cost_, flow_, u_, v_;
  std::vector<char> basic_, seen_;
  std::vector<std::pair<std::size_t, std::size_t>> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_, queue_, cycle_;
  Coupling<S> coupling_;
  std::size_t pivots_ = 0;
};

namespace detail {

template <Scalar S>
void check_marginal(std::span<const S> mu, std::size_t size, const char* name) {
  if (mu.size() != size) throw std::invalid_argument(std::string("kantorovich: ") + name + " has the wrong dimension");
  Accumulator<S> total;
  for (const S& w : mu) {
    if (w < 0) throw std::invalid_argument(std::string("kantorovich: ") + name + " has a negative weight");
    total.add(w);
  }
  if constexpr (std::same_as<S, double>) {
    if (std::fabs(total.value() - 1.0) > 1e-9) throw std::invalid_argument(std::string("kantorovich: ") + name + " is not normalized");
  } else {
    if (total.value() != 1) throw std::invalid_argument(std::string("kantorovich: ") + name + " is not normalized");
  }
}

}  // namespace detail

/// Kantorovich distance between two probability vectors on the points of
/// `metric`, with an optimal coupling.
template <Scalar S>
TransportResult<S> kantorovich(std::span<const S> mu1, std::span<const S> mu2, const FiniteMetric<S>& metric) {
  detail::check_marginal(mu1, metric.size(), "first marginal");
  detail::check_marginal(mu2, metric.size(), "second marginal");
  TransportSolver<S> solver;
  // solve in a canonical argument order so the distance is exactly symmetric
  const bool swap = std::lexicographical_compare(mu2.begin(), mu2.end(), mu1.begin(), mu1.end());
  const auto& first = swap ? mu2 : mu1;
  const auto& second = swap ? mu1 : mu2;
  S d = solver.solve(first, second, [&](std::size_t i, std::size_t j) { return metric.at(i, j); }, true);
  Coupling<S> c = solver.coupling();
  if (swap) {
    Coupling<S> t{c.cols, c.rows, std::vector<S>(c.weights.size(), S(0))};
    for (std::size_t i = 0; i < c.rows; ++i)
      for (std::size_t j = 0; j < c.cols; ++j) t.weights[j * t.cols + i] = c.at(i, j);
    c = std::move(t);
  }
  return {std::move(d), std::move(c)};
}

template <Scalar S>
TransportResult<S> kantorovich(const std::vector<S>& mu1, const std::vector<S>& mu2, const FiniteMetric<S>& metric) {
  return kantorovich(std::span<const S>(mu1), std::span<const S>(mu2), metric);
}

/// Exhaustive oracle: evaluates every basic solution of the transportation
/// polytope (one per spanning tree of the support bipartite graph) and
/// returns the cheapest feasible one. Supports of at most five points.
template <Scalar S>
S brute_force_kantorovich(const std::vector<S>& mu1, const std::vector<S>& mu2, const FiniteMetric<S>& metric) {
  constexpr std::size_t max_support = 5;
  detail::check_marginal(std::span<const S>(mu1), metric.size(), "first marginal");
  detail::check_marginal(std::span<const S>(mu2), metric.size(), "second marginal");
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < mu1.size(); ++i)
    if (mu1[i] > 0) rows.push_back(i);
  for (std::size_t j = 0; j < mu2.size(); ++j)
    if (mu2[j] > 0) cols.push_back(j);
  if (rows.size() > max_support || cols.size() > max_support) {
    throw std::invalid_argument("brute_force_kantorovich: support larger than 5");
  }
  const std::size_t m = rows.size();
  const std::size_t n = cols.size();
  const std::size_t need = m + n - 1;
  const double feasibility_slack = numeric_traits<S>::exact ? 0.0 : 1e-12;

  std::vector<std::size_t> chosen;
  chosen.reserve(need);
  bool found = false;
  S best(0);

  auto evaluate = [&] {
    // peel leaves of the spanning tree to get the unique flows
    std::array<S, 2 * max_support> rest{};
    for (std::size_t i = 0; i < m; ++i) rest[i] = mu1[rows[i]];
    for (std::size_t j = 0; j < n; ++j) rest[m + j] = mu2[cols[j]];
    std::array<int, 2 * max_support> degree{};
    std::vector<char> used(chosen.size(), 0);
    for (std::size_t c : chosen) {
      ++degree[c / n];
      ++degree[m + c % n];
    }
    S cost(0);
    for (std::size_t step = 0; step < chosen.size(); ++step) {
      std::size_t pick = chosen.size();
      std::size_t leaf = 0;
      for (std::size_t k = 0; k < chosen.size() && pick == chosen.size(); ++k) {
        if (used[k]) continue;
        const std::size_t r = chosen[k] / n;
        const std::size_t c = m + chosen[k] % n;
        if (degree[r] == 1) {
          pick = k;
          leaf = r;
        } else if (degree[c] == 1) {
          pick = k;
          leaf = c;
        }
      }
      const std::size_t r = chosen[pick] / n;
      const std::size_t c = m + chosen[pick] % n;
      const std::size_t other = leaf == r ? c : r;
      const S x = rest[leaf];
      if constexpr (numeric_traits<S>::exact) {
        if (x < 0) return;
      } else {
        if (x < -feasibility_slack) return;
      }
      rest[other] -= x;
      rest[leaf] = 0;
      --degree[r];
      --degree[c];
      used[pick] = 1;
      cost += x * metric.at(rows[r], cols[c - m]);
    }
    if (!found || cost < best) {
      best = cost;
      found = true;
    }
  };

  // include/exclude each cell in row-major order, rejecting cycles
  std::array<std::size_t, 2 * max_support> root{};
  for (std::size_t k = 0; k < m + n; ++k) root[k] = k;
  auto find = [](std::array<std::size_t, 2 * max_support>& r, std::size_t x) {
    while (r[x] != x) x = r[x];
    return x;
  };
  auto recurse = [&](auto&& self, std::size_t cell, std::array<std::size_t, 2 * max_support> uf) -> void {
    if (chosen.size() == need) {
      evaluate();
      return;
    }
    if (cell == m * n || m * n - cell < need - chosen.size()) return;
    const std::size_t a = find(uf, cell / n);
    const std::size_t b = find(uf, m + cell % n);
    if (a != b) {
      auto joined = uf;
      joined[a] = b;
      chosen.push_back(cell);
      self(self, cell + 1, joined);
      chosen.pop_back();
    }
    self(self, cell + 1, uf);
  };
  recurse(recurse, 0, root);
  if (!found) throw std::logic_error("brute_force_kantorovich: no feasible basis");
  return best;
}

/// sum f dmu1 - sum f dmu2 for a 1-Lipschitz f; never exceeds the
/// Kantorovich distance. Throws if f is not 1-Lipschitz.
template <Scalar S>
S lipschitz_lower_bound(const std::vector<S>& mu1, const std::vector<S>& mu2, const FiniteMetric<S>& metric,
                        const std::vector<S>& f) {
  if (f.size() != metric.size() || mu1.size() != metric.size() || mu2.size() != metric.size()) {
    throw std::invalid_argument("lipschitz_lower_bound: dimension mismatch");
  }
  const double slack = numeric_traits<S>::exact ? 0.0 : 1e-12;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const S gap = abs_value<S>(f[i] - f[j]);
      bool violated;
      if constexpr (numeric_traits<S>::exact) {
        violated = gap > metric.at(i, j);
      } else {
        violated = gap - metric.at(i, j) > slack;
      }
      if (violated) throw std::invalid_argument("lipschitz_lower_bound: f is not 1-Lipschitz");
    }
  }
  Accumulator<S> acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc.add(f[i] * mu1[i]);
    acc.add(-(f[i] * mu2[i]));
  }
  return acc.value();
}

}  // namespace bratteli
