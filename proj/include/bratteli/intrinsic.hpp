#pragma once

// The intrinsic metric: a base metric on level 1 transferred upward by
// Kantorovich distances between cotransition measures, nested-coupling
// distances on path measures, covering numbers, standardness and
// concentration diagnostics, and lacunarization.

#include "parallel.hpp"
#include "simplex_limit.hpp"
#include "transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bratteli {

/// Weights c_n > 0 of rho_1(g, g') = sum_n c_n [g_n != g'_n] on path
/// prefixes. With `normalize`, distances are divided by c_1 so distinct
/// level-1 vertices sit at distance 1.
struct BaseMetricConfig {
  std::vector<double> weights;
  bool normalize = true;

  static BaseMetricConfig geometric(std::size_t count = 64, double ratio = 0.5) {
    BaseMetricConfig c;
    double w = ratio;
    for (std::size_t n = 0; n < count; ++n, w *= ratio) c.weights.push_back(w);
    return c;
  }

  void validate() const {
    if (weights.empty()) throw std::invalid_argument("base metric needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0) || !std::isfinite(w)) throw std::invalid_argument("base metric weights must be positive and finite");
      total += w;
    }
    if (!std::isfinite(total)) throw std::invalid_argument("base metric weights are not summable");
  }

  /// rho_1 between distinct level-1 vertices.
  template <Scalar S>
  S level_one_distance() const {
    validate();
    if (normalize) return S(1);
    return S(weights.front());
  }

  /// rho_1 between two path prefixes (vertex indices on levels 1..d).
  template <Scalar S>
  S prefix_distance(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
    validate();
    if (a.size() != b.size()) throw std::invalid_argument("prefix_distance: prefixes of different length");
    if (a.size() > weights.size()) throw std::invalid_argument("prefix_distance: more levels than base weights");
    S d(0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] != b[k]) d += S(weights[k]);
    }
    if (normalize) d /= S(weights.front());
    return d;
  }
};

struct IntrinsicOptions {
  /// levels with more candidate vertices than this are sampled
  std::size_t sample_threshold = 20'000;
  std::size_t sample_size = 5'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// rho_n on (a subset of) level n. `vertices` is sorted; the table is
/// indexed by position in `vertices`.
template <Scalar S>
struct LevelMetric {
  std::size_t level = 0;
  std::size_t level_size = 0;
  std::vector<std::size_t> vertices;
  bool sampled = false;
  DistanceTable<S> table;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t position(std::size_t v) const {
    const auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    return it != vertices.end() && *it == v ? static_cast<std::size_t>(it - vertices.begin()) : npos;
  }

  /// Distance between two vertices of the level (both must be covered).
  const S& distance(std::size_t v, std::size_t w) const {
    const std::size_t i = position(v), j = position(w);
    if (i == npos || j == npos) throw std::out_of_range("vertex not covered by the (sampled) metric table");
    return table.at(i, j);
  }

  S diameter() const { return table.diameter(); }
};

namespace detail {

/// k indices drawn uniformly without replacement from `pool`, sorted.
inline std::vector<std::size_t> sample_subset(std::vector<std::size_t> pool, std::size_t k, std::uint64_t seed,
                                              std::size_t level) {
  if (k >= pool.size()) return pool;
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (level + 1)));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

/// rho_1 on level 1: the base distance between any two distinct vertices.
template <EquippedGraphLike G>
LevelMetric<typename G::scalar_type> base_level_metric(const G& g, const BaseMetricConfig& base,
                                                       const IntrinsicOptions& options = {}) {
  using S = typename G::scalar_type;
  if (g.depth() < 1) throw std::out_of_range("base_level_metric: graph has no level 1");
  const S c = base.level_one_distance<S>();
  LevelMetric<S> rho;
  rho.level = 1;
  rho.level_size = g.level_size(1);
  std::vector<std::size_t> all(rho.level_size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (all.size() > options.sample_threshold) {
    rho.vertices = detail::sample_subset(std::move(all), options.sample_size, options.seed, 1);
    rho.sampled = true;
  } else {
    rho.vertices = std::move(all);
  }
  rho.table = DistanceTable<S>(rho.vertices.size());
  for (std::size_t j = 1; j < rho.vertices.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) rho.table.set(i, j, c);
  }
  return rho;
}

/// Lifts rho on the target level of P to the source level of P: the
/// distance between v and w is the Kantorovich distance between columns v
/// and w of P under rho. Only vertices whose column lies in the covered part
/// of rho are kept; above the sampling threshold a seeded subset is used.
template <Scalar S>
LevelMetric<S> transfer_matrix(const MarkovMatrix<S>& P, const LevelMetric<S>& rho, const IntrinsicOptions& options = {}) {
  if (P.target_level() != rho.level || P.target_size() != rho.level_size) {
    throw std::invalid_argument("transfer: metric does not live on the matrix target level");
  }
  LevelMetric<S> out;
  out.level = P.source_level();
  out.level_size = P.source_size();
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < P.source_size(); ++v) {
    const auto rows = P.column_rows(v);
    if (std::all_of(rows.begin(), rows.end(), [&](std::size_t u) { return rho.position(u) != LevelMetric<S>::npos; })) {
      candidates.push_back(v);
    }
  }
  out.sampled = rho.sampled || candidates.size() < P.source_size();
  if (candidates.size() > options.sample_threshold) {
    candidates = detail::sample_subset(std::move(candidates), options.sample_size, options.seed, out.level);
    out.sampled = true;
  }
  out.vertices = std::move(candidates);
  const std::size_t k = out.vertices.size();

  // per vertex: positions of its column rows in rho, and the column weights
  std::vector<std::vector<std::size_t>> pos(k);
  std::vector<std::span<const S>> mass(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t u : P.column_rows(out.vertices[i])) pos[i].push_back(rho.position(u));
    mass[i] = P.column_values(out.vertices[i]);
  }

  out.table = DistanceTable<S>(k);
  const unsigned workers = resolve_threads(options.threads);
  std::vector<TransportSolver<S>> solvers(workers);
  parallel_for(
      k, workers,
      [&](std::size_t j, unsigned worker) {
        auto& solver = solvers[worker];
        for (std::size_t i = 0; i < j; ++i) {
          const auto& pi = pos[i];
          const auto& pj = pos[j];
          S d = solver.solve(mass[i], mass[j], [&](std::size_t x, std::size_t y) { return rho.table.at(pi[x], pj[y]); });
          out.table.set(i, j, std::move(d));
        }
      },
      4);
  return out;
}

/// rho_{n+1} from rho_n through the cotransition measures of level n+1.
template <EquippedGraphLike G>
LevelMetric<typename G::scalar_type> transfer_step(const G& g, const LevelMetric<typename G::scalar_type>& rho,
                                                   const IntrinsicOptions& options = {}) {
  if (rho.level + 1 > g.depth()) throw std::out_of_range("transfer_step: level " + std::to_string(rho.level + 1) + " not stored");
  if (rho.level_size != g.level_size(rho.level)) throw std::invalid_argument("transfer_step: metric does not match the graph");
  return transfer_matrix(markov_matrix(g, rho.level), rho, options);
}

/// rho_1, ..., rho_N (index n-1 holds level n).
template <EquippedGraphLike G>
std::vector<LevelMetric<typename G::scalar_type>> iterate_intrinsic(const G& g, const BaseMetricConfig& base, std::size_t N,
                                                                    const IntrinsicOptions& options = {}) {
  if (N < 1 || N > g.depth()) throw std::out_of_range("iterate_intrinsic: N must lie in [1, depth]");
  std::vector<LevelMetric<typename G::scalar_type>> out;
  out.reserve(N);
  out.push_back(base_level_metric(g, base, options));
  for (std::size_t n = 2; n <= N; ++n) out.push_back(transfer_step(g, out.back(), options));
  return out;
}

// ---------------------------------------------------------------------------
// covering numbers

/// Greedy epsilon-net by farthest-point insertion: start at index 0, then
/// repeatedly add the point farthest from the current centers (lowest index
/// on ties) until every point lies within eps (closed balls).
template <Scalar S>
std::vector<std::size_t> covering_centers(const DistanceTable<S>& table, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("covering number needs eps > 0");
  std::vector<std::size_t> centers;
  if (table.size() == 0) return centers;
  const S e(eps);
  centers.push_back(0);
  std::vector<S> near(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) near[i] = table.at(0, i);
  while (true) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < near.size(); ++i) {
      if (near[i] > near[far]) far = i;
    }
    if (!(near[far] > e)) break;
    centers.push_back(far);
    for (std::size_t i = 0; i < near.size(); ++i) {
      if (table.at(far, i) < near[i]) near[i] = table.at(far, i);
    }
  }
  return centers;
}

template <Scalar S>
std::size_t covering_number(const DistanceTable<S>& table, double eps) {
  return covering_centers(table, eps).size();
}

template <Scalar S>
std::size_t covering_number(const LevelMetric<S>& rho, double eps) {
  return covering_number(rho.table, eps);
}

/// True when every column of P only uses vertices covered by rho.
template <Scalar S>
bool covers_all_columns(const MarkovMatrix<S>& P, const LevelMetric<S>& rho) {
  if (!rho.sampled) return true;
  for (std::size_t v = 0; v < P.source_size(); ++v) {
    for (std::size_t u : P.column_rows(v)) {
      if (rho.position(u) == LevelMetric<S>::npos) return false;
    }
  }
  return true;
}

/// Greedy covering number of the whole source level of P under the metric
/// transferred from rho, computed without a table: each new center costs one
/// pass of transport solves against every vertex. Same seeding, tie and
/// closed-ball rules as covering_centers.
template <Scalar S>
std::size_t streamed_covering_number(const MarkovMatrix<S>& P, const LevelMetric<S>& rho, double eps,
                                     const IntrinsicOptions& options = {}) {
  if (!(eps > 0)) throw std::invalid_argument("covering number needs eps > 0");
  if (!covers_all_columns(P, rho)) throw std::invalid_argument("streamed covering: metric does not cover every column");
  const std::size_t count = P.source_size();
  if (count == 0) return 0;
  const unsigned workers = resolve_threads(options.threads);
  std::vector<TransportSolver<S>> solvers(workers);
  std::vector<std::vector<std::size_t>> pos(count);
  for (std::size_t v = 0; v < count; ++v) {
    for (std::size_t u : P.column_rows(v)) pos[v].push_back(rho.position(u));
  }
  std::vector<S> near(count);
  auto pass = [&](std::size_t center, bool first) {
    parallel_for(
        count, workers,
        [&](std::size_t v, unsigned worker) {
          // same argument order as transfer_matrix, so values match the table bit for bit
          const std::size_t i = std::min(center, v), j = std::max(center, v);
          const auto& pi = pos[i];
          const auto& pj = pos[j];
          S d = i == j ? S(0)
                       : solvers[worker].solve(P.column_values(i), P.column_values(j),
                                               [&](std::size_t x, std::size_t y) { return rho.table.at(pi[x], pj[y]); });
          if (first || d < near[v]) near[v] = std::move(d);
        },
        256);
  };
  const S e(eps);
  pass(0, true);
  std::size_t centers = 1;
  while (true) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (near[i] > near[far]) far = i;
    }
    if (!(near[far] > e)) break;
    ++centers;
    pass(far, false);
  }
  return centers;
}

/// Covering number of the level reached by transferring `parent` through P.
/// When `rho` is a sampled table but `parent` covers every column, the count
/// runs over the full level; `full` reports which case applied.
template <Scalar S>
std::size_t level_covering_number(const MarkovMatrix<S>& P, const LevelMetric<S>& parent, const LevelMetric<S>& rho,
                                  double eps, const IntrinsicOptions& options, bool& full) {
  full = rho.vertices.size() == rho.level_size;
  if (full) return covering_number(rho, eps);
  if (covers_all_columns(P, parent)) {
    full = true;
    return streamed_covering_number(P, parent, eps, options);
  }
  return covering_number(rho, eps);
}

// ---------------------------------------------------------------------------
// concentration and standardness

/// Largest x-mass of a closed eps-ball centred at a covered vertex. On a
/// sampled table only covered vertices contribute.
template <Scalar S>
double best_ball_mass(const LevelMetric<S>& rho, const LevelMeasure<S>& x, double eps) {
  if (x.level != rho.level || x.weights.size() != rho.level_size) {
    throw std::invalid_argument("best_ball_mass: measure does not live on the metric's level");
  }
  const S e(eps);
  double best = 0.0;
  for (std::size_t c = 0; c < rho.vertices.size(); ++c) {
    Accumulator<double> acc;
    for (std::size_t i = 0; i < rho.vertices.size(); ++i) {
      if (!(rho.table.at(c, i) > e)) acc.add(to_double(x.weights[rho.vertices[i]]));
    }
    best = std::max(best, acc.value());
  }
  return best;
}

template <EquippedGraphLike G>
double concentration_test(const G& g, const BaseMetricConfig& base, const CoherentPrefix<typename G::scalar_type>& x,
                          std::size_t n, double eps, const IntrinsicOptions& options = {}) {
  if (n > x.depth()) throw std::out_of_range("concentration_test: prefix shorter than n");
  if (!(eps > 0)) throw std::invalid_argument("concentration_test: eps must be positive");
  const auto metrics = iterate_intrinsic(g, base, n, options);
  return best_ball_mass(metrics.back(), x.at(n), eps);
}

struct StandardnessRow {
  std::size_t level = 0;
  std::size_t level_size = 0;
  std::size_t table_size = 0;
  bool sampled = false;
  /// covering numbers count the whole level even when the table is sampled
  bool covering_full_level = true;
  double diameter = 0.0;
  std::vector<std::size_t> covering;      // one per eps
  std::vector<double> best_ball_mass;     // one per eps, when a measure is given
};

struct StandardnessReport {
  std::vector<double> eps;
  std::vector<StandardnessRow> rows;

  bool sampled() const {
    return std::any_of(rows.begin(), rows.end(), [](const StandardnessRow& r) { return r.sampled; });
  }
  /// covering numbers at eps[e] for levels 1..N
  std::vector<std::size_t> covering_curve(std::size_t e) const {
    std::vector<std::size_t> out;
    for (const auto& r : rows) out.push_back(r.covering.at(e));
    return out;
  }
};

template <EquippedGraphLike G>
StandardnessReport standardness_diagnostic(const G& g, const BaseMetricConfig& base, std::size_t N,
                                           const std::vector<double>& eps_list,
                                           const CoherentPrefix<typename G::scalar_type>* measure = nullptr,
                                           const IntrinsicOptions& options = {}) {
  if (eps_list.empty()) throw std::invalid_argument("standardness_diagnostic: empty eps list");
  for (double e : eps_list) {
    if (!(e > 0)) throw std::invalid_argument("standardness_diagnostic: eps must be positive");
  }
  if (measure && measure->depth() < N) throw std::out_of_range("standardness_diagnostic: measure prefix shorter than N");
  StandardnessReport report;
  report.eps = eps_list;
  using S = typename G::scalar_type;
  auto emit = [&](const LevelMetric<S>& rho, const MarkovMatrix<S>* P, const LevelMetric<S>* parent) {
    StandardnessRow row;
    row.level = rho.level;
    row.level_size = rho.level_size;
    row.table_size = rho.vertices.size();
    row.sampled = rho.sampled;
    row.covering_full_level = rho.vertices.size() == rho.level_size;
    row.diameter = to_double(rho.diameter());
    for (double e : eps_list) {
      if (P) {
        bool full = false;
        row.covering.push_back(level_covering_number(*P, *parent, rho, e, options, full));
        row.covering_full_level = full;
      } else {
        row.covering.push_back(covering_number(rho, e));
      }
      if (measure) row.best_ball_mass.push_back(best_ball_mass(rho, measure->at(rho.level), e));
    }
    report.rows.push_back(std::move(row));
  };
  if (N < 1 || N > g.depth()) throw std::out_of_range("standardness_diagnostic: N must lie in [1, depth]");
  auto rho = base_level_metric(g, base, options);
  emit(rho, nullptr, nullptr);
  for (std::size_t n = 2; n <= N; ++n) {
    const auto P = markov_matrix(g, n - 1);
    auto next = transfer_matrix(P, rho, options);
    emit(next, &P, &rho);
    rho = std::move(next);
  }
  return report;
}

// ---------------------------------------------------------------------------
// nested couplings on path measures

/// A measure on paths from the initial vertex to level `depth`; each atom
/// lists the vertex indices on levels 1..depth.
template <Scalar S>
struct PathMeasure {
  std::size_t depth = 0;
  std::vector<std::pair<std::vector<std::size_t>, S>> atoms;
};

/// The law of a path to v under the cotransition probabilities (the
/// cocycle measure of v): each path carries the product of its lambdas.
template <Scalar S>
PathMeasure<S> cocycle_measure(const EquippedGraph<S>& eg, VertexId v, std::size_t cap = 100'000) {
  if (v.level < 1) throw std::invalid_argument("cocycle_measure: vertex must lie on level >= 1");
  PathMeasure<S> mu;
  mu.depth = v.level;
  for (const FinitePath& p : enumerate_paths(eg.graph(), {0, 0}, v, cap)) {
    mu.atoms.emplace_back(std::vector<std::size_t>(p.indices.begin() + 1, p.indices.end()), path_weight(eg, p));
  }
  return mu;
}

inline constexpr std::size_t nested_depth_limit = 6;

namespace detail {

template <Scalar S>
struct PrefixTree {
  struct Node {
    std::size_t vertex = 0;
    S mass = S(0);
    std::vector<std::size_t> children;  // node indices one level down
  };
  // levels[k] holds the nodes for suffixes (g_{k+1}, ..., g_d), k = 0..d-1
  std::vector<std::vector<Node>> levels;
};

template <Scalar S>
PrefixTree<S> build_prefix_tree(const PathMeasure<S>& mu, std::size_t d) {
  PrefixTree<S> t;
  t.levels.resize(d);
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> index(d);
  for (const auto& [path, w] : mu.atoms) {
    std::size_t parent = SIZE_MAX;
    for (std::size_t k = d; k-- > 0;) {
      std::vector<std::size_t> key(path.begin() + static_cast<std::ptrdiff_t>(k), path.end());
      auto [it, fresh] = index[k].try_emplace(std::move(key), t.levels[k].size());
      if (fresh) {
        t.levels[k].push_back({path[k], S(0), {}});
        if (parent != SIZE_MAX) t.levels[k + 1][parent].children.push_back(it->second);
      }
      t.levels[k][it->second].mass += w;
      parent = it->second;
    }
  }
  return t;
}

}  // namespace detail

/// Nested-coupling Kantorovich distance between two path measures of depth
/// d <= 6. Stage-1 cost is the base distance between first vertices; the
/// cost between two suffix nodes at stage k is the Kantorovich distance of
/// their conditional continuations under the stage-(k-1) costs.
template <Scalar S>
S nested_distance(const EquippedGraph<S>& eg, const PathMeasure<S>& mu1, const PathMeasure<S>& mu2,
                  const BaseMetricConfig& base, std::size_t d) {
  if (d < 1 || d > nested_depth_limit) {
    throw std::invalid_argument("nested_distance: depth must lie in [1, " + std::to_string(nested_depth_limit) + "]");
  }
  if (d > eg.depth()) throw std::out_of_range("nested_distance: depth exceeds the graph");
  for (const PathMeasure<S>* mu : {&mu1, &mu2}) {
    if (mu->depth != d || mu->atoms.empty()) throw std::invalid_argument("nested_distance: measure depth differs from d");
    Accumulator<S> total;
    for (const auto& [path, w] : mu->atoms) {
      FinitePath p{0, {0}};
      p.indices.insert(p.indices.end(), path.begin(), path.end());
      if (path.size() != d || !is_path(eg.graph(), p)) throw std::invalid_argument("nested_distance: atom is not a path from the root");
      if (w < 0) throw std::invalid_argument("nested_distance: negative weight");
      total.add(w);
    }
    if constexpr (std::same_as<S, double>) {
      if (std::fabs(total.value() - 1.0) > 1e-9) throw std::invalid_argument("nested_distance: measure is not normalized");
    } else {
      if (total.value() != 1) throw std::invalid_argument("nested_distance: measure is not normalized");
    }
  }
  const S c = base.level_one_distance<S>();
  const auto t1 = detail::build_prefix_tree(mu1, d);
  const auto t2 = detail::build_prefix_tree(mu2, d);

  std::vector<std::vector<S>> cost(t1.levels[0].size(), std::vector<S>(t2.levels[0].size()));
  for (std::size_t a = 0; a < t1.levels[0].size(); ++a) {
    for (std::size_t b = 0; b < t2.levels[0].size(); ++b) {
      cost[a][b] = t1.levels[0][a].vertex == t2.levels[0][b].vertex ? S(0) : c;
    }
  }
  TransportSolver<S> solver;
  auto conditional = [](const auto& tree, std::size_t k, std::size_t node) {
    const auto& nd = tree.levels[k][node];
    std::vector<S> w;
    for (std::size_t ch : nd.children) {
      S x = tree.levels[k - 1][ch].mass;
      x /= nd.mass;
      w.push_back(std::move(x));
    }
    return w;
  };
  for (std::size_t k = 1; k < d; ++k) {
    std::vector<std::vector<S>> next(t1.levels[k].size(), std::vector<S>(t2.levels[k].size()));
    for (std::size_t a = 0; a < t1.levels[k].size(); ++a) {
      const auto wa = conditional(t1, k, a);
      const auto& ca = t1.levels[k][a].children;
      for (std::size_t b = 0; b < t2.levels[k].size(); ++b) {
        const auto wb = conditional(t2, k, b);
        const auto& cb = t2.levels[k][b].children;
        next[a][b] = solver.solve(std::span<const S>(wa), std::span<const S>(wb),
                                  [&](std::size_t x, std::size_t y) { return cost[ca[x]][cb[y]]; });
      }
    }
    cost = std::move(next);
  }
  std::vector<S> top1, top2;
  for (const auto& nd : t1.levels[d - 1]) top1.push_back(nd.mass);
  for (const auto& nd : t2.levels[d - 1]) top2.push_back(nd.mass);
  return solver.solve(std::span<const S>(top1), std::span<const S>(top2),
                      [&](std::size_t x, std::size_t y) { return cost[x][y]; });
}

// ---------------------------------------------------------------------------
// lacunarization

template <Scalar S>
struct LacunarizationResult {
  double eps = 0.0;
  std::size_t max_depth = 0;
  /// n_1 < n_2 < ...
  std::vector<std::size_t> levels;
  /// lumped covering number at each selected level
  std::vector<std::size_t> covering;
  /// whether that count ran over the whole level (false: sampled table only)
  std::vector<bool> covering_full_level;
  /// chain[k] is the composed matrix from levels[k+1] down to levels[k]
  std::vector<MarkovMatrix<S>> chain;
  std::vector<LevelMetric<S>> metrics;
  /// indices k such that levels[k] was forced to max_depth
  std::vector<std::size_t> flagged_steps;
  bool sampled = false;

  bool flagged() const { return !flagged_steps.empty(); }
};

/// Greedy level selection: from n_k, take the smallest n > n_k whose lumped
/// metric (rho_{n_k} transferred through the composed matrix n -> n_k) has
/// covering number at eps no larger than at n_k. If none exists up to
/// max_depth, take max_depth and flag the step.
template <EquippedGraphLike G>
LacunarizationResult<typename G::scalar_type> lacunarize(const G& g, const BaseMetricConfig& base, double eps,
                                                         std::size_t max_depth, const IntrinsicOptions& options = {}) {
  using S = typename G::scalar_type;
  if (!(eps > 0)) throw std::invalid_argument("lacunarize: eps must be positive");
  if (max_depth < 1 || max_depth > g.depth()) throw std::out_of_range("lacunarize: max_depth must lie in [1, depth]");
  LacunarizationResult<S> r;
  r.eps = eps;
  r.max_depth = max_depth;
  r.metrics.push_back(base_level_metric(g, base, options));
  r.levels.push_back(1);
  r.covering.push_back(covering_number(r.metrics.back(), eps));
  r.covering_full_level.push_back(!r.metrics.back().sampled);
  r.sampled = r.metrics.back().sampled;
  while (r.levels.back() < max_depth) {
    const std::size_t from = r.levels.back();
    auto P = markov_matrix(g, from);
    for (std::size_t n = from + 1;; ++n) {
      auto rho = transfer_matrix(P, r.metrics.back(), options);
      bool full = false;
      const std::size_t cov = level_covering_number(P, r.metrics.back(), rho, eps, options, full);
      const bool accept = cov <= r.covering.back();
      if (accept || n == max_depth) {
        if (!accept) r.flagged_steps.push_back(r.levels.size());
        r.sampled = r.sampled || rho.sampled;
        r.levels.push_back(n);
        r.covering.push_back(cov);
        r.covering_full_level.push_back(full);
        r.chain.push_back(std::move(P));
        r.metrics.push_back(std::move(rho));
        break;
      }
      P = compose(P, markov_matrix(g, n));
    }
  }
  return r;
}

}  // namespace bratteli
