#pragma once

// The projective-limit view: coherent prefixes x_1, x_2, ..., projected
// clouds {mu_v^m}, extremality spreads, Choquet clustering, Martin limits,
// the Poulsen fill distance, and the graph <-> projective system round trip.

#include "hull.hpp"
#include "operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bratteli {

/// Total variation distance: half the L1 distance.
template <Scalar S>
S total_variation(std::span<const S> a, std::span<const S> b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: length mismatch");
  Accumulator<S> acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::same_as<S, double>) {
      acc.add(std::fabs(a[i] - b[i]));
    } else {
      acc.add(abs(Rational(a[i] - b[i])));
    }
  }
  S out = acc.value();
  out /= 2;
  return out;
}

template <Scalar S>
S total_variation(const std::vector<S>& a, const std::vector<S>& b) {
  return total_variation<S>(std::span<const S>(a), std::span<const S>(b));
}

// ---------------------------------------------------------------------------
// coherent prefixes

/// x_0, x_1, ..., x_N with x_{n-1} = L* x_n.
template <Scalar S>
struct CoherentPrefix {
  std::vector<LevelMeasure<S>> levels;

  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }
  const LevelMeasure<S>& at(std::size_t n) const {
    if (n >= levels.size()) throw std::out_of_range("coherent prefix has no level " + std::to_string(n));
    return levels[n];
  }
};

inline CoherentPrefix<double> to_float(const CoherentPrefix<Rational>& x) {
  CoherentPrefix<double> out;
  for (const auto& l : x.levels) out.levels.push_back(to_float(l));
  return out;
}

/// The prefix generated by a top-level measure: every lower level is its
/// projection.
template <EquippedGraphLike G>
CoherentPrefix<typename G::scalar_type> prefix_from_top(const G& g, LevelMeasure<typename G::scalar_type> top) {
  if (top.level > g.depth() || top.weights.size() != g.level_size(top.level)) {
    throw std::invalid_argument("prefix_from_top: measure does not fit the graph");
  }
  CoherentPrefix<typename G::scalar_type> x;
  x.levels.resize(top.level + 1);
  for (std::size_t n = top.level; n > 0; --n) {
    auto lower = apply_Lstar(g, top);
    x.levels[n] = std::move(top);
    top = std::move(lower);
  }
  x.levels[0] = std::move(top);
  return x;
}

/// Largest total-variation gap between L* x_n and x_{n-1}; exactly zero for a
/// coherent rational prefix.
template <EquippedGraphLike G>
double coherence_defect(const G& g, const CoherentPrefix<typename G::scalar_type>& x) {
  double worst = 0.0;
  for (std::size_t n = 1; n < x.levels.size(); ++n) {
    const auto down = apply_Lstar(g, x.levels[n]);
    worst = std::max(worst, to_double(total_variation(down.weights, x.levels[n - 1].weights)));
  }
  return worst;
}

namespace detail {

template <Scalar S>
std::vector<S> binomial_weights(std::size_t n, const S& p) {
  std::vector<S> w(n + 1);
  if constexpr (std::same_as<S, double>) {
    if (p <= 0.0 || p >= 1.0) {
      std::fill(w.begin(), w.end(), 0.0);
      w[p <= 0.0 ? 0 : n] = 1.0;
      return w;
    }
    const double lp = std::log(p), lq = std::log1p(-p);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      w[k] = std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) + kk * lp + (nn - kk) * lq);
    }
  } else {
    const Rational q = Rational(1) - p;
    Integer c = 1;
    for (std::size_t k = 0; k <= n; ++k) {
      Rational pk, qk;
      mpq_class base_p(p), base_q(q);
      mpz_pow_ui(pk.get_num_mpz_t(), base_p.get_num_mpz_t(), k);
      mpz_pow_ui(pk.get_den_mpz_t(), base_p.get_den_mpz_t(), k);
      mpz_pow_ui(qk.get_num_mpz_t(), base_q.get_num_mpz_t(), n - k);
      mpz_pow_ui(qk.get_den_mpz_t(), base_q.get_den_mpz_t(), n - k);
      pk.canonicalize();
      qk.canonicalize();
      Rational t = pk * qk;
      t *= Rational(c);
      w[k] = t;
      c *= static_cast<unsigned long>(n - k);
      c /= static_cast<unsigned long>(k + 1);
    }
  }
  return w;
}

}  // namespace detail

/// Mixture sum_i w_i B(p_i) of Bernoulli measures on the Pascal graph, given
/// level by level: x_n(k) = sum_i w_i C(n,k) p_i^k (1-p_i)^(n-k).
template <Scalar S>
CoherentPrefix<S> pascal_bernoulli_mixture(std::size_t depth, const std::vector<S>& ps, const std::vector<S>& mix) {
  if (ps.empty() || ps.size() != mix.size()) throw std::invalid_argument("bernoulli mixture: parameter/weight mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i] < 0 || ps[i] > 1 || mix[i] < 0) throw std::invalid_argument("bernoulli mixture: parameter out of range");
  }
  CoherentPrefix<S> x;
  x.levels.reserve(depth + 1);
  for (std::size_t n = 0; n <= depth; ++n) {
    LevelMeasure<S> m{n, std::vector<S>(n + 1, S(0))};
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto b = detail::binomial_weights(n, ps[i]);
      for (std::size_t k = 0; k <= n; ++k) m.weights[k] += mix[i] * b[k];
    }
    x.levels.push_back(std::move(m));
  }
  return x;
}

template <Scalar S>
CoherentPrefix<S> pascal_bernoulli(std::size_t depth, const S& p) {
  return pascal_bernoulli_mixture<S>(depth, {p}, {S(1)});
}

/// x_n uniform on level n of the Pascal graph (the Lebesgue mixture of
/// Bernoulli measures).
template <Scalar S>
CoherentPrefix<S> pascal_uniform(std::size_t depth) {
  CoherentPrefix<S> x;
  for (std::size_t n = 0; n <= depth; ++n) {
    x.levels.push_back({n, std::vector<S>(n + 1, from_ratio<S>(1, static_cast<long>(n + 1)))});
  }
  return x;
}

// ---------------------------------------------------------------------------
// projected clouds

/// The points mu_v^m for v on level n, optionally weighted by a measure on
/// level n (the weighted cloud is nu_n^m).
template <Scalar S>
struct ProjectedCloud {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::vector<S>> points;
  std::optional<LevelMeasure<S>> weights;
};

template <EquippedGraphLike G>
ProjectedCloud<typename G::scalar_type> omega_cloud(const G& g, std::size_t m, std::size_t n) {
  if (m >= n) throw std::invalid_argument("omega_cloud: need m < n");
  detail::check_level(n, g.depth(), "omega_cloud");
  const auto c = composed_matrix(g, m, n);
  ProjectedCloud<typename G::scalar_type> cloud{m, n, {}, std::nullopt};
  cloud.points.reserve(c.source_size());
  for (std::size_t v = 0; v < c.source_size(); ++v) cloud.points.push_back(c.column(v));
  return cloud;
}

template <EquippedGraphLike G>
ProjectedCloud<typename G::scalar_type> weighted_cloud(const G& g, const CoherentPrefix<typename G::scalar_type>& x,
                                                       std::size_t m, std::size_t n) {
  if (n > x.depth()) throw std::out_of_range("weighted_cloud: prefix shorter than n");
  auto cloud = omega_cloud(g, m, n);
  cloud.weights = x.at(n);
  return cloud;
}

inline std::vector<std::vector<double>> float_points(const std::vector<std::vector<double>>& p) { return p; }
inline std::vector<std::vector<double>> float_points(const std::vector<std::vector<Rational>>& p) {
  std::vector<std::vector<double>> out;
  out.reserve(p.size());
  for (const auto& row : p) {
    auto& r = out.emplace_back();
    for (const auto& q : row) r.push_back(q.get_d());
  }
  return out;
}

struct ContainmentReport {
  std::size_t tested = 0;
  std::size_t outside = 0;
  double max_residual = 0.0;
  bool contained() const { return outside == 0; }
};

/// LP membership of every inner point in the hull of the outer points.
inline ContainmentReport hull_contains(const std::vector<std::vector<double>>& outer,
                                       const std::vector<std::vector<double>>& inner, double tolerance = 1e-8) {
  ContainmentReport r;
  for (const auto& q : inner) {
    const auto h = hull_membership(outer, q, tolerance);
    ++r.tested;
    r.max_residual = std::max(r.max_residual, h.residual);
    if (!h.member) ++r.outside;
  }
  return r;
}

struct MonotonicityStage {
  std::size_t n = 0;  // stage-(n+1) points tested against the stage-n hull
  ContainmentReport report;
};

/// Checks hull(stage n+1) within hull(stage n) for m < n < n_max.
template <EquippedGraphLike G>
std::vector<MonotonicityStage> omega_monotonicity(const G& g, std::size_t m, std::size_t n_max, double tolerance = 1e-8) {
  std::vector<MonotonicityStage> out;
  if (n_max <= m + 1) return out;
  auto prev = float_points(omega_cloud(g, m, m + 1).points);
  for (std::size_t n = m + 1; n < n_max; ++n) {
    auto next = float_points(omega_cloud(g, m, n + 1).points);
    out.push_back({n, hull_contains(prev, next, tolerance)});
    prev = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// extremality

/// Kantorovich distance (total-variation ground metric) between nu_n^m and
/// the point mass at x_m, i.e. sum_v x_n(v) TV(mu_v^m, x_m).
template <EquippedGraphLike G>
typename G::scalar_type extremality_spread(const G& g, const CoherentPrefix<typename G::scalar_type>& x, std::size_t m,
                                           std::size_t n) {
  using S = typename G::scalar_type;
  if (m >= n) throw std::invalid_argument("extremality_spread: need m < n");
  if (n > x.depth()) throw std::out_of_range("extremality_spread: prefix shorter than n");
  const auto c = composed_matrix(g, m, n);
  const auto& xm = x.at(m).weights;
  const auto& xn = x.at(n).weights;
  Accumulator<S> acc;
  for (std::size_t v = 0; v < c.source_size(); ++v) {
    if (is_zero(xn[v])) continue;
    const auto col = c.column(v);
    acc.add(xn[v] * total_variation(col, xm));
  }
  return acc.value();
}

/// Largest coordinate gap between the barycenter of nu_n^m and x_m.
template <EquippedGraphLike G>
double barycenter_error(const G& g, const CoherentPrefix<typename G::scalar_type>& x, std::size_t m, std::size_t n) {
  using S = typename G::scalar_type;
  const auto bary = project(g, x.at(n), m);
  double worst = 0.0;
  for (std::size_t i = 0; i < bary.weights.size(); ++i) {
    S d = bary.weights[i] - x.at(m).weights[i];
    worst = std::max(worst, std::fabs(to_double(d)));
  }
  return worst;
}

struct ExtremalityReport {
  std::size_t m = 0;
  std::size_t n = 0;
  double spread = 0.0;
  double tolerance = 0.0;
  double barycenter_error = 0.0;
  bool extreme_at_tolerance = false;
};

template <EquippedGraphLike G>
ExtremalityReport classify_extremality(const G& g, const CoherentPrefix<typename G::scalar_type>& x, std::size_t m,
                                       std::size_t n, double tolerance) {
  ExtremalityReport r;
  r.m = m;
  r.n = n;
  r.tolerance = tolerance;
  r.spread = to_double(extremality_spread(g, x, m, n));
  r.barycenter_error = barycenter_error(g, x, m, n);
  r.extreme_at_tolerance = r.spread < tolerance;
  return r;
}

struct Cluster {
  std::vector<double> barycenter;
  double weight = 0.0;
  std::size_t atoms = 0;
};

/// Single-linkage clusters (total-variation distance <= radius) of the atoms
/// of nu_n^m. Atoms lighter than mass_floor do not link clusters; each joins
/// the cluster of its nearest heavy atom, ties going to the lower cluster.
/// Sorted by descending weight.
template <EquippedGraphLike G>
std::vector<Cluster> choquet_decompose(const G& g, const CoherentPrefix<typename G::scalar_type>& x, std::size_t m,
                                       std::size_t n, double radius, double mass_floor = 1e-9) {
  if (!(radius >= 0)) throw std::invalid_argument("choquet_decompose: radius must be non-negative");
  const auto cloud = weighted_cloud(g, x, m, n);
  const auto pts = float_points(cloud.points);
  std::vector<double> w;
  for (const auto& q : cloud.weights->weights) w.push_back(to_double(q));

  auto tv = [&](std::size_t a, std::size_t b) { return total_variation<double>(pts[a], pts[b]); };

  std::vector<std::size_t> heavy, light;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (w[v] >= mass_floor) {
      heavy.push_back(v);
    } else if (w[v] > 0) {
      light.push_back(v);
    }
  }
  if (heavy.empty()) {
    heavy.swap(light);
  }

  std::vector<std::size_t> parent(heavy.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < heavy.size(); ++i) {
    for (std::size_t j = i + 1; j < heavy.size(); ++j) {
      if (tv(heavy[i], heavy[j]) <= radius) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // cluster ids in order of their lowest atom
  std::vector<std::size_t> cluster_of(heavy.size());
  std::vector<std::size_t> root_id(heavy.size(), SIZE_MAX);
  std::size_t count = 0;
  for (std::size_t i = 0; i < heavy.size(); ++i) {
    const std::size_t r = find(i);
    if (root_id[r] == SIZE_MAX) root_id[r] = count++;
    cluster_of[i] = root_id[r];
  }

  const std::size_t dim = pts.empty() ? 0 : pts[0].size();
  std::vector<Cluster> clusters(count, Cluster{std::vector<double>(dim, 0.0), 0.0, 0});
  std::vector<Accumulator<double>> mass(count);
  auto add = [&](std::size_t c, std::size_t v) {
    mass[c].add(w[v]);
    for (std::size_t i = 0; i < dim; ++i) clusters[c].barycenter[i] += w[v] * pts[v][i];
    ++clusters[c].atoms;
  };
  for (std::size_t i = 0; i < heavy.size(); ++i) add(cluster_of[i], heavy[i]);
  for (std::size_t v : light) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < heavy.size(); ++i) {
      const double d = tv(v, heavy[i]);
      if (d < best_d || (d == best_d && cluster_of[i] < cluster_of[best])) {
        best_d = d;
        best = i;
      }
    }
    add(cluster_of[best], v);
  }
  for (std::size_t c = 0; c < count; ++c) {
    clusters[c].weight = mass[c].value();
    if (clusters[c].weight > 0) {
      for (double& b : clusters[c].barycenter) b /= clusters[c].weight;
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.weight > b.weight; });
  return clusters;
}

/// W1 between the atoms (positions in [0,1], weights summing to 1) and the
/// uniform distribution on [0,1]: the integral of |F(t) - t|.
inline double uniform_segment_w1(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  // integral of |c - t| for t in [a, b]
  auto piece = [](double c, double a, double b) {
    if (b <= a) return 0.0;
    if (c <= a) return (b * b - a * a) / 2 - c * (b - a);
    if (c >= b) return c * (b - a) - (b * b - a * a) / 2;
    return (c - a) * (c - a) / 2 + (b - c) * (b - c) / 2;
  };
  double total = 0.0, cdf = 0.0, left = 0.0;
  for (const auto& [pos, wt] : atoms) {
    if (pos < 0 || pos > 1) throw std::invalid_argument("uniform_segment_w1: atom outside [0,1]");
    total += piece(cdf, left, pos);
    cdf += wt;
    left = pos;
  }
  total += piece(cdf, left, 1.0);
  return total;
}

// ---------------------------------------------------------------------------
// Martin limits

template <Scalar S>
struct MartinLimitReport {
  std::size_t m = 0;
  double tolerance = 0.0;
  std::size_t window = 0;
  std::vector<VertexId> sequence;
  std::vector<LevelMeasure<S>> measures;
  /// largest pairwise total variation inside the trailing window
  double window_spread = 0.0;
  bool cauchy = false;

  const LevelMeasure<S>& limit() const { return measures.back(); }
};

template <EquippedGraphLike G>
MartinLimitReport<typename G::scalar_type> martin_limit(const G& g, const std::vector<VertexId>& sequence, std::size_t m,
                                                        double tolerance, std::size_t window) {
  if (sequence.empty()) throw std::invalid_argument("martin_limit: empty vertex sequence");
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    if (sequence[i + 1].level <= sequence[i].level) throw std::invalid_argument("martin_limit: levels must increase strictly");
  }
  if (sequence.front().level <= m) throw std::invalid_argument("martin_limit: vertices must lie above level m");
  if (window < 2) throw std::invalid_argument("martin_limit: window must be at least 2");
  MartinLimitReport<typename G::scalar_type> r;
  r.m = m;
  r.tolerance = tolerance;
  r.window = window;
  r.sequence = sequence;
  for (const VertexId& v : sequence) r.measures.push_back(vertex_measure(g, v, m));
  const std::size_t first = r.measures.size() > window ? r.measures.size() - window : 0;
  for (std::size_t i = first; i < r.measures.size(); ++i) {
    for (std::size_t j = i + 1; j < r.measures.size(); ++j) {
      r.window_spread = std::max(r.window_spread, to_double(total_variation(r.measures[i].weights, r.measures[j].weights)));
    }
  }
  r.cauchy = r.measures.size() >= 2 && r.window_spread < tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Poulsen fill distance

inline constexpr std::size_t default_grid_cap = 1'000'000;

struct PoulsenReport {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t resolution = 0;
  std::size_t grid_points = 0;
  std::size_t cloud_points = 0;
  double fill_distance = 0.0;
  std::vector<double> worst_grid_point;
};

/// Number of points i/r on the m-simplex (m+1 coordinates).
inline std::size_t barycentric_grid_size(std::size_t m, std::size_t r) {
  long double c = 1;
  for (std::size_t i = 1; i <= m; ++i) c = c * static_cast<long double>(r + i) / static_cast<long double>(i);
  return static_cast<std::size_t>(std::llround(c));
}

/// Max over the barycentric grid of resolution r on level m of the total
/// variation distance to the nearest mu_v^m, v on levels m+1..n.
template <EquippedGraphLike G>
PoulsenReport poulsen_density(const G& g, std::size_t m, std::size_t n, std::size_t resolution,
                              std::size_t grid_cap = default_grid_cap) {
  if (m >= n) throw std::invalid_argument("poulsen_density: need m < n");
  if (resolution < 1) throw std::invalid_argument("poulsen_density: resolution must be positive");
  detail::check_level(n, g.depth(), "poulsen_density");
  const std::size_t dim = g.level_size(m);
  const std::size_t grid = barycentric_grid_size(dim - 1, resolution);
  if (dim > 1 && (grid > grid_cap || grid == 0)) {
    throw std::length_error("poulsen_density: grid of " + std::to_string(grid) + " points exceeds cap " +
                            std::to_string(grid_cap));
  }
  std::vector<std::vector<double>> cloud;
  {
    auto acc = markov_matrix(g, m);
    for (std::size_t j = m + 1;; ++j) {
      for (std::size_t v = 0; v < acc.source_size(); ++v) {
        std::vector<double> p(dim, 0.0);
        const auto rows = acc.column_rows(v);
        const auto vals = acc.column_values(v);
        for (std::size_t k = 0; k < rows.size(); ++k) p[rows[k]] = to_double(vals[k]);
        cloud.push_back(std::move(p));
      }
      if (j == n) break;
      acc = compose(acc, markov_matrix(g, j));
    }
  }
  PoulsenReport r;
  r.m = m;
  r.n = n;
  r.resolution = resolution;
  r.cloud_points = cloud.size();

  std::vector<std::size_t> counts(dim, 0);
  counts[dim - 1] = resolution;
  std::vector<double> q(dim);
  // enumerate compositions of `resolution` into dim parts
  while (true) {
    for (std::size_t i = 0; i < dim; ++i) q[i] = static_cast<double>(counts[i]) / static_cast<double>(resolution);
    double best = INFINITY;
    for (const auto& p : cloud) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += std::fabs(p[i] - q[i]);
      best = std::min(best, s / 2);
    }
    ++r.grid_points;
    if (best > r.fill_distance || r.worst_grid_point.empty()) {
      r.fill_distance = best;
      r.worst_grid_point = q;
    }
    // next composition: move one unit leftwards
    if (dim == 1) break;
    std::size_t i = dim - 1;
    while (i > 0 && counts[i] == 0) --i;
    if (i == 0) break;
    const std::size_t tail = counts[i];
    counts[i] = 0;
    ++counts[i - 1];
    counts[dim - 1] = tail - 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// projective systems

/// Simplex dimensions d_n and dense projections pi_{n+1,n} (a d_n x d_{n+1}
/// column-stochastic matrix, entry [u][v]).
template <Scalar S>
struct ProjectiveSystem {
  std::vector<std::size_t> dims;
  std::vector<std::vector<std::vector<S>>> maps;

  friend bool operator==(const ProjectiveSystem&, const ProjectiveSystem&) = default;
};

template <Scalar S>
ProjectiveSystem<S> to_projective_system(const EquippedGraph<S>& eg) {
  ProjectiveSystem<S> ps;
  ps.dims = eg.graph().level_sizes();
  for (std::size_t n = 0; n < eg.depth(); ++n) {
    std::vector<std::vector<S>> p(ps.dims[n], std::vector<S>(ps.dims[n + 1], S(0)));
    for (std::size_t v = 0; v < ps.dims[n + 1]; ++v) {
      eg.for_each_predecessor(n + 1, v, [&](std::size_t u, const S& lam) { p[u][v] = lam; });
    }
    ps.maps.push_back(std::move(p));
  }
  return ps;
}

/// Reads the graph back: vertices are simplex vertices, edges the nonzero
/// projection entries, the equipment the entries themselves.
template <Scalar S>
EquippedGraph<S> from_projective_system(const ProjectiveSystem<S>& ps) {
  if (ps.dims.empty() || ps.maps.size() + 1 != ps.dims.size()) throw std::invalid_argument("projective system: malformed");
  std::vector<GradedGraph::Edge> edges;
  for (std::size_t n = 0; n < ps.maps.size(); ++n) {
    if (ps.maps[n].size() != ps.dims[n]) throw std::invalid_argument("projective system: map row count");
    for (std::size_t u = 0; u < ps.dims[n]; ++u) {
      if (ps.maps[n][u].size() != ps.dims[n + 1]) throw std::invalid_argument("projective system: map column count");
      for (std::size_t v = 0; v < ps.dims[n + 1]; ++v) {
        if (!is_zero(ps.maps[n][u][v])) edges.push_back({n, u, v});
      }
    }
  }
  GradedGraph g(ps.dims, std::move(edges));
  std::vector<std::vector<S>> w(g.level_count());
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    for (std::size_t v = 0; v < g.level_size(n); ++v) {
      for (std::size_t u : g.predecessors(n, v)) w[n].push_back(ps.maps[n - 1][u][v]);
    }
  }
  return {std::move(g), Equipment<S>(std::move(w))};
}

}  // namespace bratteli
