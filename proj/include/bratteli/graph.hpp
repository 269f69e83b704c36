#pragma once

// Graded graphs truncated at a finite depth, equipments (cotransition
// probabilities), path utilities, dimensions and the Markov cocycle.

#include "numeric.hpp"

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace bratteli {

struct VertexId {
  std::size_t level = 0;
  std::size_t index = 0;

  friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

inline std::string to_string(VertexId v) {
  return "(" + std::to_string(v.level) + "," + std::to_string(v.index) + ")";
}

/// Levels 0..depth(); level 0 is expected to hold the single initial vertex.
/// Edges join level n to level n+1 and are stored once per endpoint in
/// compressed rows (predecessors sorted by index, successors likewise).
class GradedGraph {
 public:
  struct Edge {
    std::size_t level = 0;  ///< level of the lower endpoint
    std::size_t from = 0;   ///< index in level `level`
    std::size_t to = 0;     ///< index in level `level + 1`

    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  GradedGraph() = default;

  /// Throws std::invalid_argument only for input that cannot be stored
  /// (no levels, out-of-range indices). Semantic invariants are checked by
  /// validate().
  GradedGraph(std::vector<std::size_t> level_sizes, std::vector<Edge> edges,
              std::vector<std::vector<std::string>> labels = {})
      : sizes_(std::move(level_sizes)), labels_(std::move(labels)) {
    if (sizes_.empty()) throw std::invalid_argument("graph needs at least one level");
    for (const Edge& e : edges) {
      if (e.level + 1 >= sizes_.size()) {
        throw std::invalid_argument("edge leaves the stored levels at level " + std::to_string(e.level));
      }
      if (e.from >= sizes_[e.level] || e.to >= sizes_[e.level + 1]) {
        throw std::invalid_argument("edge endpoint index out of range at level " + std::to_string(e.level));
      }
    }
    if (!labels_.empty()) {
      if (labels_.size() != sizes_.size()) throw std::invalid_argument("labels must cover every level");
      for (std::size_t n = 0; n < sizes_.size(); ++n) {
        if (!labels_[n].empty() && labels_[n].size() != sizes_[n]) {
          throw std::invalid_argument("label count mismatch at level " + std::to_string(n));
        }
      }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.level, a.to, a.from) < std::tie(b.level, b.to, b.from);
    });
    build_rows(edges);
  }

  std::size_t depth() const { return sizes_.size() - 1; }
  std::size_t level_count() const { return sizes_.size(); }
  std::size_t level_size(std::size_t n) const { return sizes_.at(n); }
  const std::vector<std::size_t>& level_sizes() const { return sizes_; }

  std::size_t vertex_count() const {
    std::size_t total = 0;
    for (std::size_t s : sizes_) total += s;
    return total;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& rows : pred_) total += rows.targets.size();
    return total;
  }

  /// Predecessors (indices in level n-1) of vertex v in level n >= 1.
  std::span<const std::size_t> predecessors(std::size_t n, std::size_t v) const {
    const Rows& r = pred_.at(n);
    return {r.targets.data() + r.offsets.at(v), r.targets.data() + r.offsets.at(v + 1)};
  }

  /// Successors (indices in level n+1) of vertex u in level n < depth().
  std::span<const std::size_t> successors(std::size_t n, std::size_t u) const {
    const Rows& r = succ_.at(n);
    return {r.targets.data() + r.offsets.at(u), r.targets.data() + r.offsets.at(u + 1)};
  }

  /// Position of the edge (u in level n-1, v in level n) within the
  /// predecessor row storage of level n; equipments are aligned with it.
  std::size_t predecessor_offset(std::size_t n, std::size_t v) const { return pred_.at(n).offsets.at(v); }
  std::size_t predecessor_slots(std::size_t n) const { return n == 0 ? 0 : pred_.at(n).targets.size(); }

  bool has_edge(std::size_t n, std::size_t u, std::size_t v) const {
    if (n + 1 >= sizes_.size() || u >= sizes_[n] || v >= sizes_[n + 1]) return false;
    auto preds = predecessors(n + 1, v);
    return std::binary_search(preds.begin(), preds.end(), u);
  }

  /// Edges in canonical order: by level, then upper endpoint, then lower endpoint.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (std::size_t n = 1; n < sizes_.size(); ++n) {
      for (std::size_t v = 0; v < sizes_[n]; ++v) {
        for (std::size_t u : predecessors(n, v)) out.push_back({n - 1, u, v});
      }
    }
    return out;
  }

  std::string_view label(VertexId v) const {
    if (labels_.empty() || labels_.at(v.level).empty()) return {};
    return labels_[v.level].at(v.index);
  }
  const std::vector<std::vector<std::string>>& labels() const { return labels_; }

  bool contains(VertexId v) const { return v.level < sizes_.size() && v.index < sizes_[v.level]; }

  friend bool operator==(const GradedGraph& a, const GradedGraph& b) {
    return a.sizes_ == b.sizes_ && a.edges() == b.edges();
  }

 private:
  struct Rows {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> targets;
  };

  void build_rows(const std::vector<Edge>& sorted) {
    const std::size_t levels = sizes_.size();
    pred_.assign(levels, {});
    succ_.assign(levels, {});
    pred_[0].offsets.assign(sizes_[0] + 1, 0);
    succ_[levels - 1].offsets.assign(sizes_[levels - 1] + 1, 0);

    // predecessor rows: edges are sorted by (level, to, from)
    for (std::size_t n = 1; n < levels; ++n) pred_[n].offsets.assign(sizes_[n] + 1, 0);
    for (const Edge& e : sorted) ++pred_[e.level + 1].offsets[e.to + 1];
    for (std::size_t n = 1; n < levels; ++n) {
      auto& off = pred_[n].offsets;
      for (std::size_t i = 1; i < off.size(); ++i) off[i] += off[i - 1];
      pred_[n].targets.reserve(off.back());
    }
    for (const Edge& e : sorted) pred_[e.level + 1].targets.push_back(e.from);

    for (std::size_t n = 0; n + 1 < levels; ++n) succ_[n].offsets.assign(sizes_[n] + 1, 0);
    for (const Edge& e : sorted) ++succ_[e.level].offsets[e.from + 1];
    for (std::size_t n = 0; n + 1 < levels; ++n) {
      auto& off = succ_[n].offsets;
      for (std::size_t i = 1; i < off.size(); ++i) off[i] += off[i - 1];
      succ_[n].targets.assign(off.back(), 0);
    }
    std::vector<std::vector<std::size_t>> fill(levels);
    for (std::size_t n = 0; n + 1 < levels; ++n) fill[n].assign(succ_[n].offsets.begin(), succ_[n].offsets.end() - 1);
    // sorted by `to` within a level, so successor rows come out ascending
    for (const Edge& e : sorted) succ_[e.level].targets[fill[e.level][e.from]++] = e.to;
  }

  std::vector<std::size_t> sizes_;
  std::vector<Rows> pred_;
  std::vector<Rows> succ_;
  std::vector<std::vector<std::string>> labels_;
};

/// Cotransition probabilities, aligned slot-for-slot with the predecessor
/// rows of a GradedGraph: weights(n)[predecessor_offset(n, v) + k] is the
/// probability of the k-th predecessor of v.
template <Scalar S>
class Equipment {
 public:
  Equipment() = default;
  explicit Equipment(std::vector<std::vector<S>> per_level) : weights_(std::move(per_level)) {}

  std::span<const S> level(std::size_t n) const { return weights_.at(n); }
  std::size_t level_count() const { return weights_.size(); }
  const std::vector<std::vector<S>>& data() const { return weights_; }

  friend bool operator==(const Equipment&, const Equipment&) = default;

 private:
  std::vector<std::vector<S>> weights_;
};

/// Anything that can answer "which vertices precede v, with what probability".
/// Stored graphs and closed-form families (see zoo.hpp) both model it.
template <class G>
concept EquippedGraphLike = requires(const G& g, std::size_t n) {
  typename G::scalar_type;
  requires Scalar<typename G::scalar_type>;
  { g.depth() } -> std::convertible_to<std::size_t>;
  { g.level_size(n) } -> std::convertible_to<std::size_t>;
  g.for_each_predecessor(n, n, [](std::size_t, const typename G::scalar_type&) {});
};

template <Scalar S>
class EquippedGraph {
 public:
  using scalar_type = S;

  EquippedGraph() = default;

  /// Throws std::invalid_argument unless the equipment has exactly one
  /// weight per stored edge.
  EquippedGraph(GradedGraph graph, Equipment<S> equipment)
      : graph_(std::move(graph)), equipment_(std::move(equipment)) {
    if (equipment_.level_count() != graph_.level_count()) {
      throw std::invalid_argument("equipment level count does not match graph");
    }
    for (std::size_t n = 0; n < graph_.level_count(); ++n) {
      if (equipment_.level(n).size() != graph_.predecessor_slots(n)) {
        throw std::invalid_argument("equipment is not defined on exactly the edges of level " + std::to_string(n));
      }
    }
  }

  const GradedGraph& graph() const { return graph_; }
  const Equipment<S>& equipment() const { return equipment_; }

  std::size_t depth() const { return graph_.depth(); }
  std::size_t level_size(std::size_t n) const { return graph_.level_size(n); }

  std::span<const std::size_t> predecessors(std::size_t n, std::size_t v) const { return graph_.predecessors(n, v); }

  /// The cotransition vector of v (level n >= 1), aligned with predecessors(n, v).
  std::span<const S> cotransitions(std::size_t n, std::size_t v) const {
    const auto count = graph_.predecessors(n, v).size();
    return equipment_.level(n).subspan(graph_.predecessor_offset(n, v), count);
  }

  template <class F>
  void for_each_predecessor(std::size_t n, std::size_t v, F&& f) const {
    const auto preds = predecessors(n, v);
    const auto probs = cotransitions(n, v);
    for (std::size_t k = 0; k < preds.size(); ++k) f(preds[k], probs[k]);
  }

  /// lambda_v^u for v in level n+1 and u in level n; nullopt when there is no edge.
  std::optional<S> lambda(std::size_t n, std::size_t u, std::size_t v) const {
    const auto preds = predecessors(n + 1, v);
    const auto it = std::lower_bound(preds.begin(), preds.end(), u);
    if (it == preds.end() || *it != u) return std::nullopt;
    return cotransitions(n + 1, v)[static_cast<std::size_t>(it - preds.begin())];
  }

  friend bool operator==(const EquippedGraph&, const EquippedGraph&) = default;

 private:
  GradedGraph graph_;
  Equipment<S> equipment_;
};

/// Explicit float view of an exact equipment.
inline EquippedGraph<double> to_float(const EquippedGraph<Rational>& eg) {
  std::vector<std::vector<double>> w;
  w.reserve(eg.equipment().level_count());
  for (const auto& lvl : eg.equipment().data()) {
    std::vector<double> row;
    row.reserve(lvl.size());
    for (const Rational& q : lvl) row.push_back(q.get_d());
    w.push_back(std::move(row));
  }
  return {eg.graph(), Equipment<double>(std::move(w))};
}

/// A path v_0 < v_1 < ... < v_k; v_0 sits at `start_level`.
struct FinitePath {
  std::size_t start_level = 0;
  std::vector<std::size_t> indices;

  std::size_t end_level() const { return start_level + indices.size() - 1; }
  VertexId front() const { return {start_level, indices.front()}; }
  VertexId back() const { return {end_level(), indices.back()}; }

  friend auto operator<=>(const FinitePath&, const FinitePath&) = default;
};

inline bool is_path(const GradedGraph& g, const FinitePath& p) {
  if (p.indices.empty() || p.end_level() > g.depth()) return false;
  for (std::size_t k = 0; k < p.indices.size(); ++k) {
    if (p.indices[k] >= g.level_size(p.start_level + k)) return false;
  }
  for (std::size_t k = 0; k + 1 < p.indices.size(); ++k) {
    if (!g.has_edge(p.start_level + k, p.indices[k], p.indices[k + 1])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// validation

struct Violation {
  std::string rule;
  std::string where;

  std::string message() const { return rule + " at " + where; }
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
  }
};

namespace rules {
inline constexpr std::string_view root = "level 0 must hold exactly one vertex";
inline constexpr std::string_view empty_level = "empty level";
inline constexpr std::string_view no_successor = "no successor";
inline constexpr std::string_view no_predecessor = "no predecessor";
inline constexpr std::string_view duplicate_edge = "duplicate edge";
inline constexpr std::string_view non_positive = "non-positive probability";
inline constexpr std::string_view column_sum = "column sum != 1";
}  // namespace rules

inline ValidationReport validate(const GradedGraph& g) {
  ValidationReport report;
  auto add = [&](std::string_view rule, std::string where) { report.violations.push_back({std::string(rule), std::move(where)}); };
  if (g.level_size(0) != 1) add(rules::root, "level 0");
  for (std::size_t n = 0; n < g.level_count(); ++n) {
    if (g.level_size(n) == 0) add(rules::empty_level, "level " + std::to_string(n));
    for (std::size_t v = 0; v < g.level_size(n); ++v) {
      if (n < g.depth() && g.successors(n, v).empty()) add(rules::no_successor, to_string(VertexId{n, v}));
      if (n > 0) {
        const auto preds = g.predecessors(n, v);
        if (preds.empty()) add(rules::no_predecessor, to_string(VertexId{n, v}));
        for (std::size_t k = 1; k < preds.size(); ++k) {
          if (preds[k] == preds[k - 1]) {
            add(rules::duplicate_edge, to_string(VertexId{n - 1, preds[k]}) + "->" + to_string(VertexId{n, v}));
          }
        }
      }
    }
  }
  return report;
}

template <Scalar S>
ValidationReport validate(const EquippedGraph<S>& eg) {
  ValidationReport report = validate(eg.graph());
  for (std::size_t n = 1; n < eg.graph().level_count(); ++n) {
    for (std::size_t v = 0; v < eg.level_size(n); ++v) {
      const auto preds = eg.predecessors(n, v);
      const auto probs = eg.cotransitions(n, v);
      if (preds.empty()) continue;
      Accumulator<S> sum;
      for (std::size_t k = 0; k < preds.size(); ++k) {
        if (!(probs[k] > 0)) {
          report.violations.push_back({std::string(rules::non_positive),
                                       to_string(VertexId{n - 1, preds[k]}) + "->" + to_string(VertexId{n, v})});
        }
        sum.add(probs[k]);
      }
      if (!is_one(sum.value())) {
        std::ostringstream os;
        os << to_string(VertexId{n, v}) << " (sum " << to_double(sum.value()) << ")";
        report.violations.push_back({std::string(rules::column_sum), os.str()});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// dimensions and central equipment

/// dim(v) = number of paths from the initial vertex to v.
class DimensionTable {
 public:
  explicit DimensionTable(std::vector<std::vector<Integer>> dims) : dims_(std::move(dims)) {}

  const Integer& at(VertexId v) const { return dims_.at(v.level).at(v.index); }
  const std::vector<Integer>& level(std::size_t n) const { return dims_.at(n); }
  std::size_t level_count() const { return dims_.size(); }

 private:
  std::vector<std::vector<Integer>> dims_;
};

inline DimensionTable dimensions(const GradedGraph& g) {
  std::vector<std::vector<Integer>> dims(g.level_count());
  dims[0].assign(g.level_size(0), Integer(1));
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    dims[n].assign(g.level_size(n), Integer(0));
    for (std::size_t v = 0; v < g.level_size(n); ++v) {
      for (std::size_t u : g.predecessors(n, v)) dims[n][v] += dims[n - 1][u];
    }
  }
  return DimensionTable(std::move(dims));
}

/// lambda_v^u = dim(u) / sum_{u' < v} dim(u'), exact.
inline Equipment<Rational> central_equipment(const GradedGraph& g) {
  const DimensionTable dims = dimensions(g);
  std::vector<std::vector<Rational>> w(g.level_count());
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    w[n].reserve(g.predecessor_slots(n));
    for (std::size_t v = 0; v < g.level_size(n); ++v) {
      const Integer& total = dims.at({n, v});
      for (std::size_t u : g.predecessors(n, v)) {
        Rational q(dims.at({n - 1, u}), total);
        q.canonicalize();
        w[n].push_back(std::move(q));
      }
    }
  }
  return Equipment<Rational>(std::move(w));
}

inline EquippedGraph<Rational> with_central_equipment(GradedGraph g) {
  Equipment<Rational> e = central_equipment(g);
  return {std::move(g), std::move(e)};
}

// ---------------------------------------------------------------------------
// paths and the cocycle

/// Product of cotransition probabilities along a path.
template <Scalar S>
S path_weight(const EquippedGraph<S>& eg, const FinitePath& p) {
  if (!is_path(eg.graph(), p)) throw std::invalid_argument("not a path of the graph");
  S w(1);
  for (std::size_t k = 0; k + 1 < p.indices.size(); ++k) {
    w *= *eg.lambda(p.start_level + k, p.indices[k], p.indices[k + 1]);
  }
  return w;
}

/// Ratio of cotransition products along two paths from the initial vertex
/// to a common endpoint.
template <Scalar S>
S cocycle(const EquippedGraph<S>& eg, const FinitePath& p1, const FinitePath& p2) {
  if (p1.indices.empty() || p2.indices.empty()) throw std::invalid_argument("empty path");
  if (p1.start_level != 0 || p2.start_level != 0) throw std::invalid_argument("cocycle paths must start at the initial vertex");
  if (p1.back() != p2.back()) throw std::invalid_argument("paths end at different vertices: not comparable");
  const S w1 = path_weight(eg, p1);
  const S w2 = path_weight(eg, p2);
  if (!(w1 > 0) || !(w2 > 0)) throw std::invalid_argument("path carries zero probability");
  S r = w1;
  r /= w2;
  return r;
}

/// Number of paths u -> v by dynamic programming over the intermediate levels.
inline Integer count_paths(const GradedGraph& g, VertexId u, VertexId v) {
  if (!g.contains(u) || !g.contains(v)) throw std::invalid_argument("vertex out of range");
  if (u.level > v.level) return 0;
  if (u.level == v.level) return u.index == v.index ? 1 : 0;
  std::vector<Integer> cur(g.level_size(u.level), Integer(0));
  cur[u.index] = 1;
  for (std::size_t n = u.level + 1; n <= v.level; ++n) {
    std::vector<Integer> next(g.level_size(n), Integer(0));
    for (std::size_t w = 0; w < next.size(); ++w) {
      for (std::size_t p : g.predecessors(n, w)) next[w] += cur[p];
    }
    cur = std::move(next);
  }
  return cur[v.index];
}

/// All paths u -> v in lexicographic order of vertex indices. Throws
/// std::length_error when there are more than `cap` of them.
inline std::vector<FinitePath> enumerate_paths(const GradedGraph& g, VertexId u, VertexId v, std::size_t cap) {
  if (!g.contains(u) || !g.contains(v)) throw std::invalid_argument("vertex out of range");
  if (u.level >= v.level) throw std::invalid_argument("enumerate_paths needs level(u) < level(v)");
  const Integer count = count_paths(g, u, v);
  if (count > Integer(static_cast<unsigned long>(cap))) {
    throw std::length_error("path count " + count.get_str() + " exceeds cap " + std::to_string(cap));
  }
  std::vector<FinitePath> out;
  if (count == 0) return out;
  out.reserve(count.get_ui());

  // reachable-to-v marks prune dead branches
  std::vector<std::vector<char>> reaches(v.level + 1);
  reaches[v.level].assign(g.level_size(v.level), 0);
  reaches[v.level][v.index] = 1;
  for (std::size_t n = v.level; n > u.level; --n) {
    reaches[n - 1].assign(g.level_size(n - 1), 0);
    for (std::size_t w = 0; w < g.level_size(n); ++w) {
      if (!reaches[n][w]) continue;
      for (std::size_t p : g.predecessors(n, w)) reaches[n - 1][p] = 1;
    }
  }

  FinitePath cur{u.level, {u.index}};
  auto dfs = [&](auto&& self) -> void {
    const std::size_t level = cur.end_level();
    if (level == v.level) {
      out.push_back(cur);
      return;
    }
    for (std::size_t s : g.successors(level, cur.indices.back())) {
      if (!reaches[level + 1][s]) continue;
      cur.indices.push_back(s);
      self(self);
      cur.indices.pop_back();
    }
  };
  dfs(dfs);
  return out;
}

}  // namespace bratteli
