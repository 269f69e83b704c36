#pragma once

// Graph families used as fixtures: Pascal, Young, unordered pairs, random.

#include "graph.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bratteli {

/// Pascal graph truncated at level N: vertices (n,k), 0 <= k <= n.
inline GradedGraph pascal(std::size_t depth) {
  if (depth < 1) throw std::invalid_argument("pascal: depth must be >= 1");
  std::vector<std::size_t> sizes(depth + 1);
  std::vector<GradedGraph::Edge> edges;
  edges.reserve(depth * (depth + 1));
  for (std::size_t n = 0; n <= depth; ++n) sizes[n] = n + 1;
  for (std::size_t n = 0; n < depth; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      edges.push_back({n, k, k});
      edges.push_back({n, k, k + 1});
    }
  }
  return {std::move(sizes), std::move(edges)};
}

using Partition = std::vector<unsigned>;

inline std::string partition_label(const Partition& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

/// Partitions of n in reverse-lexicographic order: (n), (n-1,1), (n-2,2), ...
inline std::vector<Partition> partitions(unsigned n) {
  std::vector<Partition> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  Partition p{n};
  while (true) {
    out.push_back(p);
    // rightmost part larger than one
    std::size_t i = p.size();
    unsigned ones = 0;
    while (i > 0 && p[i - 1] == 1) {
      --i;
      ++ones;
    }
    if (i == 0) break;
    unsigned rest = ones + 1;
    const unsigned part = --p[i - 1];
    p.resize(i);
    while (rest > 0) {
      const unsigned take = std::min(part, rest);
      p.push_back(take);
      rest -= take;
    }
  }
  return out;
}

/// Young graph truncated at level N; level n lists the partitions of n.
inline GradedGraph young(std::size_t depth) {
  if (depth < 1) throw std::invalid_argument("young: depth must be >= 1");
  std::vector<std::vector<Partition>> levels(depth + 1);
  std::vector<std::map<Partition, std::size_t>> index(depth + 1);
  std::vector<std::size_t> sizes(depth + 1);
  std::vector<std::vector<std::string>> labels(depth + 1);
  for (std::size_t n = 0; n <= depth; ++n) {
    levels[n] = partitions(static_cast<unsigned>(n));
    sizes[n] = levels[n].size();
    for (std::size_t i = 0; i < levels[n].size(); ++i) {
      index[n][levels[n][i]] = i;
      labels[n].push_back(partition_label(levels[n][i]));
    }
  }
  std::vector<GradedGraph::Edge> edges;
  for (std::size_t n = 1; n <= depth; ++n) {
    for (std::size_t v = 0; v < levels[n].size(); ++v) {
      const Partition& nu = levels[n][v];
      // removable corners: rows whose length exceeds the next row's
      for (std::size_t r = 0; r < nu.size(); ++r) {
        const unsigned next = r + 1 < nu.size() ? nu[r + 1] : 0;
        if (nu[r] <= next) continue;
        Partition mu = nu;
        --mu[r];
        if (mu[r] == 0) mu.pop_back();
        edges.push_back({n - 1, index[n - 1].at(mu), v});
      }
    }
  }
  return {std::move(sizes), std::move(edges), std::move(labels)};
}

inline constexpr std::size_t default_level_cap = 50'000;

/// Graph of unordered pairs: level 1 has `base` vertices, level n+1 holds the
/// multisets {a, b} (a <= b) of level-n vertices, joined to a and to b.
/// Throws std::length_error when a level would exceed `level_cap`.
inline GradedGraph unordered_pairs(std::size_t depth, std::size_t base, std::size_t level_cap = default_level_cap) {
  if (depth < 1) throw std::invalid_argument("unordered_pairs: depth must be >= 1");
  if (base < 2) throw std::invalid_argument("unordered_pairs: base must be >= 2");
  if (base > level_cap) throw std::length_error("unordered_pairs: level 1 exceeds the level cap");
  std::vector<std::size_t> sizes{1, base};
  std::vector<std::vector<std::string>> labels{{"root"}, {}};
  std::vector<GradedGraph::Edge> edges;
  for (std::size_t a = 0; a < base; ++a) {
    edges.push_back({0, 0, a});
    labels[1].push_back(std::to_string(a));
  }
  for (std::size_t n = 1; n < depth; ++n) {
    const std::size_t s = sizes[n];
    const std::size_t next = s * (s + 1) / 2;
    if (next > level_cap) {
      throw std::length_error("unordered_pairs: level " + std::to_string(n + 1) + " would hold " + std::to_string(next) +
                              " vertices (cap " + std::to_string(level_cap) + ")");
    }
    sizes.push_back(next);
    labels.emplace_back();
    labels.back().reserve(next);
    std::size_t v = 0;
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = a; b < s; ++b, ++v) {
        edges.push_back({n, a, v});
        if (b != a) edges.push_back({n, b, v});
        labels.back().push_back("{" + std::to_string(a) + "," + std::to_string(b) + "}");
      }
    }
  }
  return {std::move(sizes), std::move(edges), std::move(labels)};
}

/// Seeded random graded graph. Level widths are drawn from [1, max_width];
/// each consecutive pair is an edge with probability `density`, then every
/// vertex without a predecessor or successor gets one at random.
inline GradedGraph random_graph(std::size_t depth, std::uint64_t seed, double density, std::size_t max_width = 5) {
  if (depth < 1) throw std::invalid_argument("random_graph: depth must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("random_graph: density must lie in (0,1]");
  if (max_width < 1) throw std::invalid_argument("random_graph: max_width must be >= 1");
  // std::mt19937_64 output is fixed by the standard; the mapping below avoids
  // the implementation-defined std distributions.
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto below = [&](std::size_t k) { return static_cast<std::size_t>(rng() % k); };

  std::vector<std::size_t> sizes{1};
  for (std::size_t n = 1; n <= depth; ++n) sizes.push_back(1 + below(max_width));
  std::vector<GradedGraph::Edge> edges;
  for (std::size_t n = 0; n < depth; ++n) {
    std::vector<char> has_pred(sizes[n + 1], 0), has_succ(sizes[n], 0);
    std::vector<std::vector<char>> present(sizes[n], std::vector<char>(sizes[n + 1], 0));
    for (std::size_t u = 0; u < sizes[n]; ++u) {
      for (std::size_t v = 0; v < sizes[n + 1]; ++v) {
        if (density >= 1.0 || uniform() < density) present[u][v] = 1;
      }
    }
    for (std::size_t v = 0; v < sizes[n + 1]; ++v) {
      bool any = false;
      for (std::size_t u = 0; u < sizes[n]; ++u) any = any || present[u][v];
      if (!any) present[below(sizes[n])][v] = 1;
    }
    for (std::size_t u = 0; u < sizes[n]; ++u) {
      bool any = false;
      for (std::size_t v = 0; v < sizes[n + 1]; ++v) any = any || present[u][v];
      if (!any) present[u][below(sizes[n + 1])] = 1;
    }
    for (std::size_t u = 0; u < sizes[n]; ++u) {
      for (std::size_t v = 0; v < sizes[n + 1]; ++v) {
        if (present[u][v]) edges.push_back({n, u, v});
      }
    }
  }
  return {std::move(sizes), std::move(edges)};
}

/// Pascal graph with central equipment in closed form: lambda from (n,k) to
/// (n-1,k-1) is k/n and to (n-1,k) is (n-k)/n. Nothing is stored, so the
/// depth can run into the thousands.
template <Scalar S>
class PascalCentral {
 public:
  using scalar_type = S;

  explicit PascalCentral(std::size_t depth) : depth_(depth) {}

  std::size_t depth() const { return depth_; }
  std::size_t level_size(std::size_t n) const { return n + 1; }

  template <class F>
  void for_each_predecessor(std::size_t n, std::size_t k, F&& f) const {
    if (n == 0) return;
    const long nn = static_cast<long>(n);
    const long kk = static_cast<long>(k);
    if (k > 0) f(k - 1, from_ratio<S>(kk, nn));
    if (k < n) f(k, from_ratio<S>(nn - kk, nn));
  }

 private:
  std::size_t depth_;
};

struct GraphSpec {
  enum class Kind { pascal, young, unordered_pairs, random };

  Kind kind = Kind::pascal;
  std::size_t depth = 1;
  std::size_t base = 3;
  std::uint64_t seed = 0;
  double density = 0.5;
  std::size_t max_width = 5;
  std::size_t level_cap = default_level_cap;
};

inline GraphSpec::Kind parse_kind(std::string_view s) {
  if (s == "pascal") return GraphSpec::Kind::pascal;
  if (s == "young") return GraphSpec::Kind::young;
  if (s == "unordered_pairs" || s == "unordered-pairs") return GraphSpec::Kind::unordered_pairs;
  if (s == "random") return GraphSpec::Kind::random;
  throw std::invalid_argument("unknown graph kind: " + std::string(s));
}

inline std::string_view to_string(GraphSpec::Kind k) {
  switch (k) {
    case GraphSpec::Kind::pascal: return "pascal";
    case GraphSpec::Kind::young: return "young";
    case GraphSpec::Kind::unordered_pairs: return "unordered_pairs";
    case GraphSpec::Kind::random: return "random";
  }
  return "?";
}

inline GradedGraph build(const GraphSpec& spec) {
  if (spec.depth < 1) throw std::invalid_argument("graph depth must be >= 1");
  switch (spec.kind) {
    case GraphSpec::Kind::pascal: return pascal(spec.depth);
    case GraphSpec::Kind::young: return young(spec.depth);
    case GraphSpec::Kind::unordered_pairs: return unordered_pairs(spec.depth, spec.base, spec.level_cap);
    case GraphSpec::Kind::random: return random_graph(spec.depth, spec.seed, spec.density, spec.max_width);
  }
  throw std::invalid_argument("unknown graph kind");
}

}  // namespace bratteli
