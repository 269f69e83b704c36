#pragma once

// JSON interchange for graphs and equipments.
//
//   {
//     "format": "bratteli-graph/1",
//     "level_sizes": [1, 2, 3],
//     "edges": [[n, u, v], ...],           u on level n, v on level n+1
//     "labels": [["root"], ["a", "b"], ...] (optional)
//     "lambda": [[n, u, v, num, den], ...] (exact) or [[n, u, v, x], ...]
//   }
//
// Rational numerators and denominators are JSON integers when they fit in
// 64 bits and decimal strings otherwise. Edges and lambdas are written in
// (level, v, u) order.

#include "graph.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bratteli {

using json = nlohmann::ordered_json;

inline constexpr const char* graph_format = "bratteli-graph/1";

namespace detail {

inline json integer_to_json(const Integer& z) {
  if (z.fits_slong_p()) return json(z.get_si());
  return json(z.get_str());
}

inline Integer integer_from_json(const json& j) {
  if (j.is_number_integer()) return Integer(std::to_string(j.get<long long>()));
  if (j.is_number_unsigned()) return Integer(std::to_string(j.get<unsigned long long>()));
  if (j.is_string()) {
    Integer z;
    if (z.set_str(j.get<std::string>(), 10) != 0) throw std::invalid_argument("bad integer literal in graph file");
    return z;
  }
  throw std::invalid_argument("expected an integer in graph file");
}

inline std::size_t index_from_json(const json& j) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw std::invalid_argument("expected a non-negative index in graph file");
  return static_cast<std::size_t>(j.get<long long>());
}

}  // namespace detail

inline json graph_to_json(const GradedGraph& g) {
  json out;
  out["format"] = graph_format;
  out["level_sizes"] = g.level_sizes();
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back({e.level, e.from, e.to});
  out["edges"] = std::move(edges);
  if (!g.labels().empty()) out["labels"] = g.labels();
  return out;
}

template <Scalar S>
json graph_to_json(const EquippedGraph<S>& eg) {
  json out = graph_to_json(eg.graph());
  json lam = json::array();
  const GradedGraph& g = eg.graph();
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    for (std::size_t v = 0; v < g.level_size(n); ++v) {
      const auto preds = g.predecessors(n, v);
      const auto probs = eg.cotransitions(n, v);
      for (std::size_t k = 0; k < preds.size(); ++k) {
        if constexpr (std::same_as<S, Rational>) {
          lam.push_back({n - 1, preds[k], v, detail::integer_to_json(probs[k].get_num()),
                         detail::integer_to_json(probs[k].get_den())});
        } else {
          lam.push_back({n - 1, preds[k], v, probs[k]});
        }
      }
    }
  }
  out["lambda"] = std::move(lam);
  return out;
}

/// A graph file: the graph plus whichever equipment it carries.
struct LoadedGraph {
  GradedGraph graph;
  std::optional<Equipment<Rational>> exact;
  std::optional<Equipment<double>> floating;

  bool has_equipment() const { return exact.has_value() || floating.has_value(); }
};

inline LoadedGraph graph_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("graph file must hold a JSON object");
  if (!j.contains("level_sizes") || !j.contains("edges")) throw std::invalid_argument("graph file needs level_sizes and edges");
  std::vector<std::size_t> sizes;
  for (const auto& s : j.at("level_sizes")) sizes.push_back(detail::index_from_json(s));
  if (sizes.empty()) throw std::invalid_argument("graph file has no levels");
  std::vector<GradedGraph::Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("edges must be [n, u, v] triples");
    const GradedGraph::Edge edge{detail::index_from_json(e[0]), detail::index_from_json(e[1]), detail::index_from_json(e[2])};
    if (edge.level + 1 >= sizes.size() || edge.from >= sizes[edge.level] || edge.to >= sizes[edge.level + 1]) {
      throw std::invalid_argument("edge out of range in graph file");
    }
    edges.push_back(edge);
  }
  std::vector<std::vector<std::string>> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
  LoadedGraph out{GradedGraph(sizes, edges, labels), std::nullopt, std::nullopt};
  if (!j.contains("lambda")) return out;

  const GradedGraph& g = out.graph;
  const auto& lam = j.at("lambda");
  bool exact = true;
  for (const auto& l : lam) {
    if (!l.is_array() || (l.size() != 4 && l.size() != 5)) throw std::invalid_argument("lambda entries must have 4 or 5 fields");
    if (l.size() == 4) exact = false;
  }
  std::vector<std::vector<Rational>> wq(g.level_count());
  std::vector<std::vector<double>> wd(g.level_count());
  std::vector<std::vector<char>> seen(g.level_count());
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    wq[n].assign(g.predecessor_slots(n), Rational(0));
    wd[n].assign(g.predecessor_slots(n), 0.0);
    seen[n].assign(g.predecessor_slots(n), 0);
  }
  for (const auto& l : lam) {
    const std::size_t n = detail::index_from_json(l[0]) + 1;
    const std::size_t u = detail::index_from_json(l[1]);
    const std::size_t v = detail::index_from_json(l[2]);
    if (n >= g.level_count() || v >= g.level_size(n)) throw std::invalid_argument("lambda entry out of range");
    const auto preds = g.predecessors(n, v);
    const auto it = std::lower_bound(preds.begin(), preds.end(), u);
    if (it == preds.end() || *it != u) throw std::invalid_argument("lambda given on a missing edge");
    const std::size_t slot = g.predecessor_offset(n, v) + static_cast<std::size_t>(it - preds.begin());
    if (seen[n][slot]) throw std::invalid_argument("lambda given twice for one edge");
    seen[n][slot] = 1;
    if (exact) {
      const Integer den = detail::integer_from_json(l[4]);
      if (den == 0) throw std::invalid_argument("lambda with zero denominator");
      Rational q(detail::integer_from_json(l[3]), den);
      q.canonicalize();
      wq[n][slot] = q;
    } else {
      wd[n][slot] = l.size() == 5 ? (detail::integer_from_json(l[3]).get_d() / detail::integer_from_json(l[4]).get_d())
                                  : l[3].get<double>();
    }
  }
  for (std::size_t n = 1; n < g.level_count(); ++n) {
    for (char s : seen[n]) {
      if (!s) throw std::invalid_argument("lambda missing for an edge on level " + std::to_string(n));
    }
  }
  if (exact) {
    out.exact = Equipment<Rational>(std::move(wq));
  } else {
    out.floating = Equipment<double>(std::move(wd));
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace bratteli
