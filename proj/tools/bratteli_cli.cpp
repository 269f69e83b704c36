// Command-line front end: graph generators, boundary and simplex-limit
// analyses, intrinsic-metric diagnostics and exports.
//
// Exit status: 0 success, 1 unexpected failure, 2 configuration error,
// 3 validation failure, 4 resource cap exceeded.

#include <bratteli/bratteli.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace bt = bratteli;
using bt::json;
using bt::Rational;

namespace {

enum ExitCode { exit_ok = 0, exit_other = 1, exit_config = 2, exit_validation = 3, exit_resource = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string mode = "rational";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  bool timing = false;

  std::string graph = "pascal";
  std::size_t depth = 8;
  std::size_t base = 3;
  double density = 0.5;
  std::size_t max_width = 5;
  std::size_t level_cap = bt::default_level_cap;
  std::string equipment = "auto";

  std::string kind;
  std::string vertex, u, v;
  std::size_t k = 0;
  std::size_t m = 1;
  std::size_t n = 0;
  std::string weights;
  std::string family;
  std::string point_file;
  std::string query;
  bool monotone = false;
  double feasibility = 1e-8;
  double tol = 0.05;
  double radius = 0.1;
  double mass_floor = 1e-9;
  std::string ray;
  std::size_t until = 0;
  std::size_t stages = 5;
  std::size_t window = 3;
  std::string sequence;
  std::size_t resolution = 100;
  std::size_t grid_cap = bt::default_grid_cap;
  std::string eps = "0.5,0.25,0.1";
  std::size_t max_depth = 0;
  std::size_t sample_threshold = 20'000;
  std::size_t sample_size = 5'000;
  bool with_chain = false;
  std::string what = "graph";
  std::size_t level = 1;
  std::string csv;
};

// ---------------------------------------------------------------------------
// small parsers and formatters

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

std::size_t parse_index(const std::string& s) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  if (used != s.size() || s.empty() || s[0] == '-') throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(x);
}

bt::VertexId parse_vertex(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.size() != 2) parts = split(s, ':');
  if (parts.size() != 2) throw ConfigError("vertex must be given as level,index: '" + s + "'");
  return {parse_index(parts[0]), parse_index(parts[1])};
}

template <bt::Scalar S>
S parse_number(const std::string& s) {
  try {
    return bt::parse_scalar<S>(s);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

template <bt::Scalar S>
json num(const S& x) {
  if constexpr (std::same_as<S, Rational>) {
    return x.get_str();
  } else {
    return x;
  }
}

template <bt::Scalar S>
json nums(const std::vector<S>& xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(num(x));
  return a;
}

template <bt::Scalar S>
std::string csv_num(const S& x) {
  if constexpr (std::same_as<S, Rational>) {
    return x.get_str();
  } else {
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
  }
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    bt::write_text_file(o.out, text);
  }
}

void emit_json(const Options& o, const json& j) { emit(o, j.dump(2) + "\n"); }

// graph files stay on one line; they can be large
void emit_graph(const Options& o, const json& j) { emit(o, j.dump() + "\n"); }

// ---------------------------------------------------------------------------
// report header

struct Context {
  const CLI::App* app = nullptr;
  const CLI::App* sub = nullptr;
  std::chrono::steady_clock::time_point start;
};

json echo_config(const Context& ctx) {
  json c = json::object();
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "version" || name == "out" || name == "csv") continue;
      std::string value;
      if (opt->get_expected_min() == 0) {
        value = opt->count() > 0 ? "true" : "false";
      } else if (opt->count() > 0) {
        const auto& r = opt->results();
        for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
      } else {
        value = opt->get_default_str();
      }
      c[name] = value;
    }
  };
  add(*ctx.app);
  add(*ctx.sub);
  return c;
}

json report(const Context& ctx, const Options& o, json tolerances) {
  json r;
  r["tool"] = "bratteli";
  r["version"] = bt::version;
  r["command"] = ctx.sub->get_name();
  r["mode"] = std::string(bt::to_string(bt::parse_mode(o.mode)));
  r["config"] = echo_config(ctx);
  r["tolerances"] = std::move(tolerances);
  return r;
}

void finish(const Context& ctx, const Options& o, json r) {
  if (o.timing) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    r["timing"] = {{"wall_seconds", s}};
  }
  emit_json(o, r);
}

// ---------------------------------------------------------------------------
// graph sources

bool is_file_source(const std::string& g) {
  return g.find('/') != std::string::npos || (g.size() > 5 && g.substr(g.size() - 5) == ".json");
}

bt::GraphSpec zoo_spec(const Options& o, const std::string& kind) {
  bt::GraphSpec s;
  try {
    s.kind = bt::parse_kind(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  s.depth = o.depth;
  s.base = o.base;
  s.seed = o.seed;
  s.density = o.density;
  s.max_width = o.max_width;
  s.level_cap = o.level_cap;
  return s;
}

template <bt::Scalar S>
bt::EquippedGraph<S> central(const bt::GradedGraph& g) {
  if constexpr (std::same_as<S, Rational>) {
    return bt::with_central_equipment(g);
  } else {
    return bt::to_float(bt::with_central_equipment(g));
  }
}

template <bt::Scalar S>
bt::EquippedGraph<S> stored_graph(const Options& o) {
  if (o.equipment != "auto" && o.equipment != "central" && o.equipment != "file") {
    throw ConfigError("equipment must be auto, central or file");
  }
  if (!is_file_source(o.graph)) {
    if (o.equipment == "file") throw ConfigError("--equipment file needs a graph file");
    return central<S>(bt::build(zoo_spec(o, o.graph)));
  }
  const auto loaded = bt::graph_from_json(bt::read_json_file(o.graph));
  const auto structure = bt::validate(loaded.graph);
  if (!structure.ok()) throw ValidationFailure(structure.violations.front().message());
  const bool use_file = o.equipment == "file" || (o.equipment == "auto" && loaded.has_equipment());
  if (!use_file) return central<S>(loaded.graph);
  if (!loaded.has_equipment()) throw ConfigError("graph file carries no cotransition probabilities");
  bt::EquippedGraph<S> eg = [&] {
    if constexpr (std::same_as<S, Rational>) {
      if (!loaded.exact) throw ConfigError("graph file carries float probabilities; use --mode float");
      return bt::EquippedGraph<Rational>(loaded.graph, *loaded.exact);
    } else {
      if (loaded.exact) return bt::to_float(bt::EquippedGraph<Rational>(loaded.graph, *loaded.exact));
      return bt::EquippedGraph<double>(loaded.graph, *loaded.floating);
    }
  }();
  const auto rep = bt::validate(eg);
  if (!rep.ok()) throw ValidationFailure(rep.violations.front().message());
  return eg;
}

bool implicit_pascal(const Options& o) {
  return !is_file_source(o.graph) && o.graph == "pascal" && o.equipment != "file";
}

/// Calls f with the graph: the closed-form Pascal graph when possible, a
/// stored equipped graph otherwise.
template <bt::Scalar S, class F>
void with_graph(const Options& o, std::size_t depth, F&& f) {
  if (implicit_pascal(o)) {
    if (depth < 1) throw ConfigError("depth must be positive");
    f(bt::PascalCentral<S>(depth));
  } else {
    f(stored_graph<S>(o));
  }
}

/// Depth of the Pascal graph (or the stored one) needed by a command.
std::size_t needed_depth(const Options& o, std::size_t level) { return std::max(o.depth, level); }

// ---------------------------------------------------------------------------
// measures on the simplex limit

template <bt::Scalar S, class G>
bt::CoherentPrefix<S> measure_from(const Options& o, const G& g, std::size_t n) {
  if (!o.point_file.empty()) {
    std::ifstream in(o.point_file);
    if (!in) throw ConfigError("cannot open point file " + o.point_file);
    std::vector<S> w(g.level_size(n), S(0));
    std::string line;
    std::size_t next = 0;
    while (std::getline(in, line)) {
      const auto fields = split(line, ',');
      if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
      if (fields[0] == "index") continue;
      std::size_t idx = next;
      std::string val = fields[0];
      if (fields.size() >= 2) {
        idx = parse_index(fields[0]);
        val = fields[1];
      }
      if (idx >= w.size()) throw ConfigError("point file index out of range for level " + std::to_string(n));
      w[idx] = parse_number<S>(val);
      next = idx + 1;
    }
    bt::LevelMeasure<S> top{n, w};
    if (!top.is_probability()) throw ConfigError("point file does not hold a probability vector on level " + std::to_string(n));
    return bt::prefix_from_top(g, std::move(top));
  }
  if (o.family.empty()) throw ConfigError("give --family or --point-file");
  const auto colon = o.family.find(':');
  const std::string name = o.family.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : o.family.substr(colon + 1);
  if (name == "uniform") {
    return bt::prefix_from_top(g, bt::LevelMeasure<S>{n, std::vector<S>(g.level_size(n), S(1) / S(g.level_size(n)))});
  }
  if (!implicit_pascal(o)) throw ConfigError("family '" + name + "' is defined on the Pascal graph");
  if (name == "bernoulli") {
    if (args.empty()) throw ConfigError("bernoulli needs a parameter, e.g. bernoulli:1/2");
    const S p = parse_number<S>(args);
    if (p < 0 || p > 1) throw ConfigError("bernoulli parameter must lie in [0,1]");
    return bt::pascal_bernoulli<S>(n, p);
  }
  if (name == "mixture") {
    const auto groups = split(args, ':');
    if (groups.empty() || groups[0].empty()) throw ConfigError("mixture needs parameters, e.g. mixture:1/4,3/4");
    std::vector<S> ps, mix;
    for (const auto& t : split(groups[0], ',')) ps.push_back(parse_number<S>(t));
    if (groups.size() > 1) {
      for (const auto& t : split(groups[1], ',')) mix.push_back(parse_number<S>(t));
    } else {
      mix.assign(ps.size(), S(1) / S(ps.size()));
    }
    if (mix.size() != ps.size()) throw ConfigError("mixture weights and parameters differ in number");
    return bt::pascal_bernoulli_mixture<S>(n, ps, mix);
  }
  throw ConfigError("unknown family '" + name + "' (bernoulli:p, mixture:p1,p2[:w1,w2], uniform)");
}

std::vector<double> parse_eps(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) {
    const double e = parse_number<double>(t);
    if (!(e > 0)) throw ConfigError("eps values must be positive");
    out.push_back(e);
  }
  if (out.empty()) throw ConfigError("empty eps list");
  return out;
}

bt::IntrinsicOptions intrinsic_options(const Options& o) {
  bt::IntrinsicOptions io;
  io.seed = o.seed;
  io.threads = o.threads;
  io.sample_threshold = o.sample_threshold;
  io.sample_size = o.sample_size;
  return io;
}

json sampling_json(const Options& o) {
  return {{"threshold", o.sample_threshold}, {"sample_size", o.sample_size}, {"seed", o.seed}};
}

std::size_t top_level(const Options& o) { return o.n == 0 ? o.depth : o.n; }

// ---------------------------------------------------------------------------
// commands

template <bt::Scalar S>
int cmd_zoo(const Context&, const Options& o) {
  const auto g = bt::build(zoo_spec(o, o.kind));
  if (o.equipment == "none") {
    emit_graph(o, bt::graph_to_json(g));
  } else if (o.equipment == "central" || o.equipment == "auto") {
    emit_graph(o, bt::graph_to_json(central<S>(g)));
  } else {
    throw ConfigError("zoo --equipment must be central or none");
  }
  return exit_ok;
}

template <bt::Scalar S>
int cmd_validate(const Context& ctx, const Options& o) {
  json r = report(ctx, o, {{"column_sum", bt::numeric_traits<S>::normalization_tolerance}});
  bt::GradedGraph g;
  std::optional<bt::EquippedGraph<S>> eg;
  if (is_file_source(o.graph)) {
    const auto loaded = bt::graph_from_json(bt::read_json_file(o.graph));
    g = loaded.graph;
    const bool use_file = o.equipment == "file" || (o.equipment == "auto" && loaded.has_equipment());
    if (use_file && loaded.has_equipment()) {
      if constexpr (std::same_as<S, Rational>) {
        if (!loaded.exact) throw ConfigError("graph file carries float probabilities; use --mode float");
        eg.emplace(g, *loaded.exact);
      } else {
        eg.emplace(loaded.exact ? bt::to_float(bt::EquippedGraph<Rational>(g, *loaded.exact))
                                : bt::EquippedGraph<double>(g, *loaded.floating));
      }
    } else if (use_file) {
      throw ConfigError("graph file carries no cotransition probabilities");
    }
  } else {
    g = bt::build(zoo_spec(o, o.graph));
  }
  auto rep = bt::validate(g);
  if (rep.ok()) {
    if (!eg) eg.emplace(central<S>(g));
    rep = bt::validate(*eg);
  }
  r["ok"] = rep.ok();
  r["level_sizes"] = g.level_sizes();
  json v = json::array();
  for (const auto& x : rep.violations) v.push_back({{"rule", x.rule}, {"where", x.where}});
  r["violations"] = std::move(v);
  finish(ctx, o, r);
  return rep.ok() ? exit_ok : exit_validation;
}

template <bt::Scalar S>
int cmd_mu(const Context&, const Options& o) {
  const auto v = parse_vertex(o.vertex);
  with_graph<S>(o, needed_depth(o, v.level), [&](const auto& g) {
    const auto mu = bt::vertex_measure(g, v, o.k);
    std::string text = "level,index,weight\n";
    for (std::size_t i = 0; i < mu.weights.size(); ++i) text += std::to_string(o.k) + "," + std::to_string(i) + "," + csv_num(mu.weights[i]) + "\n";
    emit(o, text);
  });
  return exit_ok;
}

template <bt::Scalar S>
int cmd_martin_kernel(const Context&, const Options& o) {
  const auto u = parse_vertex(o.u), v = parse_vertex(o.v);
  with_graph<S>(o, needed_depth(o, v.level), [&](const auto& g) {
    const S k = bt::martin_kernel(g, u, v);
    emit(o, "u_level,u_index,v_level,v_index,kernel\n" + std::to_string(u.level) + "," + std::to_string(u.index) + "," +
                std::to_string(v.level) + "," + std::to_string(v.index) + "," + csv_num(k) + "\n");
  });
  return exit_ok;
}

template <bt::Scalar S>
int cmd_project(const Context&, const Options& o) {
  std::size_t level = 0;
  std::vector<S> w;
  if (!o.vertex.empty()) {
    const auto v = parse_vertex(o.vertex);
    level = v.level;
    w.assign(v.index + 1, S(0));
    w[v.index] = S(1);
  } else {
    if (o.n == 0 || o.weights.empty()) throw ConfigError("project needs --vertex, or --n with --weights");
    level = o.n;
    for (const auto& t : split(o.weights, ',')) w.push_back(parse_number<S>(t));
  }
  with_graph<S>(o, needed_depth(o, level), [&](const auto& g) {
    if (w.size() > g.level_size(level)) throw ConfigError("measure longer than level " + std::to_string(level));
    w.resize(g.level_size(level), S(0));
    bt::LevelMeasure<S> x{level, w};
    if (!x.is_probability()) throw ConfigError("weights do not form a probability vector");
    const auto y = bt::project(g, x, o.k);
    std::string text = "level,index,weight\n";
    for (std::size_t i = 0; i < y.weights.size(); ++i) text += std::to_string(o.k) + "," + std::to_string(i) + "," + csv_num(y.weights[i]) + "\n";
    emit(o, text);
  });
  return exit_ok;
}

template <bt::Scalar S>
int cmd_omega(const Context& ctx, const Options& o) {
  const std::size_t n = top_level(o);
  json r = report(ctx, o, {{"feasibility", o.feasibility}});
  with_graph<S>(o, needed_depth(o, n), [&](const auto& g) {
    const auto cloud = bt::omega_cloud(g, o.m, n);
    r["m"] = o.m;
    r["n"] = n;
    r["cloud_points"] = cloud.points.size();
    json pts = json::array();
    for (const auto& p : cloud.points) pts.push_back(nums(p));
    r["points"] = std::move(pts);
    if (o.monotone) {
      json stages = json::array();
      bool all = true;
      for (const auto& st : bt::omega_monotonicity(g, o.m, n, o.feasibility)) {
        stages.push_back({{"n", st.n}, {"tested", st.report.tested}, {"outside", st.report.outside}, {"max_residual", st.report.max_residual}});
        all = all && st.report.contained();
      }
      r["monotonicity"] = {{"contained", all}, {"stages", std::move(stages)}};
    }
    if (!o.query.empty()) {
      std::vector<double> q;
      for (const auto& t : split(o.query, ',')) q.push_back(parse_number<double>(t));
      if (q.size() != g.level_size(o.m)) throw ConfigError("query point has the wrong dimension");
      const auto h = bt::hull_membership(bt::float_points(cloud.points), q, o.feasibility);
      r["query"] = {{"point", q}, {"member", h.member}, {"residual", h.residual}};
    }
    if (!o.csv.empty()) {
      std::string text = "vertex";
      for (std::size_t i = 0; i < g.level_size(o.m); ++i) text += ",x" + std::to_string(i);
      text += "\n";
      for (std::size_t v = 0; v < cloud.points.size(); ++v) {
        text += std::to_string(v);
        for (const auto& c : cloud.points[v]) text += "," + csv_num(c);
        text += "\n";
      }
      bt::write_text_file(o.csv, text);
    }
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_extremality(const Context& ctx, const Options& o) {
  const std::size_t n = top_level(o);
  json r = report(ctx, o, {{"extremality", o.tol}});
  with_graph<S>(o, needed_depth(o, n), [&](const auto& g) {
    const auto x = measure_from<S>(o, g, n);
    const auto rep = bt::classify_extremality(g, x, o.m, n, o.tol);
    r["m"] = o.m;
    r["n"] = n;
    r["spread"] = rep.spread;
    r["barycenter_error"] = rep.barycenter_error;
    r["extreme_at_tolerance"] = rep.extreme_at_tolerance;
    r["x_m"] = nums(x.at(o.m).weights);
    if (!o.csv.empty()) {
      const auto cloud = bt::weighted_cloud(g, x, o.m, n);
      std::string text = "vertex,weight,tv_to_x_m";
      for (std::size_t i = 0; i < g.level_size(o.m); ++i) text += ",x" + std::to_string(i);
      text += "\n";
      for (std::size_t v = 0; v < cloud.points.size(); ++v) {
        text += std::to_string(v) + "," + csv_num(cloud.weights->weights[v]) + "," +
                csv_num(bt::total_variation(cloud.points[v], x.at(o.m).weights));
        for (const auto& c : cloud.points[v]) text += "," + csv_num(c);
        text += "\n";
      }
      bt::write_text_file(o.csv, text);
    }
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_decompose(const Context& ctx, const Options& o) {
  const std::size_t n = top_level(o);
  json r = report(ctx, o, {{"radius", o.radius}, {"mass_floor", o.mass_floor}});
  with_graph<S>(o, needed_depth(o, n), [&](const auto& g) {
    const auto x = measure_from<S>(o, g, n);
    const auto clusters = bt::choquet_decompose(g, x, o.m, n, o.radius, o.mass_floor);
    r["m"] = o.m;
    r["n"] = n;
    json cs = json::array();
    for (const auto& c : clusters) cs.push_back({{"weight", c.weight}, {"atoms", c.atoms}, {"barycenter", c.barycenter}});
    r["clusters"] = std::move(cs);
    if (g.level_size(o.m) == 2) {
      // distance of nu_n^m to the uniform law on the segment, in the second coordinate
      const auto cloud = bt::weighted_cloud(g, x, o.m, n);
      std::vector<std::pair<double, double>> atoms;
      for (std::size_t v = 0; v < cloud.points.size(); ++v) {
        atoms.emplace_back(bt::to_double(cloud.points[v][1]), bt::to_double(cloud.weights->weights[v]));
      }
      r["segment_w1"] = bt::uniform_segment_w1(atoms);
    }
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_martin(const Context& ctx, const Options& o) {
  std::vector<bt::VertexId> seq;
  std::size_t depth = o.depth;
  if (!o.ray.empty()) {
    if (!implicit_pascal(o)) throw ConfigError("--ray is defined on the Pascal graph; use --sequence elsewhere");
    if (o.until < 1) throw ConfigError("--ray needs --until N");
    std::string p_text = o.ray;
    if (p_text.rfind("p=", 0) == 0) p_text = p_text.substr(2);
    const Rational p = parse_number<Rational>(p_text);
    if (p < 0 || p > 1) throw ConfigError("ray parameter must lie in [0,1]");
    // N = until, until/2, ..., then v_N = (2N, round(2pN))
    std::vector<std::size_t> Ns;
    for (std::size_t N = o.until, s = 0; s < o.stages && N >= 1; ++s, N /= 2) Ns.insert(Ns.begin(), N);
    for (std::size_t N : Ns) {
      const Rational shifted = p * Rational(2 * static_cast<long>(N)) + Rational(1, 2);
      bt::Integer k;
      mpz_fdiv_q(k.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
      seq.push_back({2 * N, static_cast<std::size_t>(k.get_ui())});
    }
    depth = std::max(depth, 2 * o.until);
  } else {
    if (o.sequence.empty()) throw ConfigError("martin needs --ray p=... --until N, or --sequence n,i;n,i;...");
    for (const auto& t : split(o.sequence, ';')) seq.push_back(parse_vertex(t));
    for (const auto& v : seq) depth = std::max(depth, v.level);
  }
  json r = report(ctx, o, {{"cauchy", o.tol}});
  with_graph<S>(o, depth, [&](const auto& g) {
    const auto rep = bt::martin_limit(g, seq, o.m, o.tol, o.window);
    r["m"] = o.m;
    r["window"] = o.window;
    json stages = json::array();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      stages.push_back({{"vertex", {seq[i].level, seq[i].index}}, {"measure", nums(rep.measures[i].weights)}});
    }
    r["stages"] = std::move(stages);
    r["window_spread"] = rep.window_spread;
    r["cauchy"] = rep.cauchy;
    r["limit"] = nums(rep.limit().weights);
    std::vector<double> f;
    for (const auto& x : rep.limit().weights) f.push_back(bt::to_double(x));
    r["limit_float"] = f;
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_poulsen(const Context& ctx, const Options& o) {
  const std::size_t n = top_level(o);
  json r = report(ctx, o, json::object());
  with_graph<S>(o, needed_depth(o, n), [&](const auto& g) {
    const auto rep = bt::poulsen_density(g, o.m, n, o.resolution, o.grid_cap);
    r["m"] = rep.m;
    r["n"] = rep.n;
    r["resolution"] = rep.resolution;
    r["grid_points"] = rep.grid_points;
    r["cloud_points"] = rep.cloud_points;
    r["fill_distance"] = rep.fill_distance;
    r["worst_grid_point"] = rep.worst_grid_point;
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_intrinsic(const Context& ctx, const Options& o) {
  const auto eps = parse_eps(o.eps);
  json r = report(ctx, o, {{"eps", eps}, {"triangle", 2e-9}});
  r["sampling"] = sampling_json(o);
  with_graph<S>(o, o.depth, [&](const auto& g) {
    std::optional<bt::CoherentPrefix<S>> x;
    if (!o.family.empty() || !o.point_file.empty()) x = measure_from<S>(o, g, o.depth);
    const auto rep = bt::standardness_diagnostic(g, bt::BaseMetricConfig::geometric(), o.depth, eps, x ? &*x : nullptr,
                                                 intrinsic_options(o));
    json rows = json::array();
    for (const auto& row : rep.rows) {
      json jr = {{"level", row.level},         {"level_size", row.level_size}, {"table_size", row.table_size},
                 {"sampled", row.sampled},     {"covering_full_level", row.covering_full_level},
                 {"diameter", row.diameter},   {"covering", row.covering}};
      if (x) jr["best_ball_mass"] = row.best_ball_mass;
      rows.push_back(std::move(jr));
    }
    r["depth"] = o.depth;
    r["sampled"] = rep.sampled();
    r["rows"] = std::move(rows);
    if (!o.csv.empty()) {
      std::string text = "eps,level,covering\n";
      for (std::size_t e = 0; e < eps.size(); ++e) {
        for (const auto& row : rep.rows) text += csv_num(eps[e]) + "," + std::to_string(row.level) + "," + std::to_string(row.covering[e]) + "\n";
      }
      bt::write_text_file(o.csv, text);
    }
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_concentration(const Context& ctx, const Options& o) {
  const std::size_t n = top_level(o);
  const auto eps = parse_eps(o.eps);
  json r = report(ctx, o, {{"eps", eps}});
  r["sampling"] = sampling_json(o);
  with_graph<S>(o, needed_depth(o, n), [&](const auto& g) {
    const auto x = measure_from<S>(o, g, n);
    const auto metrics = bt::iterate_intrinsic(g, bt::BaseMetricConfig::geometric(), n, intrinsic_options(o));
    json masses = json::array();
    for (double e : eps) masses.push_back({{"eps", e}, {"best_ball_mass", bt::best_ball_mass(metrics.back(), x.at(n), e)}});
    r["n"] = n;
    r["sampled"] = metrics.back().sampled;
    r["masses"] = std::move(masses);
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_lacunarize(const Context& ctx, const Options& o) {
  const auto eps = parse_eps(o.eps);
  if (eps.size() != 1) throw ConfigError("lacunarize takes a single --eps");
  const std::size_t max_depth = o.max_depth == 0 ? o.depth : o.max_depth;
  json r = report(ctx, o, {{"eps", eps[0]}});
  r["sampling"] = sampling_json(o);
  with_graph<S>(o, needed_depth(o, max_depth), [&](const auto& g) {
    const auto lac = bt::lacunarize(g, bt::BaseMetricConfig::geometric(), eps[0], max_depth, intrinsic_options(o));
    r["max_depth"] = max_depth;
    r["levels"] = lac.levels;
    r["covering"] = lac.covering;
    r["covering_full_level"] = lac.covering_full_level;
    r["flagged_steps"] = lac.flagged_steps;
    r["sampled"] = lac.sampled;
    bool monotone = true;
    for (std::size_t k = 1; k < lac.covering.size(); ++k) monotone = monotone && lac.covering[k] <= lac.covering[k - 1];
    r["non_increasing"] = monotone;
    if (o.with_chain) {
      json chain = json::array();
      for (const auto& P : lac.chain) {
        json cols = json::array();
        for (std::size_t v = 0; v < P.source_size(); ++v) {
          json col = json::array();
          const auto rows = P.column_rows(v);
          const auto vals = P.column_values(v);
          for (std::size_t i = 0; i < rows.size(); ++i) col.push_back({rows[i], num(vals[i])});
          cols.push_back(std::move(col));
        }
        chain.push_back({{"from", P.source_level()}, {"to", P.target_level()}, {"columns", std::move(cols)}});
      }
      r["chain"] = std::move(chain);
    }
  });
  finish(ctx, o, r);
  return exit_ok;
}

template <bt::Scalar S>
int cmd_export(const Context& ctx, const Options& o) {
  if (o.what == "graph") {
    emit_graph(o, bt::graph_to_json(stored_graph<S>(o)));
  } else if (o.what == "dimensions") {
    const auto eg = stored_graph<S>(o);
    const auto dims = bt::dimensions(eg.graph());
    std::string text = "level,index,label,dimension\n";
    for (std::size_t n = 0; n < eg.graph().level_count(); ++n) {
      for (std::size_t v = 0; v < eg.graph().level_size(n); ++v) {
        std::string label(eg.graph().label({n, v}));
        if (label.find(',') != std::string::npos) label = "\"" + label + "\"";
        text += std::to_string(n) + "," + std::to_string(v) + "," + label + "," + dims.at({n, v}).get_str() + "\n";
      }
    }
    emit(o, text);
  } else if (o.what == "projective") {
    const auto ps = bt::to_projective_system(stored_graph<S>(o));
    json r = report(ctx, o, json::object());
    r["dims"] = ps.dims;
    json maps = json::array();
    for (const auto& mtx : ps.maps) {
      json rows = json::array();
      for (const auto& row : mtx) rows.push_back(nums(row));
      maps.push_back(std::move(rows));
    }
    r["maps"] = std::move(maps);
    finish(ctx, o, r);
  } else if (o.what == "distances") {
    with_graph<S>(o, o.depth, [&](const auto& g) {
      if (o.level < 1 || o.level > g.depth()) throw ConfigError("--level must lie in [1, depth]");
      const auto ms = bt::iterate_intrinsic(g, bt::BaseMetricConfig::geometric(), o.level, intrinsic_options(o));
      const auto& rho = ms.back();
      std::string text = "v,w,distance\n";
      for (std::size_t j = 0; j < rho.vertices.size(); ++j) {
        for (std::size_t i = 0; i < rho.vertices.size(); ++i) {
          text += std::to_string(rho.vertices[i]) + "," + std::to_string(rho.vertices[j]) + "," + csv_num(rho.table.at(i, j)) + "\n";
        }
      }
      emit(o, text);
    });
  } else {
    throw ConfigError("--what must be graph, dimensions, projective or distances");
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------

using Handler = int (*)(const Context&, const Options&);

struct Command {
  CLI::App* app;
  Handler exact;
  Handler floating;
};

void graph_options(CLI::App* c, Options& o) {
  c->add_option("--graph", o.graph, "zoo kind (pascal, young, unordered_pairs, random) or a graph JSON file");
  c->add_option("--depth", o.depth, "depth of generated graphs");
  c->add_option("--base", o.base, "base alphabet size of unordered_pairs");
  c->add_option("--density", o.density, "edge density of random graphs");
  c->add_option("--max-width", o.max_width, "maximal level width of random graphs");
  c->add_option("--level-cap", o.level_cap, "refuse generated levels larger than this");
  c->add_option("--equipment", o.equipment, "auto, central or file");
}

void measure_options(CLI::App* c, Options& o) {
  c->add_option("--family", o.family, "bernoulli:p, mixture:p1,p2[:w1,w2] (Pascal) or uniform");
  c->add_option("--point-file", o.point_file, "CSV of top-level weights (weight or index,weight per line)");
}

void intrinsic_sampling(CLI::App* c, Options& o) {
  c->add_option("--sample-threshold", o.sample_threshold, "levels with more vertices are sampled");
  c->add_option("--sample-size", o.sample_size, "vertices kept on a sampled level");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Boundaries and intrinsic metrics of equipped graded graphs"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(bt::version));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--mode", o.mode, "rational or float")->check(CLI::IsMember({"rational", "float"}));
  app.add_option("--seed", o.seed, "seed for random graphs and vertex sampling");
  app.add_option("--threads", o.threads, "worker threads (0: all cores)");
  app.add_option("--out", o.out, "output file (default: standard output)");
  app.add_flag("--timing", o.timing, "add wall-clock time to reports (breaks byte-identical output)");

  std::vector<Command> commands;
  auto add = [&](const char* name, const char* help, Handler exact, Handler floating) {
    CLI::App* c = app.add_subcommand(name, help);
    commands.push_back({c, exact, floating});
    return c;
  };

  auto* zoo = add("zoo", "generate a graph", cmd_zoo<Rational>, cmd_zoo<double>);
  zoo->add_option("kind", o.kind, "pascal, young, unordered_pairs or random")->required();
  zoo->add_option("--depth", o.depth, "number of levels above the root");
  zoo->add_option("--base", o.base, "base alphabet size of unordered_pairs");
  zoo->add_option("--density", o.density, "edge density of random graphs");
  zoo->add_option("--max-width", o.max_width, "maximal level width of random graphs");
  zoo->add_option("--level-cap", o.level_cap, "refuse levels larger than this");
  zoo->add_option("--equipment", o.equipment, "central (default) or none");

  auto* validate = add("validate", "check structure and cotransition probabilities", cmd_validate<Rational>, cmd_validate<double>);
  graph_options(validate, o);

  auto* mu = add("mu", "projection of a vertex onto a lower level", cmd_mu<Rational>, cmd_mu<double>);
  graph_options(mu, o);
  mu->add_option("--vertex", o.vertex, "level,index")->required();
  mu->add_option("--k", o.k, "target level")->required();

  auto* mk = add("martin-kernel", "Martin kernel K(u, v)", cmd_martin_kernel<Rational>, cmd_martin_kernel<double>);
  graph_options(mk, o);
  mk->add_option("--u", o.u, "lower vertex level,index")->required();
  mk->add_option("--v", o.v, "upper vertex level,index")->required();

  auto* proj = add("project", "project a measure to a lower level", cmd_project<Rational>, cmd_project<double>);
  graph_options(proj, o);
  proj->add_option("--vertex", o.vertex, "project the Dirac mass at level,index");
  proj->add_option("--n", o.n, "level of --weights");
  proj->add_option("--weights", o.weights, "comma-separated weights on level n");
  proj->add_option("--k", o.k, "target level")->required();

  auto* omega = add("omega", "projected vertex cloud and its hull", cmd_omega<Rational>, cmd_omega<double>);
  graph_options(omega, o);
  omega->add_option("--m", o.m, "projection level");
  omega->add_option("--n", o.n, "cloud level (default: depth)");
  omega->add_flag("--monotone", o.monotone, "check hull monotonicity for stages m+1..n");
  omega->add_option("--query", o.query, "point to test for hull membership");
  omega->add_option("--feasibility", o.feasibility, "LP feasibility tolerance");
  omega->add_option("--csv", o.csv, "write cloud points as CSV");

  auto* ext = add("extremality", "finite-stage extremality test", cmd_extremality<Rational>, cmd_extremality<double>);
  graph_options(ext, o);
  measure_options(ext, o);
  ext->add_option("--m", o.m, "projection level");
  ext->add_option("--n", o.n, "top level (default: depth)");
  ext->add_option("--tol", o.tol, "extremality tolerance");
  ext->add_option("--csv", o.csv, "write atoms, weights and spreads as CSV");

  auto* dec = add("decompose", "Choquet decomposition by clustering", cmd_decompose<Rational>, cmd_decompose<double>);
  graph_options(dec, o);
  measure_options(dec, o);
  dec->add_option("--m", o.m, "projection level");
  dec->add_option("--n", o.n, "top level (default: depth)");
  dec->add_option("--radius", o.radius, "single-linkage radius");
  dec->add_option("--mass-floor", o.mass_floor, "atoms lighter than this do not link clusters");

  auto* martin = add("martin", "limit of projections along a vertex sequence", cmd_martin<Rational>, cmd_martin<double>);
  graph_options(martin, o);
  martin->add_option("--ray", o.ray, "Pascal ray p=...: vertices (2N, round(2pN))");
  martin->add_option("--until", o.until, "largest N of the ray");
  martin->add_option("--stages", o.stages, "number of halving stages of the ray");
  martin->add_option("--sequence", o.sequence, "explicit vertices n,i;n,i;...");
  martin->add_option("--m", o.m, "projection level");
  martin->add_option("--window", o.window, "trailing stages compared for the Cauchy test");
  martin->add_option("--tol", o.tol, "Cauchy tolerance");

  auto* poul = add("poulsen", "fill distance of the vertex cloud in the simplex", cmd_poulsen<Rational>, cmd_poulsen<double>);
  graph_options(poul, o);
  poul->add_option("--m", o.m, "simplex level");
  poul->add_option("--n", o.n, "highest level of the cloud (default: depth)");
  poul->add_option("--resolution", o.resolution, "barycentric grid resolution");
  poul->add_option("--grid-cap", o.grid_cap, "refuse grids larger than this");

  auto* intr = add("intrinsic", "intrinsic metric and standardness diagnostic", cmd_intrinsic<Rational>, cmd_intrinsic<double>);
  graph_options(intr, o);
  measure_options(intr, o);
  intrinsic_sampling(intr, o);
  intr->add_option("--eps", o.eps, "comma-separated covering radii");
  intr->add_option("--csv", o.csv, "write covering-number curves as CSV");

  auto* conc = add("concentration", "mass of the best eps-ball", cmd_concentration<Rational>, cmd_concentration<double>);
  graph_options(conc, o);
  measure_options(conc, o);
  intrinsic_sampling(conc, o);
  conc->add_option("--n", o.n, "level (default: depth)");
  conc->add_option("--eps", o.eps, "comma-separated ball radii");

  auto* lac = add("lacunarize", "greedy level selection", cmd_lacunarize<Rational>, cmd_lacunarize<double>);
  graph_options(lac, o);
  intrinsic_sampling(lac, o);
  lac->add_option("--eps", o.eps, "covering radius")->default_str("0.5");
  lac->add_option("--max-depth", o.max_depth, "last level considered (default: depth)");
  lac->add_flag("--with-chain", o.with_chain, "include the composed matrices");

  auto* exp = add("export", "export graphs, dimensions, projective systems or distance tables", cmd_export<Rational>,
                  cmd_export<double>);
  graph_options(exp, o);
  intrinsic_sampling(exp, o);
  exp->add_option("--what", o.what, "graph, dimensions, projective or distances");
  exp->add_option("--level", o.level, "level of the distance table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }
  if (app.get_subcommand_ptr(lac)->parsed() && lac->get_option("--eps")->count() == 0) o.eps = "0.5";

  Context ctx;
  ctx.app = &app;
  ctx.start = std::chrono::steady_clock::now();
  try {
    const bool exact = bt::parse_mode(o.mode) == bt::NumericMode::rational;
    for (const auto& c : commands) {
      if (c.app->parsed()) {
        ctx.sub = c.app;
        return (exact ? c.exact : c.floating)(ctx, o);
      }
    }
    return exit_config;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::length_error& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return exit_resource;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_other;
  }
}
