#include <bratteli/bratteli.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace bratteli;

namespace {

Rational q(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

const BaseMetricConfig unit_base = BaseMetricConfig::geometric();

// Minimum number of closed eps-balls centred at points, by trying subsets
// in order of size.
template <Scalar S>
std::size_t exact_covering(const DistanceTable<S>& t, double eps) {
  const std::size_t n = t.size();
  const S e(eps);
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        bool hit = false;
        for (std::size_t c = 0; c < n && !hit; ++c) hit = pick[c] && !(t.at(c, i) > e);
        ok = hit;
      }
      if (ok) return k;
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return n;
}

// Lumped metric on level `upper` from `rho` on level `lower`, built from
// vertex measures and plain Kantorovich solves.
LevelMetric<Rational> lumped_by_vertex_measures(const EquippedGraph<Rational>& eg, const LevelMetric<Rational>& rho,
                                                std::size_t upper) {
  const std::size_t lower = rho.level;
  LevelMetric<Rational> out;
  out.level = upper;
  out.level_size = eg.level_size(upper);
  out.vertices.resize(out.level_size);
  std::iota(out.vertices.begin(), out.vertices.end(), std::size_t{0});
  out.table = DistanceTable<Rational>(out.level_size);
  for (std::size_t j = 1; j < out.level_size; ++j) {
    const auto mj = vertex_measure(eg, {upper, j}, lower);
    for (std::size_t i = 0; i < j; ++i) {
      const auto mi = vertex_measure(eg, {upper, i}, lower);
      out.table.set(i, j, kantorovich(mi.weights, mj.weights, rho.table).distance);
    }
  }
  return out;
}

GradedGraph chain(std::size_t depth) {
  std::vector<GradedGraph::Edge> e;
  for (std::size_t n = 0; n < depth; ++n) e.push_back({n, 0, 0});
  return GradedGraph(std::vector<std::size_t>(depth + 1, 1), e);
}

}  // namespace

TEST(Transfer, PascalHandValues) {
  const PascalCentral<Rational> p(4);
  const auto ms = iterate_intrinsic(p, unit_base, 3);
  EXPECT_EQ(ms[0].distance(0, 1), 1);
  EXPECT_EQ(ms[1].distance(0, 1), q(1, 2));
  EXPECT_EQ(ms[1].distance(0, 2), 1);
  EXPECT_EQ(ms[1].distance(1, 2), q(1, 2));
  EXPECT_EQ(ms[2].distance(0, 1), q(1, 3));
}

TEST(Transfer, PascalEndpointsStayAtOne) {
  const PascalCentral<Rational> p(32);
  const auto ms = iterate_intrinsic(p, unit_base, 32);
  for (std::size_t n = 1; n <= 32; ++n) {
    EXPECT_EQ(ms[n - 1].distance(0, n), 1) << n;
    EXPECT_EQ(ms[n - 1].diameter(), 1);
  }
}

TEST(Transfer, IdenticalCotransitionsGiveZero) {
  // both level-2 vertices sit over the two level-1 vertices
  const GradedGraph g({1, 2, 2}, {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}});
  const auto ms = iterate_intrinsic(with_central_equipment(g), unit_base, 2);
  EXPECT_EQ(ms[1].distance(0, 1), 0);
}

TEST(Transfer, SingleVertexLevelsGiveZeroTables) {
  const auto ms = iterate_intrinsic(with_central_equipment(chain(6)), unit_base, 6);
  for (const auto& rho : ms) {
    EXPECT_EQ(rho.vertices.size(), 1u);
    EXPECT_EQ(rho.diameter(), 0);
  }
  const auto rep = standardness_diagnostic(with_central_equipment(chain(6)), unit_base, 6, {0.5, 0.1});
  for (const auto& row : rep.rows) EXPECT_EQ(row.covering, (std::vector<std::size_t>{1, 1}));
}

TEST(Transfer, BaseWeightRescalesTwoLevelGraphs) {
  const auto eg = with_central_equipment(young(2));
  const auto unit = iterate_intrinsic(with_central_equipment(pascal(2)), unit_base, 2);
  for (double c : {0.5, 0.125, 3.0}) {
    BaseMetricConfig b;
    b.weights = {c, c / 2};
    b.normalize = false;
    const auto scaled = iterate_intrinsic(with_central_equipment(pascal(2)), b, 2);
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t w = 0; w < 3; ++w) EXPECT_EQ(scaled[1].distance(v, w), Rational(c) * unit[1].distance(v, w));
  }
  EXPECT_EQ(iterate_intrinsic(eg, unit_base, 2)[1].diameter(), 0);
}

TEST(Transfer, LevelOutOfRange) {
  const auto eg = with_central_equipment(pascal(3));
  auto ms = iterate_intrinsic(eg, unit_base, 3);
  EXPECT_THROW(transfer_step(eg, ms.back()), std::out_of_range);
  EXPECT_THROW(iterate_intrinsic(eg, unit_base, 4), std::out_of_range);
  BaseMetricConfig bad;
  bad.weights = {0.5, -1.0};
  EXPECT_THROW(iterate_intrinsic(eg, bad, 2), std::invalid_argument);
}

TEST(IntrinsicProperties, PseudometricAndNonExpansive) {
  std::vector<EquippedGraph<double>> graphs{to_float(with_central_equipment(young(9))),
                                            to_float(with_central_equipment(unordered_pairs(4, 3)))};
  for (std::uint64_t seed = 0; seed < 6; ++seed) graphs.push_back(to_float(with_central_equipment(random_graph(7, seed, 0.4))));
  for (const auto& eg : graphs) {
    const auto ms = iterate_intrinsic(eg, unit_base, eg.depth());
    for (std::size_t n = 0; n < ms.size(); ++n) {
      const auto& t = ms[n].table;
      const std::size_t k = t.size();
      ASSERT_LE(k, 231u);
      for (std::size_t a = 0; a < k; ++a) {
        EXPECT_EQ(t.at(a, a), 0.0);
        for (std::size_t b = 0; b < k; ++b) {
          EXPECT_EQ(t.at(a, b), t.at(b, a));
          EXPECT_GE(t.at(a, b), 0.0);
          for (std::size_t c = 0; c < k; c += 1 + k / 40) EXPECT_LE(t.at(a, b), t.at(a, c) + t.at(c, b) + 2e-9);
        }
      }
      if (n > 0) {
        EXPECT_LE(ms[n].diameter(), ms[n - 1].diameter() + 1e-12);
      }
    }
  }
}

TEST(IntrinsicProperties, BaseFactorBoundsCarryThrough) {
  const auto eg = with_central_equipment(random_graph(6, 21, 0.5));
  BaseMetricConfig lo, hi;
  lo.weights = {0.5, 0.25};
  hi.weights = {0.75, 0.25};
  lo.normalize = hi.normalize = false;
  const Rational c = q(3, 2);
  const auto a = iterate_intrinsic(eg, lo, 6), b = iterate_intrinsic(eg, hi, 6);
  for (std::size_t n = 0; n < 6; ++n) {
    for (std::size_t j = 0; j < a[n].table.size(); ++j)
      for (std::size_t i = 0; i < j; ++i) {
        EXPECT_LE(a[n].table.at(i, j), b[n].table.at(i, j));
        EXPECT_LE(b[n].table.at(i, j), c * a[n].table.at(i, j));
      }
  }
}

TEST(IntrinsicProperties, ThreadsDoNotChangeTables) {
  const auto eg = with_central_equipment(young(8));
  IntrinsicOptions one, four;
  four.threads = 4;
  const auto a = iterate_intrinsic(eg, unit_base, 8, one), b = iterate_intrinsic(eg, unit_base, 8, four);
  for (std::size_t n = 0; n < 8; ++n) EXPECT_EQ(a[n].table, b[n].table);
}

TEST(Sampling, SubsetIsSeededAndConsistent) {
  const auto eg = to_float(with_central_equipment(unordered_pairs(4, 3)));
  IntrinsicOptions small;
  small.sample_threshold = 100;
  small.sample_size = 40;
  small.seed = 5;
  const auto full = iterate_intrinsic(eg, unit_base, 4);
  const auto a = iterate_intrinsic(eg, unit_base, 4, small), b = iterate_intrinsic(eg, unit_base, 4, small);
  EXPECT_FALSE(a[2].sampled);
  ASSERT_TRUE(a[3].sampled);
  EXPECT_EQ(a[3].vertices.size(), 40u);
  EXPECT_EQ(a[3].vertices, b[3].vertices);
  EXPECT_TRUE(std::is_sorted(a[3].vertices.begin(), a[3].vertices.end()));
  for (std::size_t v : a[3].vertices)
    for (std::size_t w : a[3].vertices) EXPECT_EQ(a[3].distance(v, w), full[3].distance(v, w));
  small.seed = 6;
  EXPECT_NE(iterate_intrinsic(eg, unit_base, 4, small)[3].vertices, a[3].vertices);
  std::size_t missing = 0;
  while (a[3].position(missing) != LevelMetric<double>::npos) ++missing;
  EXPECT_THROW(static_cast<void>(a[3].distance(missing, a[3].vertices[0])), std::out_of_range);
}

TEST(Sampling, StreamedCoveringCountsTheWholeLevel) {
  const auto eg = to_float(with_central_equipment(unordered_pairs(4, 3)));
  IntrinsicOptions small;
  small.sample_threshold = 100;
  small.sample_size = 40;
  const auto full = iterate_intrinsic(eg, unit_base, 4);
  for (double eps : {0.2, 0.35, 0.5}) {
    EXPECT_EQ(streamed_covering_number(markov_matrix(eg, 3), full[2], eps), covering_number(full[3], eps));
    const auto rep = standardness_diagnostic(eg, unit_base, 4, {eps}, nullptr, small);
    EXPECT_TRUE(rep.sampled());
    EXPECT_TRUE(rep.rows[3].covering_full_level);
    EXPECT_EQ(rep.rows[3].table_size, 40u);
    EXPECT_EQ(rep.rows[3].covering[0], covering_number(full[3], eps));
  }
}

TEST(Covering, Examples) {
  const auto unit = DistanceTable<double>::from_dense({{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}});
  EXPECT_EQ(covering_number(unit, 0.5), 4u);
  EXPECT_EQ(covering_number(unit, 1.0), 1u);
  EXPECT_EQ(covering_number(unit, 7.0), 1u);
  EXPECT_THROW(covering_number(unit, 0.0), std::invalid_argument);
}

TEST(Covering, PascalLevelEight) {
  const PascalCentral<Rational> p(8);
  const auto rho = iterate_intrinsic(p, unit_base, 8).back();
  for (std::size_t j = 0; j <= 8; ++j)
    for (std::size_t i = 0; i <= 8; ++i) EXPECT_EQ(rho.distance(i, j), abs(q(long(i) - long(j), 8)));
  // balls of radius 1/4 hold five neighbours: centres 2 and 6 suffice, while
  // farthest-point seeding from 0 picks 0, 8, 4
  EXPECT_EQ(exact_covering(rho.table, 0.25), 2u);
  EXPECT_EQ(covering_centers(rho.table, 0.25), (std::vector<std::size_t>{0, 8, 4}));
  EXPECT_LE(covering_number(rho, 0.25), exact_covering(rho.table, 0.125));
}

TEST(Covering, GreedyWithinFactorTwoOfExact) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<std::pair<double, double>> pts(n);
    for (auto& [x, y] : pts) {
      x = static_cast<double>(rng() % 1000) / 1000;
      y = static_cast<double>(rng() % 1000) / 1000;
    }
    DistanceTable<double> t(n);
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 0; i < j; ++i) t.set(i, j, std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second));
    const double eps = 0.05 + 0.4 * static_cast<double>(rng() % 100) / 100;
    const std::size_t greedy = covering_number(t, eps);
    EXPECT_LE(exact_covering(t, eps), greedy);
    EXPECT_LE(greedy, exact_covering(t, eps / 2));
    EXPECT_LE(covering_number(t, eps * 1.5), greedy);
  }
}

TEST(Concentration, Examples) {
  const PascalCentral<double> p(64);
  EXPECT_GT(concentration_test(p, unit_base, pascal_bernoulli<double>(64, 0.5), 64, 0.25), 0.9);
  EXPECT_LT(concentration_test(p, unit_base, pascal_bernoulli_mixture<double>(64, {0.25, 0.75}, {0.5, 0.5}), 64, 0.1), 0.7);
  const auto y = with_central_equipment(young(6));
  const auto delta = prefix_from_top(y, LevelMeasure<Rational>::delta(6, y.level_size(6), 3));
  EXPECT_EQ(concentration_test(y, unit_base, delta, 6, 1e-6), 1.0);
  EXPECT_THROW(concentration_test(y, unit_base, delta, 7, 0.1), std::out_of_range);
}

TEST(Standardness, CoveringNonIncreasingInEps) {
  const PascalCentral<double> p(40);
  const auto rep = standardness_diagnostic(p, unit_base, 40, {0.05, 0.1, 0.25, 0.5});
  ASSERT_EQ(rep.rows.size(), 40u);
  EXPECT_FALSE(rep.sampled());
  for (const auto& row : rep.rows) {
    EXPECT_TRUE(std::is_sorted(row.covering.rbegin(), row.covering.rend()));
    EXPECT_LE(row.covering[2], 4u);
  }
  const auto pairs = standardness_diagnostic(to_float(with_central_equipment(unordered_pairs(4, 3))), unit_base, 4, {0.5});
  EXPECT_EQ(pairs.covering_curve(0), (std::vector<std::size_t>{3, 3, 4, 6}));
}

TEST(Standardness, MeasureMassesPerLevel) {
  const PascalCentral<double> p(20);
  const auto x = pascal_bernoulli<double>(20, 0.3);
  const auto rep = standardness_diagnostic(p, unit_base, 20, {0.25}, &x);
  for (const auto& row : rep.rows) {
    ASSERT_EQ(row.best_ball_mass.size(), 1u);
    const auto ms = iterate_intrinsic(p, unit_base, row.level);
    EXPECT_EQ(row.best_ball_mass[0], best_ball_mass(ms.back(), x.at(row.level), 0.25));
  }
}

TEST(Nested, EqualMeasuresAndDepthOne) {
  const auto eg = with_central_equipment(young(5));
  const auto mu = cocycle_measure(eg, {5, 2});
  EXPECT_EQ(nested_distance(eg, mu, mu, unit_base, 5), 0);
  PathMeasure<Rational> a{1, {{{0}, q(1, 3)}, {{1}, q(2, 3)}}}, b{1, {{{1}, 1}}};
  const auto p = with_central_equipment(pascal(3));
  const auto rho1 = iterate_intrinsic(p, unit_base, 1)[0];
  EXPECT_EQ(nested_distance(p, a, b, unit_base, 1),
            kantorovich(std::vector<Rational>{q(1, 3), q(2, 3)}, std::vector<Rational>{0, 1}, rho1.table).distance);
  EXPECT_THROW(nested_distance(with_central_equipment(pascal(8)), mu, mu, unit_base, 7), std::invalid_argument);
  PathMeasure<Rational> broken{2, {{{0, 2}, 1}}};
  EXPECT_THROW(nested_distance(p, broken, broken, unit_base, 2), std::invalid_argument);
}

TEST(Nested, MatchesIteratedMetricOnVertexPairs) {
  for (const GradedGraph& g : {pascal(4), young(4)}) {
    const auto eg = with_central_equipment(g);
    const auto ms = iterate_intrinsic(eg, unit_base, 4);
    for (std::size_t n = 1; n <= 4; ++n) {
      for (std::size_t v = 0; v < g.level_size(n); ++v) {
        for (std::size_t w = 0; w < g.level_size(n); ++w) {
          EXPECT_EQ(nested_distance(eg, cocycle_measure(eg, {n, v}), cocycle_measure(eg, {n, w}), unit_base, n),
                    ms[n - 1].distance(v, w));
        }
      }
    }
  }
}

TEST(Nested, MixturesStayBelowWorstPair) {
  // the coupling of two mixtures built from vertex couplings bounds the value
  const auto eg = with_central_equipment(pascal(4));
  const auto ms = iterate_intrinsic(eg, unit_base, 4);
  auto mix = [&](std::size_t v, std::size_t w) {
    PathMeasure<Rational> m{4, {}};
    for (auto [x, s] : {std::pair{v, q(1, 2)}, std::pair{w, q(1, 2)}})
      for (auto [path, weight] : cocycle_measure(eg, {4, x}).atoms) m.atoms.emplace_back(path, weight * s);
    return m;
  };
  const Rational d = nested_distance(eg, mix(0, 1), mix(3, 4), unit_base, 4);
  EXPECT_LE(d, (ms[3].distance(0, 3) + ms[3].distance(1, 4)) / 2);
  EXPECT_GT(d, 0);
}

TEST(Lacunarize, TwoLevelGraph) {
  const auto r = lacunarize(with_central_equipment(pascal(2)), unit_base, 0.25, 2);
  EXPECT_EQ(r.levels, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.chain.size(), 1u);
}

TEST(Lacunarize, PostconditionReverified) {
  for (const GradedGraph& g : {pascal(12), young(7), unordered_pairs(3, 3)}) {
    const auto eg = with_central_equipment(g);
    for (double eps : {0.25, 0.5}) {
      const auto r = lacunarize(eg, unit_base, eps, g.depth());
      ASSERT_EQ(r.levels.front(), 1u);
      EXPECT_EQ(r.levels.back(), g.depth());
      EXPECT_TRUE(std::is_sorted(r.levels.begin(), r.levels.end()));
      EXPECT_EQ(std::adjacent_find(r.levels.begin(), r.levels.end()), r.levels.end());
      auto rho = iterate_intrinsic(eg, unit_base, 1)[0];
      for (std::size_t k = 1; k < r.levels.size(); ++k) {
        rho = lumped_by_vertex_measures(eg, rho, r.levels[k]);
        EXPECT_EQ(rho.table, r.metrics[k].table);
        const std::size_t cov = covering_number(rho, eps);
        EXPECT_EQ(cov, r.covering[k]);
        const bool flagged = std::find(r.flagged_steps.begin(), r.flagged_steps.end(), k) != r.flagged_steps.end();
        if (flagged) {
          EXPECT_EQ(r.levels[k], g.depth());
          EXPECT_GT(cov, r.covering[k - 1]);
        } else {
          EXPECT_LE(cov, r.covering[k - 1]);
        }
        // no skipped level would have been accepted earlier
        for (std::size_t n = r.levels[k - 1] + 1; n < r.levels[k]; ++n) {
          EXPECT_GT(covering_number(lumped_by_vertex_measures(eg, r.metrics[k - 1], n), eps), r.covering[k - 1]);
        }
        for (std::size_t c = 0; c < r.chain[k - 1].source_size(); ++c) {
          EXPECT_EQ(r.chain[k - 1].column(c), vertex_measure(eg, {r.levels[k], c}, r.levels[k - 1]).weights);
        }
      }
    }
  }
}
