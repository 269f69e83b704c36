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

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Spread as an explicit transport problem: atoms of nu plus the point x_m,
// total-variation ground distances, all mass of nu moved onto x_m.
double spread_by_transport(const ProjectedCloud<double>& cloud, const std::vector<double>& xm) {
  const std::size_t k = cloud.points.size();
  DistanceTable<double> t(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    const auto& pj = j < k ? cloud.points[j] : xm;
    for (std::size_t i = 0; i < j; ++i) t.set(i, j, total_variation<double>(cloud.points[i], pj));
  }
  std::vector<double> a(k + 1, 0.0), b(k + 1, 0.0);
  for (std::size_t v = 0; v < k; ++v) a[v] = cloud.weights->weights[v];
  b[k] = 1.0;
  return kantorovich(a, b, t).distance;
}

}  // namespace

TEST(Project, Examples) {
  const auto eg = with_central_equipment(pascal(6));
  const auto x = LevelMeasure<Rational>::delta(4, 5, 2);
  EXPECT_EQ(project(eg, x, 4), x);
  EXPECT_EQ(project(eg, x, 1).weights, (std::vector<Rational>{q(1, 2), q(1, 2)}));
  EXPECT_EQ(project(eg, x, 1), vertex_measure(eg, {4, 2}, 1));
}

TEST(CoherentPrefix, BuildersAreCoherent) {
  const PascalCentral<Rational> p(30);
  EXPECT_EQ(coherence_defect(p, pascal_bernoulli<Rational>(30, q(1, 3))), 0.0);
  EXPECT_EQ(coherence_defect(p, pascal_uniform<Rational>(30)), 0.0);
  EXPECT_EQ(coherence_defect(p, pascal_bernoulli_mixture<Rational>(30, {q(1, 4), q(3, 4)}, {q(1, 2), q(1, 2)})), 0.0);
  const PascalCentral<double> pd(200);
  EXPECT_LT(coherence_defect(pd, pascal_bernoulli<double>(200, 0.3)), 1e-10);

  const auto y = with_central_equipment(young(7));
  const auto x = prefix_from_top(y, LevelMeasure<Rational>{7, std::vector<Rational>(15, q(1, 15))});
  EXPECT_EQ(coherence_defect(y, x), 0.0);
  for (std::size_t m = 0; m < 5; ++m) {
    for (std::size_t k = m + 1; k < 7; ++k) EXPECT_EQ(project(y, project(y, x.at(7), k), m), project(y, x.at(7), m));
  }
}

TEST(OmegaCloud, PascalLevelOneIsTheSegmentGrid) {
  const PascalCentral<Rational> p(20);
  const auto cloud = omega_cloud(p, 1, 20);
  ASSERT_EQ(cloud.points.size(), 21u);
  for (long k = 0; k <= 20; ++k) EXPECT_EQ(cloud.points[k], (std::vector<Rational>{q(20 - k, 20), q(k, 20)}));
  const auto pts = float_points(cloud.points);
  EXPECT_TRUE(hull_membership(pts, {1.0, 0.0}).member);
  EXPECT_TRUE(hull_membership(pts, {0.0, 1.0}).member);
  EXPECT_TRUE(hull_membership(pts, {0.37, 0.63}).member);
  EXPECT_THROW(omega_cloud(p, 3, 3), std::invalid_argument);
}

TEST(OmegaCloud, HullsShrink) {
  const PascalCentral<double> p(40);
  for (std::size_t m : {1u, 2u, 3u}) {
    for (const auto& stage : omega_monotonicity(p, m, 40)) EXPECT_TRUE(stage.report.contained()) << m << " " << stage.n;
  }
  const auto y = to_float(with_central_equipment(young(9)));
  for (std::size_t m : {2u, 3u, 4u}) {
    for (const auto& stage : omega_monotonicity(y, m, 9)) EXPECT_TRUE(stage.report.contained()) << m << " " << stage.n;
  }
}

TEST(OmegaCloud, ThirdsPointAndPlanarHullAgree) {
  const PascalCentral<double> p(64);
  for (std::size_t n : {16u, 32u, 64u}) {
    const auto pts = float_points(omega_cloud(p, 2, n).points);
    EXPECT_TRUE(hull_membership(pts, {1.0 / 3, 1.0 / 3, 1.0 / 3}).member);
    std::vector<Point2> planar;
    for (const auto& x : pts) planar.push_back({x[0], x[1]});
    EXPECT_TRUE(in_convex_polygon(convex_hull_2d(planar), {1.0 / 3, 1.0 / 3}, 1e-8));
    // above the curve: middle coordinate there is at most about 0.43
    EXPECT_FALSE(hull_membership(pts, {0.5, 0.47, 0.03}).member);
    EXPECT_FALSE(in_convex_polygon(convex_hull_2d(planar), {0.5, 0.47}, 1e-8));
    // on the chord between the two Dirac endpoints
    EXPECT_TRUE(hull_membership(pts, {0.5, 0.0, 0.5}).member);
  }
}

TEST(Hull, LpMatchesPlanarHullOnRandomClouds) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng() % 8;
    std::vector<std::vector<double>> pts;
    std::vector<Point2> planar;
    for (std::size_t i = 0; i < k; ++i) {
      double a = uniform01(rng), b = uniform01(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      pts.push_back({a, b, 1 - a - b});
      planar.push_back({a, b});
    }
    const auto hull = convex_hull_2d(planar);
    for (int t = 0; t < 10; ++t) {
      double a = uniform01(rng), b = uniform01(rng);
      if (a + b > 1) continue;
      const bool lp = hull_membership(pts, {a, b, 1 - a - b}).member;
      // skip queries within rounding of the boundary
      if (in_convex_polygon(hull, {a, b}, 1e-6) != in_convex_polygon(hull, {a, b}, 0.0)) continue;
      EXPECT_EQ(lp, in_convex_polygon(hull, {a, b}, 0.0));
    }
  }
}

TEST(Extremality, BernoulliAndMixture) {
  const PascalCentral<double> p(400);
  const auto b = pascal_bernoulli<double>(400, 0.5);
  const auto mix = pascal_bernoulli_mixture<double>(400, {0.25, 0.75}, {0.5, 0.5});
  EXPECT_LT(extremality_spread(p, b, 1, 400), 0.03);
  EXPECT_GT(extremality_spread(p, mix, 1, 400), 0.2);
  const auto rb = classify_extremality(p, b, 1, 400, 0.05);
  EXPECT_TRUE(rb.extreme_at_tolerance);
  EXPECT_LT(rb.barycenter_error, 1e-10);
  EXPECT_FALSE(classify_extremality(p, mix, 1, 400, 0.05).extreme_at_tolerance);
}

TEST(Extremality, SpreadDecaysLikeInverseRoot) {
  const PascalCentral<double> p(1600);
  const auto b = pascal_bernoulli<double>(1600, 0.5);
  // mean |k/n - 1/2| for Bin(n, 1/2) is about sqrt(1/(2 pi n))
  for (std::size_t n : {100u, 400u, 1600u}) {
    const double s = extremality_spread(p, b, 1, n);
    EXPECT_NEAR(s * std::sqrt(2 * M_PI * n), 1.0, 0.05) << n;
  }
}

TEST(Extremality, DeltaPathPrefixHasZeroSpread) {
  const auto y = with_central_equipment(young(6));
  for (std::size_t v = 0; v < y.level_size(5); ++v) {
    const auto x = prefix_from_top(y, LevelMeasure<Rational>::delta(5, y.level_size(5), v));
    EXPECT_EQ(extremality_spread(y, x, 4, 5), 0);
  }
}

TEST(Extremality, SpreadMatchesTransportOracle) {
  const PascalCentral<double> p(30);
  for (const auto& x : {pascal_bernoulli<double>(30, 0.3), pascal_uniform<double>(30),
                        pascal_bernoulli_mixture<double>(30, {0.1, 0.6}, {0.3, 0.7})}) {
    for (std::size_t m : {1u, 2u, 5u}) {
      const double s = extremality_spread(p, x, m, 30);
      EXPECT_NEAR(s, spread_by_transport(weighted_cloud(p, x, m, 30), x.at(m).weights), 1e-9);
    }
  }
}

TEST(Extremality, BarycenterLawExact) {
  const auto y = with_central_equipment(young(8));
  std::mt19937_64 rng(12);
  std::vector<Rational> w(y.level_size(8));
  long total = 0;
  for (auto& v : w) {
    const long k = 1 + static_cast<long>(rng() % 5);
    v = k;
    total += k;
  }
  for (auto& v : w) v /= total;
  const auto x = prefix_from_top(y, LevelMeasure<Rational>{8, w});
  for (std::size_t m = 1; m < 8; ++m) EXPECT_EQ(barycenter_error(y, x, m, 8), 0.0);
}

TEST(Choquet, MixtureSplitsIntoTwo) {
  const PascalCentral<double> p(400);
  const auto mix = pascal_bernoulli_mixture<double>(400, {0.25, 0.75}, {0.5, 0.5});
  const auto clusters = choquet_decompose(p, mix, 1, 400, 0.1);
  ASSERT_EQ(clusters.size(), 2u);
  double total = 0;
  for (const auto& c : clusters) {
    EXPECT_NEAR(c.weight, 0.5, 0.05);
    total += c.weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // B(1/4) puts level-1 mass 3/4 on (1,0); B(3/4) puts 1/4 there
  std::vector<double> firsts{clusters[0].barycenter[0], clusters[1].barycenter[0]};
  std::sort(firsts.begin(), firsts.end());
  EXPECT_NEAR(firsts[0], 0.25, 0.05);
  EXPECT_NEAR(firsts[1], 0.75, 0.05);
}

TEST(Choquet, ExtremePointIsOneCluster) {
  const PascalCentral<double> p(400);
  const auto clusters = choquet_decompose(p, pascal_bernoulli<double>(400, 0.5), 1, 400, 0.1);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_NEAR(clusters[0].weight, 1.0, 1e-12);
  EXPECT_NEAR(clusters[0].barycenter[0], 0.5, 1e-12);
  EXPECT_EQ(clusters[0].atoms, 401u);
}

TEST(Choquet, UniformMixtureApproachesSegment) {
  const PascalCentral<double> p(200);
  for (std::size_t n : {50u, 100u, 200u}) {
    const auto cloud = weighted_cloud(p, pascal_uniform<double>(n), 1, n);
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t v = 0; v <= n; ++v) atoms.emplace_back(cloud.points[v][1], cloud.weights->weights[v]);
    const double w1 = uniform_segment_w1(atoms);
    EXPECT_LT(w1, 1.0 / n);
  }
}

TEST(Choquet, SegmentDistanceMatchesDiscretizedTransport) {
  // uniform on [0,1] replaced by M midpoint atoms: that move costs 1/(4M)
  const std::size_t M = 400;
  for (std::size_t n : {10u, 50u}) {
    std::vector<double> pos;
    for (std::size_t k = 0; k <= n; ++k) pos.push_back(static_cast<double>(k) / n);
    for (std::size_t i = 0; i < M; ++i) pos.push_back((i + 0.5) / M);
    DistanceTable<double> t(pos.size());
    for (std::size_t j = 1; j < pos.size(); ++j)
      for (std::size_t i = 0; i < j; ++i) t.set(i, j, std::fabs(pos[i] - pos[j]));
    std::vector<double> a(pos.size(), 0.0), b(pos.size(), 0.0);
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t k = 0; k <= n; ++k) {
      a[k] = 1.0 / (n + 1);
      atoms.emplace_back(pos[k], a[k]);
    }
    for (std::size_t i = 0; i < M; ++i) b[n + 1 + i] = 1.0 / M;
    const double oracle = kantorovich(a, b, t).distance;
    EXPECT_NEAR(uniform_segment_w1(atoms), oracle, 1.0 / (4 * M) + 1e-9);
  }
}

TEST(MartinLimit, CentralRayConverges) {
  const PascalCentral<Rational> p(1000);
  std::vector<VertexId> seq;
  for (std::size_t N : {62u, 125u, 250u, 500u}) seq.push_back({2 * N, N});
  const auto r = martin_limit(p, seq, 2, 0.01, 3);
  EXPECT_TRUE(r.cauchy);
  const auto f = to_float(r.limit());
  EXPECT_LT(total_variation<double>(f.weights, {0.25, 0.5, 0.25}), 1e-3);
  // exact hypergeometric value at (1000, 500)
  EXPECT_EQ(r.limit().weights[0], q(499, 2 * 999));
}

TEST(MartinLimit, ConstantTailIsExact) {
  const PascalCentral<Rational> p(50);
  std::vector<VertexId> seq;
  for (std::size_t n = 10; n <= 50; n += 10) seq.push_back({n, 0});
  const auto r = martin_limit(p, seq, 3, 1e-12, 5);
  EXPECT_TRUE(r.cauchy);
  EXPECT_EQ(r.window_spread, 0.0);
  EXPECT_EQ(r.limit().weights, (std::vector<Rational>{1, 0, 0, 0}));
}

TEST(MartinLimit, AlternatingRaysAreNotCauchy) {
  const PascalCentral<double> p(800);
  std::vector<VertexId> seq;
  bool low = true;
  for (std::size_t N = 50; N <= 400; N += 50, low = !low) seq.push_back({2 * N, low ? N / 2 : 3 * N / 2});
  EXPECT_FALSE(martin_limit(p, seq, 2, 0.05, 4).cauchy);
  EXPECT_THROW(martin_limit(p, {{10, 5}, {10, 4}}, 2, 0.05, 2), std::invalid_argument);
}

TEST(MartinLimit, ExtremeBernoulliIsAMartinLimit) {
  // the level-1 marginal of an extreme-at-tolerance Bernoulli point is reached along a ray
  const PascalCentral<double> p(2000);
  for (double prob : {0.2, 0.5, 0.7}) {
    const auto x = pascal_bernoulli<double>(400, prob);
    ASSERT_TRUE(classify_extremality(p, x, 1, 400, 0.05).extreme_at_tolerance);
    std::vector<VertexId> seq;
    for (std::size_t n : {250u, 500u, 1000u, 2000u}) seq.push_back({n, static_cast<std::size_t>(std::llround(prob * n))});
    const auto r = martin_limit(p, seq, 1, 0.01, 3);
    EXPECT_TRUE(r.cauchy);
    EXPECT_LT(total_variation(r.limit().weights, x.at(1).weights), 1e-3);
  }
}

TEST(Poulsen, Examples) {
  const PascalCentral<double> p(100);
  EXPECT_LE(poulsen_density(p, 1, 100, 1000).fill_distance, 0.01);
  EXPECT_GT(poulsen_density(p, 2, 40, 100).fill_distance, 0.1);
  EXPECT_THROW(poulsen_density(p, 3, 10, 1000), std::length_error);
}

TEST(Poulsen, SingleStageMatchesDirectMaxMin) {
  const auto y = to_float(with_central_equipment(young(5)));
  const std::size_t m = 3, r = 12;  // level 3 has 3 vertices
  const auto pts = float_points(omega_cloud(y, m, m + 1).points);
  double worst = 0;
  for (std::size_t i = 0; i <= r; ++i) {
    for (std::size_t j = 0; i + j <= r; ++j) {
      const std::vector<double> g{double(i) / r, double(j) / r, double(r - i - j) / r};
      double best = INFINITY;
      for (const auto& x : pts) best = std::min(best, total_variation<double>(x, g));
      worst = std::max(worst, best);
    }
  }
  EXPECT_NEAR(poulsen_density(y, m, m + 1, r).fill_distance, worst, 1e-15);
}

TEST(ProjectiveSystem, RoundTrip) {
  for (const GradedGraph& g : {young(6), pascal(5), unordered_pairs(3, 3), random_graph(7, 3, 0.4)}) {
    const auto eg = with_central_equipment(g);
    const auto ps = to_projective_system(eg);
    EXPECT_EQ(from_projective_system(ps), eg);
    for (std::size_t n = 0; n < ps.maps.size(); ++n) {
      for (std::size_t v = 0; v < ps.dims[n + 1]; ++v) {
        Rational s = 0;
        for (std::size_t u = 0; u < ps.dims[n]; ++u) s += ps.maps[n][u][v];
        EXPECT_EQ(s, 1);
      }
    }
  }
}
