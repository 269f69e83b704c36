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

Integer binom(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// Sum over explicit paths of the products of cotransition probabilities.
Rational kernel_by_paths(const EquippedGraph<Rational>& eg, VertexId u, VertexId v) {
  if (u == v) return 1;
  Rational s = 0;
  for (const auto& p : enumerate_paths(eg.graph(), u, v, 1'000'000)) s += path_weight(eg, p);
  return s;
}

std::vector<Rational> random_probability(std::mt19937_64& rng, std::size_t n) {
  std::vector<Rational> w(n);
  long total = 0;
  for (auto& x : w) {
    const long k = static_cast<long>(rng() % 7);
    x = k;
    total += k;
  }
  if (total == 0) {
    w[0] = 1;
    return w;
  }
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

TEST(ApplyL, Examples) {
  const auto eg = with_central_equipment(pascal(4));
  const auto one = apply_L(eg, LevelFunction<Rational>{2, {1, 1, 1}});
  EXPECT_EQ(one.level, 3u);
  for (const auto& x : one.values) EXPECT_EQ(x, 1);
  const auto lf = apply_L(eg, LevelFunction<Rational>{1, {0, 1}});
  EXPECT_EQ(lf.values, (std::vector<Rational>{0, q(1, 2), 1}));
  EXPECT_THROW(apply_L(eg, LevelFunction<Rational>{4, {0, 0, 0, 0, 0}}), std::out_of_range);
}

TEST(ApplyL, LinearMonotoneAndAdjoint) {
  const auto eg = with_central_equipment(young(7));
  std::mt19937_64 rng(5);
  for (std::size_t n = 0; n < 7; ++n) {
    const std::size_t d = eg.level_size(n);
    LevelFunction<Rational> f{n, {}}, h{n, {}};
    for (std::size_t i = 0; i < d; ++i) {
      f.values.push_back(q(static_cast<long>(rng() % 11) - 5, 3));
      h.values.push_back(q(static_cast<long>(rng() % 11) - 5, 7));
    }
    LevelFunction<Rational> combo{n, {}};
    for (std::size_t i = 0; i < d; ++i) combo.values.push_back(2 * f.values[i] - 3 * h.values[i]);
    const auto lf = apply_L(eg, f), lh = apply_L(eg, h), lc = apply_L(eg, combo);
    for (std::size_t v = 0; v < lc.values.size(); ++v) EXPECT_EQ(lc.values[v], 2 * lf.values[v] - 3 * lh.values[v]);

    LevelMeasure<Rational> mu{n + 1, random_probability(rng, eg.level_size(n + 1))};
    const auto down = apply_Lstar(eg, mu);
    Rational lhs = 0, rhs = 0;
    for (std::size_t v = 0; v < mu.weights.size(); ++v) lhs += lf.values[v] * mu.weights[v];
    for (std::size_t u = 0; u < d; ++u) rhs += f.values[u] * down.weights[u];
    EXPECT_EQ(lhs, rhs);
    EXPECT_TRUE(down.is_probability());

    // monotone: f <= f + |h| pointwise implies Lf <= L(f + |h|)
    LevelFunction<Rational> bigger = f;
    for (std::size_t i = 0; i < d; ++i) bigger.values[i] += abs(h.values[i]);
    const auto lb = apply_L(eg, bigger);
    for (std::size_t v = 0; v < lb.values.size(); ++v) EXPECT_LE(lf.values[v], lb.values[v]);
  }
}

TEST(ApplyLstar, Examples) {
  const auto eg = with_central_equipment(pascal(3));
  EXPECT_EQ(apply_Lstar(eg, LevelMeasure<Rational>::delta(2, 3, 1)).weights, (std::vector<Rational>{q(1, 2), q(1, 2)}));
  EXPECT_EQ(apply_Lstar(eg, LevelMeasure<Rational>::delta(2, 3, 0)).weights, (std::vector<Rational>{1, 0}));
}

TEST(VertexMeasure, Examples) {
  const auto eg = with_central_equipment(pascal(10));
  EXPECT_EQ(vertex_measure(eg, {4, 2}, 1).weights, (std::vector<Rational>{q(1, 2), q(1, 2)}));
  EXPECT_EQ(vertex_measure(eg, {10, 5}, 2).weights, (std::vector<Rational>{q(2, 9), q(5, 9), q(2, 9)}));
  EXPECT_EQ(vertex_measure(eg, {7, 3}, 0).weights, (std::vector<Rational>{1}));
  EXPECT_THROW(vertex_measure(eg, {4, 2}, 4), std::invalid_argument);
}

TEST(VertexMeasure, ImplicitPascalAgreesAndFloatClose) {
  const auto stored = with_central_equipment(pascal(14));
  const PascalCentral<Rational> exact(14);
  const PascalCentral<double> fl(14);
  for (std::size_t k = 0; k <= 14; ++k) {
    for (std::size_t m = 0; m < 14; ++m) {
      const auto a = vertex_measure(stored, {14, k}, m);
      EXPECT_EQ(a.weights, vertex_measure(exact, {14, k}, m).weights);
      const auto b = vertex_measure(fl, {14, k}, m);
      for (std::size_t i = 0; i <= m; ++i) EXPECT_NEAR(b.weights[i], a.weights[i].get_d(), 1e-13);
    }
  }
}

TEST(MartinKernel, Examples) {
  const auto eg = with_central_equipment(pascal(4));
  EXPECT_EQ(martin_kernel(eg, {1, 0}, {4, 2}), q(1, 2));
  EXPECT_EQ(kernel_by_paths(eg, {1, 0}, {4, 2}), q(1, 2));
  EXPECT_EQ(martin_kernel(eg, {3, 2}, {3, 2}), 1);
  EXPECT_EQ(martin_kernel(eg, {1, 1}, {3, 0}), 0);
  EXPECT_THROW(martin_kernel(eg, {3, 0}, {2, 0}), std::invalid_argument);
}

TEST(MartinKernel, MatchesPathSumAndVertexMeasure) {
  for (const GradedGraph& g : {pascal(8), young(7)}) {
    const auto eg = with_central_equipment(g);
    for (std::size_t n = 1; n <= g.depth(); ++n) {
      for (std::size_t m = n >= 6 ? n - 6 : 0; m < n; ++m) {
        for (std::size_t v = 0; v < g.level_size(n); ++v) {
          const auto mu = vertex_measure(eg, {n, v}, m);
          for (std::size_t u = 0; u < g.level_size(m); ++u) {
            const Rational k = martin_kernel(eg, {m, u}, {n, v});
            EXPECT_EQ(k, mu.weights[u]);
            EXPECT_EQ(k, kernel_by_paths(eg, {m, u}, {n, v}));
          }
        }
      }
    }
  }
}

TEST(MartinKernel, PascalHypergeometric) {
  const auto eg = with_central_equipment(pascal(16));
  for (unsigned long n = 1; n <= 16; ++n) {
    for (unsigned long m = 0; m < n; ++m) {
      for (unsigned long k = 0; k <= n; ++k) {
        for (unsigned long j = 0; j <= m; ++j) {
          Rational expected = (j <= k && k - j <= n - m) ? Rational(binom(m, j) * binom(n - m, k - j), binom(n, k)) : Rational(0);
          expected.canonicalize();
          EXPECT_EQ(martin_kernel(eg, {m, j}, {n, k}), expected);
        }
      }
    }
  }
}

TEST(MarkovMatrix, PascalLevelOne) {
  const auto eg = with_central_equipment(pascal(3));
  const auto P = markov_matrix(eg, 1);
  EXPECT_EQ(P.source_size(), 3u);
  EXPECT_EQ(P.column(0), (std::vector<Rational>{1, 0}));
  EXPECT_EQ(P.column(1), (std::vector<Rational>{q(1, 2), q(1, 2)}));
  EXPECT_EQ(P.column(2), (std::vector<Rational>{0, 1}));
  EXPECT_THROW(markov_matrix(eg, 3), std::out_of_range);
}

TEST(MarkovMatrix, ColumnsStochasticOnEdges) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto eg = with_central_equipment(random_graph(6, seed, 0.5));
    for (std::size_t n = 0; n < 6; ++n) {
      const auto P = markov_matrix(eg, n);
      for (std::size_t v = 0; v < P.source_size(); ++v) {
        Rational s = 0;
        for (std::size_t u = 0; u < P.target_size(); ++u) {
          EXPECT_EQ(P.at(u, v) != 0, eg.graph().has_edge(n, u, v));
          s += P.at(u, v);
        }
        EXPECT_EQ(s, 1);
      }
    }
  }
}

TEST(ComposedMatrix, ColumnsAreVertexMeasures) {
  const auto eg = with_central_equipment(young(8));
  for (std::size_t m = 0; m < 8; ++m) {
    for (std::size_t n = m + 1; n <= 8; ++n) {
      const auto C = composed_matrix(eg, m, n);
      for (std::size_t v = 0; v < eg.level_size(n); ++v) EXPECT_EQ(C.column(v), vertex_measure(eg, {n, v}, m).weights);
    }
  }
}

TEST(Project, CompositionLaw) {
  const auto eg = with_central_equipment(young(8));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const LevelMeasure<Rational> x{8, random_probability(rng, eg.level_size(8))};
    EXPECT_EQ(project(eg, x, 8), x);
    for (std::size_t k = 1; k < 8; ++k) {
      for (std::size_t m = 0; m < k; ++m) EXPECT_EQ(project(eg, project(eg, x, k), m), project(eg, x, m));
    }
  }
  EXPECT_THROW(project(eg, LevelMeasure<Rational>::delta(3, eg.level_size(3), 0), 4), std::invalid_argument);
}
