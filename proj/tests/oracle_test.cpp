#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "geocut/oracle.hpp"
#include "geocut/quadtree.hpp"
#include "stats.hpp"

using namespace geocut;

namespace {

PointSet random_points(std::size_t n, const GridConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> coord(1, static_cast<std::int64_t>(cfg.delta()));
  std::set<Point> s;
  while (s.size() < n) {
    Point p;
    for (std::uint32_t j = 0; j < cfg.dim(); ++j) p.coords.push_back(coord(rng));
    s.insert(p);
  }
  return {s.begin(), s.end()};
}

PointSet clustered(std::size_t n, const GridConfig& cfg, std::mt19937_64& rng) {
  // one tight cluster holding most points plus scattered outliers
  const auto span = static_cast<std::int64_t>(std::ceil(std::pow(2.0 * static_cast<double>(n), 1.0 / cfg.dim())));
  std::uniform_int_distribution<std::int64_t> near(1, std::clamp<std::int64_t>(span, 2, static_cast<std::int64_t>(cfg.delta())));
  std::uniform_int_distribution<std::int64_t> far(1, static_cast<std::int64_t>(cfg.delta()));
  std::set<Point> s;
  while (s.size() < n) {
    Point p;
    const bool tight = s.size() < (3 * n) / 4;
    for (std::uint32_t j = 0; j < cfg.dim(); ++j) p.coords.push_back(tight ? near(rng) : far(rng));
    s.insert(p);
  }
  return {s.begin(), s.end()};
}

} // namespace

TEST(ExactQ, LineExample) {
  PointSet X{{{1}}, {{2}}, {{4}}};
  auto q = oracle::exact_q(X, 1.0);
  EXPECT_DOUBLE_EQ(q[0], 4.0);
  EXPECT_DOUBLE_EQ(q[1], 3.0);
  EXPECT_DOUBLE_EQ(q[2], 5.0);
  EXPECT_DOUBLE_EQ(oracle::exact_Q(X, 1.0), 12.0);
}

TEST(ExactQ, TrivialSets) {
  EXPECT_DOUBLE_EQ(oracle::exact_q({Point{{3, 3}}}, 2.0)[0], 0.0);
  PointSet pair{{{1, 1}}, {{4, 5}}};
  auto q = oracle::exact_q(pair, 2.0);
  EXPECT_DOUBLE_EQ(q[0], 5.0);
  EXPECT_DOUBLE_EQ(q[1], 5.0);
}

TEST(ExactProfile, TreeSumsAgreeWithQuadtreeModule) {
  std::mt19937_64 rng(1);
  GridConfig cfg(16, 3, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto X = random_points(25, cfg, rng);
    auto v = draw_shift(cfg, static_cast<std::uint64_t>(t));
    ShiftedQuadtree tree(cfg, v);
    auto qt = oracle::exact_q_tree(X, v, cfg);
    for (std::size_t a = 0; a < X.size(); ++a) ASSERT_NEAR(qt[a], tree.q_tree(X[a], X), 1e-9 * qt[a]);
  }
}

TEST(ExactProfile, CriticalLevelFromExactCounts) {
  GridConfig cfg(16, 2);
  ShiftVector v{{1, 1}};
  // all ten points in the level-3 cell [1,8]^2; its four children hold 4, 3, 2, 1
  PointSet X{{{1, 1}}, {{1, 2}}, {{2, 1}}, {{2, 2}},  // child (0,0)
             {{1, 5}}, {{2, 6}}, {{3, 7}},            // child (0,1)
             {{5, 1}}, {{6, 2}},                      // child (1,0)
             {{8, 8}}};                               // child (1,1)
  auto p = oracle::exact_profile(X, v, cfg);
  EXPECT_EQ(p.heavy_count[3], 10U);
  EXPECT_EQ(p.heavy_count[4], 4U);
  EXPECT_EQ(p.k, 3U);
  auto crit = oracle::critical_levels(p);
  EXPECT_NE(std::find(crit.begin(), crit.end(), p.k), crit.end());
}

TEST(ExactProfile, TwoDistantPointsStayAtRoot) {
  GridConfig cfg(64, 2);
  PointSet X{{{1, 1}}, {{64, 64}}};
  auto p = oracle::exact_profile(X, ShiftVector{{33, 33}}, cfg); // shifted 0-based coords 32 and 95
  EXPECT_EQ(p.k, 1U);
  EXPECT_DOUBLE_EQ(p.prob[0], 0.5);
  EXPECT_DOUBLE_EQ(p.prob[1], 0.5);
}

TEST(ExactProfile, PairIsUniformUnderEveryShift) {
  GridConfig cfg(8, 2);
  PointSet X{{{2, 3}}, {{7, 5}}};
  for (std::int64_t a = 1; a <= 8; ++a)
    for (std::int64_t b = 1; b <= 8; ++b) {
      auto law = oracle::exact_alg1_distribution(X, ShiftVector{{a, b}}, cfg);
      EXPECT_NEAR(law[X[0]], 0.5, 1e-12);
      EXPECT_NEAR(law[X[1]], 0.5, 1e-12);
    }
}

TEST(ExactProfile, StructuralFacts) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t d = 1 + static_cast<std::uint32_t>(t % 3);
    GridConfig cfg(d == 3 ? 16 : 64, d, t % 2 == 0 ? 2.0 : 1.0);
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 40);
    auto X = t % 2 == 0 ? random_points(n, cfg, rng) : clustered(n, cfg, rng);
    auto v = draw_shift(cfg, rng());
    auto p = oracle::exact_profile(X, v, cfg);
    const double nn = static_cast<double>(n);
    const double beta1 = std::pow(static_cast<double>(d), 1.0 / cfg.norm_p()) * std::pow(2.0, cfg.depth());

    double total = 0.0;
    for (double x : p.prob) total += x;
    ASSERT_NEAR(total, 1.0, 1e-12);

    // heavy path: each h_i is the parent of h_{i+1}
    for (std::uint32_t i = 1; i < p.k; ++i) {
      for (std::size_t j = 0; j < d; ++j) ASSERT_EQ(p.heavy[i + 1][j] / 2, p.heavy[i][j]);
    }
    ASSERT_NEAR(p.q_tilde[1], beta1 * nn, 1e-9 * beta1 * nn);
    for (std::uint32_t i = 2; i <= p.k; ++i) ASSERT_LE(p.q_tilde[i], p.q_tilde[i - 1] * (1 + 1e-12));

    // X_i^ext = X_1 ∪ … ∪ X_i below the critical level
    for (std::uint32_t i = 1; i < p.k; ++i) {
      std::vector<std::size_t> expect;
      for (std::size_t a = 0; a < n; ++a)
        if (p.ell[a] <= i) expect.push_back(a);
      ASSERT_EQ(p.ext_members[i], expect);
    }

    double sum_qt_ell = 0.0;
    for (std::size_t a = 0; a < n; ++a) sum_qt_ell += p.q_tilde[p.ell[a]];
    double denom = 0.0;
    for (std::uint32_t i = 1; i <= p.k; ++i) denom += static_cast<double>(p.ext_size[i]) * p.q_tilde[i];
    ASSERT_LE(denom, (p.leaf_level) * sum_qt_ell * (1 + 1e-12));

    for (std::size_t a = 0; a < n; ++a) {
      // the reported probability counts level k only for points inside h_k
      double expect = 0.0;
      for (std::uint32_t i = p.ell[a]; i < p.k; ++i) expect += p.r[i] / static_cast<double>(p.ext_size[i]);
      if (p.ell[a] == p.k) expect += p.r[p.k] / static_cast<double>(p.ext_size[p.k]);
      ASSERT_NEAR(p.prob[a], expect, 1e-12);
      // probability lower bound in terms of the q̃ share
      ASSERT_GE(p.prob[a] * (1 + 1e-12), p.q_tilde[p.ell[a]] / (p.leaf_level * sum_qt_ell));
      // (q_T/2) / q̃_ℓ lies in [min(σ-, 1-σ+)/2, 1]
      const double ratio = 0.5 * p.q_tree[a] / p.q_tilde[p.ell[a]];
      ASSERT_LE(ratio, 1.0 + 1e-12);
      ASSERT_GE(ratio, 0.35 / 2.0 - 1e-12);
    }
  }
}

TEST(ExactProfile, WindowLowerEndIsReached) {
  // two neighbours sharing a level-L cell: q_T/2 = β_{L+1}, q̃_L = 2β_L
  GridConfig cfg(8, 1);
  PointSet X{{{3}}, {{4}}};
  auto p = oracle::exact_profile(X, ShiftVector{{1}}, cfg);
  ASSERT_EQ(p.k, cfg.depth());
  EXPECT_DOUBLE_EQ(0.5 * p.q_tree[0] / p.q_tilde[p.ell[0]], 0.25);
}

TEST(ExactProfile, IsolatedPointBeatsItsShare) {
  GridConfig cfg(64, 2);
  PointSet X{{{1, 1}}, {{2, 1}}, {{60, 60}}};
  auto p = oracle::exact_profile(X, ShiftVector{{33, 33}}, cfg);
  double sum = 0.0;
  for (std::size_t a = 0; a < X.size(); ++a) sum += p.q_tilde[p.ell[a]];
  const double share = p.q_tilde[p.ell[2]] / sum;
  EXPECT_GT(p.prob[2], share / (p.leaf_level));
  EXPECT_EQ(p.ell[2], 1U);
}

TEST(ExactProfile, OfflineDrawsFollowTheLaw) {
  std::mt19937_64 gen(9);
  GridConfig cfg(64, 2);
  auto X = clustered(12, cfg, gen);
  auto v = draw_shift(cfg, 4);
  auto p = oracle::exact_profile(X, v, cfg);
  std::map<std::size_t, std::uint64_t> counts;
  std::map<std::size_t, double> law;
  for (std::size_t a = 0; a < X.size(); ++a) law[a] = p.prob[a];
  SplitMix64 rng(77);
  for (int t = 0; t < 100000; ++t) ++counts[oracle::offline_alg1_draw(p, rng)];
  EXPECT_LE(geocut::testing::tv_distance(counts, law), 0.02);
}

TEST(Thresholds, Validation) {
  EXPECT_NO_THROW(oracle::Thresholds{}.validate());
  EXPECT_THROW((oracle::Thresholds{0.6, 0.5, 0.65}.validate()), std::invalid_argument);
  EXPECT_THROW((oracle::Thresholds{0.7, 0.55, 0.65}.validate()), std::invalid_argument);
  EXPECT_THROW((oracle::Thresholds{0.6, 0.66, 0.65}.validate()), std::invalid_argument);
}
