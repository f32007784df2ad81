#include "geocut/maxcut.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "geocut/oracle.hpp"
#include "stats.hpp"

using namespace geocut;

namespace {

PointSet line(std::initializer_list<std::int64_t> xs) {
  PointSet X;
  for (auto x : xs) X.push_back(Point{{x}});
  return X;
}

PointSet random_set(std::size_t n, std::uint32_t d, std::int64_t delta, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> c(1, delta);
  PointSet X(n);
  for (auto& x : X) {
    x.coords.resize(d);
    for (auto& v : x.coords) v = c(rng);
  }
  return X;
}

} // namespace

TEST(CutValue, SmallExamples) {
  const auto X = line({1, 2, 4});
  EXPECT_EQ(cut_value(X, {0, 0, 0}, 1.0), 0.0);
  EXPECT_EQ(cut_value(X, {1, 1, 1}, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(cut_value(X, {0, 0, 1}, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(cut_value(X, {1, 1, 0}, 1.0), 5.0);
  const PointSet pair{Point{{1, 1}}, Point{{4, 5}}};
  EXPECT_DOUBLE_EQ(cut_value(pair, {1, 0}, 2.0), 5.0);
  EXPECT_THROW((void)cut_value(X, {1, 0}, 1.0), std::invalid_argument);
}

TEST(MaxCutExact, SmallExamples) {
  EXPECT_EQ(max_cut_exact(line({3}), 1.0), 0.0);
  EXPECT_EQ(max_cut_exact(PointSet{}, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(max_cut_exact(line({1, 2, 4}), 1.0), 5.0);
}

TEST(MaxCutExact, AgreesWithBruteForce) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 10);
    const auto d = static_cast<std::uint32_t>(1 + t % 3);
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const auto X = random_set(n, d, 32, rng);
    const double want = oracle::brute_force_max_cut(X, p);
    const auto D = distance_matrix(X, p);
    const auto sol = max_cut_exact(D);
    EXPECT_NEAR(sol.value, want, 1e-9 * std::max(1.0, want));
    EXPECT_TRUE(sol.exact);
    EXPECT_NEAR(cut_value(D, sol.side), sol.value, 1e-9 * std::max(1.0, want));
    EXPECT_NEAR(max_cut_exact(D, 4).value, want, 1e-9 * std::max(1.0, want));
  }
}

TEST(MaxCutExact, RejectsSetsAboveTheCap) {
  std::mt19937_64 rng(2);
  const auto X = random_set(kExactCutCap + 1, 2, 64, rng);
  EXPECT_THROW((void)max_cut_exact(X, 2.0), std::length_error);
}

TEST(MaxCutExact, WeightedSets) {
  std::mt19937_64 rng(5);
  const auto X = random_set(9, 2, 64, rng);
  PointWeightedSet unit;
  PointWeightedSet half;
  for (const auto& x : X) {
    unit.push_back({x, 1.0});
    half.push_back({x, 0.5});
  }
  const double plain = max_cut_exact(X, 2.0);
  EXPECT_NEAR(max_cut_exact(unit, 2.0), plain, 1e-9 * plain);
  EXPECT_NEAR(max_cut_exact(half, 2.0), 4.0 * plain, 1e-9 * plain);
  half.front().weight = 0.0;
  EXPECT_THROW((void)distance_matrix(half, 2.0), std::invalid_argument);
}

TEST(MaxCutExact, DuplicatesAreDistinctMembers) {
  const Point a{{1, 1}};
  const Point b{{4, 5}};
  // k copies of a and m-k of b: the best cut separates the two groups.
  const PointWeightedSet S{{a, 1.0}, {a, 1.0}, {a, 1.0}, {b, 1.0}};
  EXPECT_DOUBLE_EQ(max_cut_exact(S, 2.0), 3 * 5.0);
}

TEST(MaxCutExact, ScaleCovariance) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto X = random_set(8, 2, 20, rng);
    PointSet Y = X;
    for (auto& y : Y) {
      for (auto& v : y.coords) v = 3 * v;
    }
    for (double p : {1.0, 2.0}) {
      const double base = max_cut_exact(X, p);
      EXPECT_NEAR(max_cut_exact(Y, p), 3.0 * base, 1e-9 * base);
    }
  }
}

TEST(MaxCutExact, MetricInvariants) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto X = random_set(3 + static_cast<std::size_t>(t % 9), 2, 64, rng);
    const auto q = oracle::exact_q(X, 2.0);
    const double Q = oracle::exact_Q(X, 2.0);
    EXPECT_GE(max_cut_exact(X, 2.0), Q / 4.0 * (1 - 1e-12));
    for (std::size_t i = 0; i < X.size(); ++i) {
      for (std::size_t j = 0; j < X.size(); ++j) {
        EXPECT_LE(lp_distance(X[i], X[j], 2.0) * Q, 4.0 * q[i] * q[j] * (1 + 1e-12));
      }
    }
  }
}

TEST(LocalSearch, NeverExceedsTheOptimum) {
  std::mt19937_64 rng(34);
  int matched = 0;
  for (int t = 0; t < 30; ++t) {
    const auto X = random_set(12, 2, 64, rng);
    const auto D = distance_matrix(X, 2.0);
    const auto exact = max_cut_exact(D);
    const auto local = max_cut_local_search(D, 20, static_cast<std::uint64_t>(t));
    EXPECT_FALSE(local.exact);
    EXPECT_LE(local.value, exact.value * (1 + 1e-12));
    EXPECT_GE(local.value, 0.5 * exact.value);
    EXPECT_NEAR(cut_value(D, local.side), local.value, 1e-9 * exact.value);
    if (local.value >= exact.value * (1 - 1e-9)) ++matched;
  }
  EXPECT_GE(matched, 27);
}

TEST(SeparatedClusters, ClosedFormMatchesEnumeration) {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<std::int64_t> jitter(0, 3);
  for (int t = 0; t < 20; ++t) {
    PointSet A;
    PointSet B;
    for (int i = 0; i < 8; ++i) {
      A.push_back(Point{{5 + jitter(rng), 5 + jitter(rng)}});
      B.push_back(Point{{50 + jitter(rng), 40 + jitter(rng)}});
    }
    const auto closed = oracle::separated_clusters_max_cut(A, B, 2.0);
    ASSERT_TRUE(closed);
    PointSet X = A;
    X.insert(X.end(), B.begin(), B.end());
    EXPECT_NEAR(*closed, max_cut_exact(X, 2.0), 1e-9 * *closed);
  }
  const PointSet A{Point{{1, 1}}, Point{{30, 1}}};
  const PointSet B{Point{{2, 1}}, Point{{31, 1}}};
  EXPECT_FALSE(oracle::separated_clusters_max_cut(A, B, 2.0));
}

TEST(OfflineEstimate, ExactProbabilitiesConcentrate) {
  std::mt19937_64 rng(89);
  const auto X = random_set(14, 2, 64, rng);
  const auto q = oracle::exact_q(X, 2.0);
  const double Q = oracle::exact_Q(X, 2.0);
  std::vector<double> prob;
  for (double v : q) prob.push_back(v / Q);
  const double truth = max_cut_exact(X, 2.0);
  std::vector<double> ratios;
  for (std::uint64_t t = 0; t < 60; ++t) ratios.push_back(offline_estimate(X, prob, 16, t, 2.0) / truth);
  EXPECT_NEAR(geocut::testing::median(ratios), 1.0, 0.25);
}

TEST(EstimateMaxCut, EmptyStreamGivesZero) {
  EstimateOptions opt;
  opt.sampler.grid = GridConfig(64, 2);
  opt.m = 4;
  const auto res = estimate_max_cut({}, opt);
  EXPECT_EQ(res.eta, 0.0);
  EXPECT_EQ(res.status, "ok");
  EXPECT_TRUE(res.samples.empty());
}

TEST(EstimateMaxCut, RejectsBadSampleCounts) {
  EstimateOptions opt;
  opt.sampler.grid = GridConfig(64, 2);
  opt.m = 1;
  EXPECT_THROW((void)estimate_max_cut({}, opt), std::invalid_argument);
  opt.m = kExactCutCap + 1;
  EXPECT_THROW((void)estimate_max_cut({}, opt), std::invalid_argument);
}

TEST(EstimateMaxCut, TwoPoints) {
  EstimateOptions opt;
  opt.sampler.grid = GridConfig(64, 2);
  opt.m = 16;
  const Point a{{3, 7}};
  const Point b{{60, 41}};
  const double D = lp_distance(a, b, 2.0);
  const std::vector<StreamUpdate> stream{{a, +1}, {b, +1}};
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    opt.sampler.seed = seed;
    const auto res = estimate_max_cut(stream, opt);
    ASSERT_EQ(res.status, "ok");
    ASSERT_EQ(res.samples.size(), 16u);
    const auto k = std::count_if(res.samples.begin(), res.samples.end(), [&](const auto& s) { return s.point == a; });
    // Max-Cut(S) separates the copies of a from those of b.
    double expect = 0.0;
    for (const auto& s : res.samples) {
      if (!(s.point == a)) continue;
      for (const auto& t : res.samples) {
        if (t.point == b) expect += D / (s.weight * t.weight);
      }
    }
    EXPECT_NEAR(res.eta, expect / 256.0, 1e-9 * D);
    EXPECT_LE(res.eta, D * 1.1);
    if (k == 8) EXPECT_NEAR(res.eta, D, 0.1 * D);
    ratios.push_back(res.eta / D);
  }
  EXPECT_NEAR(geocut::testing::median(ratios), 1.0, 0.1);
}

TEST(EstimateMaxCut, DeterministicAcrossThreadCounts) {
  EstimateOptions opt;
  opt.sampler.grid = GridConfig(64, 2);
  opt.sampler.seed = 31;
  opt.m = 6;
  std::mt19937_64 rng(3);
  std::vector<StreamUpdate> stream;
  for (const auto& x : random_set(10, 2, 64, rng)) stream.push_back({x, +1});
  opt.threads = 1;
  const auto a = estimate_max_cut(stream, opt);
  opt.threads = 3;
  const auto b = estimate_max_cut(stream, opt);
  EXPECT_EQ(a.eta, b.eta);
  ASSERT_EQ(a.copies.size(), b.copies.size());
  for (std::size_t i = 0; i < a.copies.size(); ++i) {
    EXPECT_EQ(a.copies[i].z, b.copies[i].z);
    EXPECT_EQ(a.copies[i].p, b.copies[i].p);
  }
  EXPECT_GT(a.eta, 0.0);
  EXPECT_GT(a.counter_words, 0u);
}
