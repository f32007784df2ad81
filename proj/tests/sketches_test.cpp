#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "geocut/sketches.hpp"
#include "stats.hpp"

using namespace geocut;
using geocut::testing::tv_distance;
using geocut::testing::uniform_law;

namespace {

constexpr std::uint64_t kDomain = 1U << 16;

L0Estimator::Params est_params(double eps = 0.1, double delta = 0.05) {
  return {kDomain, eps, delta, 1, 1};
}

L0Sampler::Params samp_params(double delta = 0.05) { return {kDomain, delta, 1, 1, 4}; }

std::vector<std::uint64_t> random_support(std::mt19937_64& rng, std::size_t n) {
  std::set<std::uint64_t> s;
  std::uniform_int_distribution<std::uint64_t> d(0, kDomain - 1);
  while (s.size() < n) s.insert(d(rng));
  return {s.begin(), s.end()};
}

} // namespace

TEST(Field, MersenneArithmetic) {
  using namespace mersenne;
  EXPECT_EQ(mul(kPrime - 1, kPrime - 1), 1U);
  EXPECT_EQ(add(kPrime - 1, 1), 0U);
  EXPECT_EQ(sub(0, 1), kPrime - 1);
  EXPECT_EQ(mul(inverse(123456789), 123456789), 1U);
  EXPECT_EQ(from_signed(-1), kPrime - 1);
  EXPECT_EQ(add(from_signed(-5), 5), 0U);
  EXPECT_EQ(reduce(~static_cast<unsigned __int128>(0)) < kPrime, true);
}

TEST(Seeds, SameSeedSameHashes) {
  SketchSeed a{42, {1, 2}};
  EXPECT_EQ(a.key(), (SketchSeed{42, {1, 2}}).key());
  EXPECT_NE(a.key(), (SketchSeed{42, {2, 1}}).key());
  EXPECT_NE(a.key(), a.child(0).key());
  EXPECT_EQ(a.fingerprint_point(), a.child(9).fingerprint_point());
  L0Sampler s1(samp_params(), a);
  L0Sampler s2(samp_params(), a);
  s1.update(DomainIndex{77}, 1);
  s2.update(DomainIndex{77}, 1);
  EXPECT_EQ(s1, s2);
}

TEST(Repetitions, GrowLogarithmically) {
  EXPECT_EQ(sampler_repetitions(0.5), 1U);
  EXPECT_EQ(sampler_repetitions(1.0 / 3.0), 1U);
  EXPECT_EQ(sampler_repetitions(1.0 / 9.0), 2U);
  EXPECT_EQ(estimator_repetitions(0.2), 1U);
  EXPECT_EQ(estimator_repetitions(0.05), 3U);
  EXPECT_EQ(estimator_repetitions(1e-3) % 2, 1U);
  EXPECT_THROW((void)sampler_repetitions(0.0), std::invalid_argument);
}

TEST(L0Estimator, EmptyAndCancellation) {
  L0Estimator est(est_params(), SketchSeed{1, {}});
  EXPECT_EQ(est.estimate(), 0.0);
  est.update(DomainIndex{5}, 1);
  est.update(DomainIndex{5}, -1);
  EXPECT_EQ(est.estimate(), 0.0);
  EXPECT_TRUE(est.empty_state());
}

TEST(L0Estimator, FiveInsertsWithinEpsilon) {
  const double eps = 0.1;
  const double delta = 0.05;
  int outside = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    L0Estimator est(est_params(eps, delta), SketchSeed{static_cast<std::uint64_t>(t), {}});
    for (std::uint64_t i = 0; i < 5; ++i) est.update(DomainIndex{1000 + 37 * i}, 1);
    const double r = est.estimate();
    if (r < (1 - eps) * 5 || r > (1 + eps) * 5) ++outside;
  }
  EXPECT_LE(outside, static_cast<int>(delta * trials));
}

TEST(L0Estimator, ConcentrationAgainstExactSupport) {
  const double eps = 0.2;
  const double delta = 0.1;
  std::mt19937_64 rng(3);
  for (std::size_t n : {1U, 10U, 100U}) {
    int outside = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
      auto support = random_support(rng, n);
      L0Estimator est(est_params(eps, delta), SketchSeed{rng(), {}});
      for (auto i : support) est.update(DomainIndex{i}, 1);
      const double r = est.estimate();
      if (std::abs(r - static_cast<double>(n)) > eps * static_cast<double>(n)) ++outside;
    }
    EXPECT_LE(outside, static_cast<int>((delta + 0.01) * trials)) << "n=" << n;
  }
}

TEST(L0Estimator, LargeSupportUsesDeeperLevels) {
  const double eps = 0.2;
  std::mt19937_64 rng(9);
  auto support = random_support(rng, 5000);
  int good = 0;
  for (int t = 0; t < 50; ++t) {
    L0Estimator est({kDomain, eps, 0.05, 1, 1}, SketchSeed{static_cast<std::uint64_t>(t), {7}});
    for (auto i : support) est.update(DomainIndex{i}, 1);
    if (std::abs(est.estimate() - 5000.0) <= eps * 5000.0) ++good;
  }
  EXPECT_GE(good, 45);
}

TEST(L0Estimator, CopiesAreIndependentButMergeTogether) {
  L0Estimator a({kDomain, 0.2, 0.05, 1, 2}, SketchSeed{5, {}});
  L0Estimator b({kDomain, 0.2, 0.05, 1, 2}, SketchSeed{5, {}});
  for (std::uint64_t i = 0; i < 20; ++i) a.update(DomainIndex{i * 3}, 1);
  for (std::uint64_t i = 20; i < 40; ++i) b.update(DomainIndex{i * 3}, 1);
  auto m = sketch_merge(a, b);
  EXPECT_NEAR(m.estimate(0), 40.0, 8.0);
  EXPECT_NEAR(m.estimate(1), 40.0, 8.0);
  EXPECT_THROW((void)m.estimate(2), std::out_of_range);
}

TEST(L0Sampler, InsertDeleteYieldsBottom) {
  L0Sampler s(samp_params(), SketchSeed{2, {}});
  EXPECT_FALSE(s.sample().has_value());
  s.update(DomainIndex{9}, 1);
  s.update(DomainIndex{9}, -1);
  EXPECT_FALSE(s.sample().has_value());
  EXPECT_TRUE(s.empty_state());
}

TEST(L0Sampler, SingleSurvivorIsRecovered) {
  int hits = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    L0Sampler s(samp_params(0.05), SketchSeed{static_cast<std::uint64_t>(t), {}});
    s.update(DomainIndex{100}, 1);
    s.update(DomainIndex{200}, 1);
    s.update(DomainIndex{200}, -1);
    auto r = s.sample();
    if (r && r->value() == 100) ++hits;
    if (r) ASSERT_EQ(r->value(), 100U);
  }
  EXPECT_GE(hits, static_cast<int>(0.95 * trials));
}

TEST(L0Sampler, FourPointSupportIsUniform) {
  const std::vector<std::uint64_t> support{3, 1000, 4097, 60000};
  std::map<std::uint64_t, std::uint64_t> counts;
  int failures = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    L0Sampler s(samp_params(0.05), SketchSeed{static_cast<std::uint64_t>(t) * 7919, {}});
    for (auto i : support) s.update(DomainIndex{i}, 1);
    if (auto r = s.sample()) {
      ++counts[r->low64()];
    } else {
      ++failures;
    }
  }
  EXPECT_LE(failures, static_cast<int>(0.05 * trials));
  EXPECT_LE(tv_distance(counts, uniform_law(support)), 0.02);
}

TEST(L0Sampler, NegativeTransientsAndMultiplicities) {
  // Frequencies up to M are allowed; support is what matters.
  L0Sampler s({kDomain, 0.01, 4, 1, 4}, SketchSeed{8, {}});
  s.update(DomainIndex{11}, 3);
  s.update(DomainIndex{12}, -1);
  s.update(DomainIndex{12}, 1);
  auto r = s.sample();
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->value(), 11U);
}

TEST(L0Sampler, RejectsIndicesOutsideDomain) {
  L0Sampler s({16, 0.1, 1, 1, 4}, SketchSeed{1, {}});
  EXPECT_THROW(s.update(DomainIndex{16}, 1), std::out_of_range);
  EXPECT_THROW(L0Sampler({0, 0.1, 1, 1, 4}, SketchSeed{}), std::invalid_argument);
}

TEST(Merge, EmptyPlusEmptyIsEmpty) {
  L0Sampler a(samp_params(), SketchSeed{4, {}});
  L0Sampler b(samp_params(), SketchSeed{4, {}});
  EXPECT_TRUE(sketch_merge(a, b).empty_state());
  L0Estimator c(est_params(), SketchSeed{4, {}});
  L0Estimator d(est_params(), SketchSeed{4, {}});
  EXPECT_TRUE(sketch_merge(c, d).empty_state());
}

TEST(Merge, DisjointSplitsMatchWholeStream) {
  std::mt19937_64 rng(21);
  for (int split = 0; split < 100; ++split) {
    auto support = random_support(rng, 1 + rng() % 40);
    SketchSeed seed{rng(), {static_cast<std::uint64_t>(split)}};
    L0Sampler sa(samp_params(), seed), sb(samp_params(), seed), sab(samp_params(), seed);
    L0Estimator ea(est_params(), seed), eb(est_params(), seed), eab(est_params(), seed);
    for (auto i : support) {
      const bool left = (rng() & 1U) != 0;
      (left ? sa : sb).update(DomainIndex{i}, 1);
      (left ? ea : eb).update(DomainIndex{i}, 1);
      sab.update(DomainIndex{i}, 1);
      eab.update(DomainIndex{i}, 1);
    }
    auto sm = sketch_merge(sa, sb);
    auto em = sketch_merge(ea, eb);
    ASSERT_EQ(sm, sab);
    ASSERT_EQ(em, eab);
    ASSERT_EQ(sm.sample(), sab.sample());
    ASSERT_EQ(em.estimate(), eab.estimate());
  }
}

TEST(Merge, StreamPlusNegationIsEmpty) {
  SketchSeed seed{77, {}};
  L0Sampler pos(samp_params(), seed), neg(samp_params(), seed);
  L0Estimator epos(est_params(), seed), eneg(est_params(), seed);
  for (std::uint64_t i = 0; i < 30; ++i) {
    pos.update(DomainIndex{i * 11}, 1);
    neg.update(DomainIndex{i * 11}, -1);
    epos.update(DomainIndex{i * 11}, 1);
    eneg.update(DomainIndex{i * 11}, -1);
  }
  auto s = sketch_merge(pos, neg);
  auto e = sketch_merge(epos, eneg);
  EXPECT_FALSE(s.sample().has_value());
  EXPECT_EQ(e.estimate(), 0.0);
}

TEST(Merge, MismatchedSeedsOrParamsAreRejected) {
  L0Sampler a(samp_params(), SketchSeed{1, {}});
  L0Sampler b(samp_params(), SketchSeed{2, {}});
  L0Sampler c(samp_params(0.01), SketchSeed{1, {}});
  EXPECT_THROW(a += b, SketchMismatch);
  EXPECT_THROW(a += c, SketchMismatch);
  L0Estimator d(est_params(), SketchSeed{1, {}});
  L0Estimator e(est_params(0.2), SketchSeed{1, {}});
  EXPECT_THROW(d += e, SketchMismatch);
}

TEST(Linearity, UpdateOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  auto support = random_support(rng, 25);
  std::vector<std::pair<std::uint64_t, int>> ops;
  for (auto i : support) ops.emplace_back(i, +1);
  for (std::size_t j = 0; j < 10; ++j) {
    ops.emplace_back(support[j], -1);
    ops.emplace_back(support[j], +1);
  }
  SketchSeed seed{99, {}};
  L0Sampler s1(samp_params(), seed), s2(samp_params(), seed);
  L0Estimator e1(est_params(), seed), e2(est_params(), seed);
  for (auto [i, d] : ops) {
    s1.update(DomainIndex{i}, d);
    e1.update(DomainIndex{i}, d);
  }
  std::shuffle(ops.begin(), ops.end(), rng);
  for (auto [i, d] : ops) {
    s2.update(DomainIndex{i}, d);
    e2.update(DomainIndex{i}, d);
  }
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(e1, e2);
}

TEST(Serialization, BlobRoundTripAndValidation) {
  SketchSeed seed{123, {4, 5}};
  L0Sampler s({kDomain, 0.05, 3, 2, 4}, seed);
  L0Estimator e({kDomain, 0.2, 0.05, 3, 2}, seed);
  for (std::uint64_t i = 0; i < 50; ++i) {
    s.update(DomainIndex{i * 97}, 1);
    e.update(DomainIndex{i * 97}, 1);
  }
  auto sblob = s.serialize();
  auto eblob = e.serialize();
  auto s2 = L0Sampler::deserialize(sblob);
  auto e2 = L0Estimator::deserialize(eblob);
  EXPECT_EQ(s2, s);
  EXPECT_EQ(e2, e);
  EXPECT_EQ(s2.sample(1), s.sample(1));
  EXPECT_EQ(e2.estimate(1), e.estimate(1));
  // the revived sketch keeps accepting updates under the same hashes
  s2.update(DomainIndex{1}, 1);
  s.update(DomainIndex{1}, 1);
  EXPECT_EQ(s2, s);

  EXPECT_THROW(L0Estimator::deserialize(sblob), std::invalid_argument);
  sblob.pop_back();
  EXPECT_THROW(L0Sampler::deserialize(sblob), std::invalid_argument);
  eblob.push_back(0);
  EXPECT_THROW(L0Estimator::deserialize(eblob), std::invalid_argument);
}

TEST(Space, CounterCountsArePolylog) {
  // O(log N · log(1/δ)) cells of 3 words for the sampler.
  for (std::uint64_t n : {std::uint64_t{1} << 10, std::uint64_t{1} << 20, std::uint64_t{1} << 40}) {
    L0Sampler s({n, 0.01, 1, 1, 4}, SketchSeed{});
    const double logn = std::log2(static_cast<double>(n));
    EXPECT_EQ(s.counter_count(), 3U * sampler_repetitions(0.01) * subsampling_levels(n));
    EXPECT_LE(static_cast<double>(s.counter_count()), 3.0 * 5.0 * (logn + 1));
    L0Estimator e({n, 0.1, 0.01, 1, 1}, SketchSeed{});
    EXPECT_EQ(e.counter_count(), static_cast<std::uint64_t>(estimator_repetitions(0.01)) * subsampling_levels(n) * 1600U);
  }
}
