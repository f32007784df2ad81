#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/importance_sampler.hpp"

namespace geocut {

/// A sampled point and its reported sampling probability.
struct WeightedSample {
  Point point;
  double weight = 1.0;
};

/// Multiset of samples; duplicates are distinct members.
using PointWeightedSet = std::vector<WeightedSample>;

/// Dense symmetric matrix of pairwise distances with a zero diagonal.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept { d_[i * n_ + j] = d_[j * n_ + i] = v; }

private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

[[nodiscard]] DistanceMatrix distance_matrix(const PointSet& X, double norm_p);
/// dist_S(x, y) = dist(x, y) / (w(x)·w(y)).
[[nodiscard]] DistanceMatrix distance_matrix(const PointWeightedSet& S, double norm_p);
[[nodiscard]] DistanceMatrix distance_matrix(const std::vector<std::vector<double>>& rows, double norm_p);

/// Σ over x in S, y outside S of dist(x, y); in_s[i] marks membership of X[i].
[[nodiscard]] double cut_value(const PointSet& X, const std::vector<std::uint8_t>& in_s, double norm_p);
[[nodiscard]] double cut_value(const DistanceMatrix& D, const std::vector<std::uint8_t>& in_s);

inline constexpr std::size_t kExactCutCap = 24;

struct CutSolution {
  double value = 0.0;
  std::vector<std::uint8_t> side;
  bool exact = true;
};

/// Exhaustive search over all 2^(n-1) bipartitions in Gray-code order.
/// Throws std::length_error above kExactCutCap points.
[[nodiscard]] CutSolution max_cut_exact(const DistanceMatrix& D, unsigned threads = 1);
[[nodiscard]] double max_cut_exact(const PointSet& X, double norm_p);
[[nodiscard]] double max_cut_exact(const PointWeightedSet& S, double norm_p);

/// 1-swap local search from random starts; a lower bound, flagged non-exact.
[[nodiscard]] CutSolution max_cut_local_search(const DistanceMatrix& D, unsigned restarts, std::uint64_t seed);

/// Max-Cut(S)/m² for S of m i.i.d. draws from X with probabilities `prob`,
/// each weighted by its own probability. m <= kExactCutCap.
[[nodiscard]] double offline_estimate(const PointSet& X, const std::vector<double>& prob, std::size_t m,
                                      std::uint64_t seed, double norm_p);

struct EstimateOptions {
  SamplerConfig sampler;
  std::size_t m = 16;
  bool allow_local_search = false;
  unsigned threads = 0; // 0: default_threads()
};

struct EstimateResult {
  double eta = 0.0;
  std::string status = "ok";
  bool exact = true;                 // Max-Cut(S) solved exactly
  std::vector<SampleOutcome> copies; // every copy run, in order, spares included
  PointWeightedSet samples;          // the m accepted samples
  std::uint64_t counter_words = 0;   // nominal counters of one sampler copy
};

/// Runs sampler copies over the stream (m, plus up to m spares replacing ⊥
/// outputs), weights each sample by its reported p*, and returns
/// Max-Cut(S)/m².
[[nodiscard]] EstimateResult estimate_max_cut(std::span<const StreamUpdate> stream, const EstimateOptions& opt);

} // namespace geocut
