#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/importance_sampler.hpp"

namespace geocut {

// Monte Carlo harnesses that compare streaming components against the oracles.
// Shared by the CLI `verify` subcommand and the acceptance run.

struct Alg1PointStat {
  Point x;
  double q = 0.0;         // exact q(x)
  double exact = 0.0;     // exact Pr[z* = x] with exact counts
  double empirical = 0.0; // observed frequency among non-⊥ outputs
  std::size_t hits = 0;
  double mean_p = 0.0; // mean reported p* when z* = x
};

struct Alg1Check {
  std::size_t trials = 0;
  std::size_t bottoms = 0;
  std::map<std::string, std::size_t> statuses;
  std::uint32_t k_exact = 0;
  std::vector<Alg1PointStat> points;
  double tv = 1.0;
  /// Largest |p*/freq(z*) − 1| over copies whose z* has frequency >= 1e-3.
  double calibration_error = 0.0;
  /// min_x freq(x)·Q/q(x), and the same with the exact law.
  double dampening = 0.0;
  double dampening_exact = 0.0;
  /// 1/(20·L·d·log2Δ).
  double dampening_bound = 0.0;
};

/// Runs `trials` sampler copies (run coins 0..trials-1) over X under `shift`.
[[nodiscard]] Alg1Check check_alg1_law(const PointSet& X, const SamplerConfig& cfg, const ShiftVector& shift,
                                       std::size_t trials, unsigned threads = 0);

struct TreeCostCheck {
  std::size_t instances = 0;
  double max_relative_error = 0.0; // q_tree formula vs pairwise tree-distance sums
};

/// Random instances with n <= 64, d <= 3, Δ <= 16 and p in {1, 2}.
[[nodiscard]] TreeCostCheck check_tree_cost_formula(std::size_t instances, std::uint64_t seed);

struct MetricInvariantCheck {
  std::size_t instances = 0;
  std::size_t pair_violations = 0;   // dist(x,y)·Q > 4·q(x)·q(y)
  std::size_t cut_violations = 0;    // Max-Cut(X) < Q/4
  double min_pair_slack = 0.0;       // min 4·q(x)·q(y) / (dist(x,y)·Q) over x != y
  double min_cut_ratio = 0.0;        // min Max-Cut(X) / (Q/4)
};

/// Random instances with 2 <= n <= 14 on [64]^2 and [16]^3, p in {1, 2}.
[[nodiscard]] MetricInvariantCheck check_metric_invariants(std::size_t instances, std::uint64_t seed);

} // namespace geocut
