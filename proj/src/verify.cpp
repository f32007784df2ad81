#include "geocut/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geocut/generate.hpp"
#include "geocut/maxcut.hpp"
#include "geocut/oracle.hpp"
#include "geocut/parallel.hpp"
#include "geocut/quadtree.hpp"

namespace geocut {

Alg1Check check_alg1_law(const PointSet& X, const SamplerConfig& cfg, const ShiftVector& shift, std::size_t trials,
                         unsigned threads) {
  cfg.validate();
  if (X.size() < 2) throw std::invalid_argument("the law check needs at least two points");
  const auto prof = oracle::exact_profile(X, shift, cfg.grid,
                                          {cfg.thresholds.tau, cfg.thresholds.sigma_minus, cfg.thresholds.sigma_plus});
  const double Q = oracle::exact_Q(X, cfg.grid.norm_p());
  std::map<Point, std::size_t> index;
  for (std::size_t i = 0; i < X.size(); ++i) index[X[i]] = i;

  std::vector<SampleOutcome> outs(trials);
  parallel_for(trials, threads, [&](std::size_t c) {
    ImportanceSampler s(cfg, shift, run_seed(cfg, c));
    for (const auto& x : X) s.update(x, +1);
    outs[c] = s.finalize();
  });

  Alg1Check res;
  res.trials = trials;
  res.k_exact = prof.k;
  res.points.resize(X.size());
  std::vector<double> p_sum(X.size(), 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) res.points[i] = {X[i], prof.q[i], prof.prob[i], 0.0, 0, 0.0};
  for (const auto& o : outs) {
    ++res.statuses[o.status];
    if (!o.z) {
      ++res.bottoms;
      continue;
    }
    const auto it = index.find(*o.z);
    if (it == index.end()) throw std::logic_error("sampler returned a point outside the input");
    ++res.points[it->second].hits;
    p_sum[it->second] += o.p;
  }
  const double valid = static_cast<double>(trials - res.bottoms);
  double tv = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    auto& pt = res.points[i];
    pt.empirical = valid > 0 ? static_cast<double>(pt.hits) / valid : 0.0;
    pt.mean_p = pt.hits > 0 ? p_sum[i] / static_cast<double>(pt.hits) : 0.0;
    tv += std::abs(pt.empirical - pt.exact);
  }
  res.tv = valid > 0 ? tv / 2.0 : 1.0;

  for (const auto& o : outs) {
    if (!o.z) continue;
    const auto& pt = res.points[index.at(*o.z)];
    if (pt.empirical >= 1e-3) res.calibration_error = std::max(res.calibration_error, std::abs(o.p / pt.empirical - 1.0));
  }

  res.dampening = std::numeric_limits<double>::infinity();
  res.dampening_exact = std::numeric_limits<double>::infinity();
  for (const auto& pt : res.points) {
    if (pt.q <= 0) continue;
    res.dampening = std::min(res.dampening, pt.empirical * Q / pt.q);
    res.dampening_exact = std::min(res.dampening_exact, pt.exact * Q / pt.q);
  }
  const double L = cfg.grid.depth();
  res.dampening_bound = 1.0 / (20.0 * L * cfg.grid.dim() * cfg.grid.log_delta());
  return res;
}

TreeCostCheck check_tree_cost_formula(std::size_t instances, std::uint64_t seed) {
  TreeCostCheck res;
  res.instances = instances;
  SplitMix64 rng(mix64(seed ^ 0x6634355ULL));
  for (std::size_t t = 0; t < instances; ++t) {
    const auto dim = static_cast<std::uint32_t>(1 + rng.below(3));
    const std::uint64_t delta = std::uint64_t{2} << rng.below(4); // 2..16
    const double p = rng.below(2) == 0 ? 1.0 : 2.0;
    const GridConfig cfg(delta, dim, p);
    const auto cells = static_cast<std::uint64_t>(std::pow(static_cast<double>(delta), dim));
    const std::size_t n = 1 + rng.below(std::min<std::uint64_t>(64, cells));
    const PointSet X = uniform_instance(cfg, n, rng());
    const ShiftVector shift = draw_shift(cfg, rng());
    const ShiftedQuadtree tree(cfg, shift);
    const auto pairwise = oracle::exact_q_tree(X, shift, cfg);
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double formula = tree.q_tree(X[i], X);
      const double scale = std::max(1.0, std::abs(pairwise[i]));
      res.max_relative_error = std::max(res.max_relative_error, std::abs(formula - pairwise[i]) / scale);
    }
  }
  return res;
}

MetricInvariantCheck check_metric_invariants(std::size_t instances, std::uint64_t seed) {
  MetricInvariantCheck res;
  res.instances = instances;
  res.min_pair_slack = std::numeric_limits<double>::infinity();
  res.min_cut_ratio = std::numeric_limits<double>::infinity();
  SplitMix64 rng(mix64(seed ^ 0x766b3031ULL));
  for (std::size_t t = 0; t < instances; ++t) {
    const double p = rng.below(2) == 0 ? 1.0 : 2.0;
    const GridConfig cfg = rng.below(2) == 0 ? GridConfig(64, 2, p) : GridConfig(16, 3, p);
    const std::size_t n = 2 + rng.below(13);
    const PointSet X = uniform_instance(cfg, n, rng());
    const auto q = oracle::exact_q(X, p);
    const double Q = oracle::exact_Q(X, p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double lhs = lp_distance(X[i], X[j], p) * Q;
        const double rhs = 4.0 * q[i] * q[j];
        if (lhs > rhs * (1 + 1e-12)) ++res.pair_violations;
        res.min_pair_slack = std::min(res.min_pair_slack, rhs / lhs);
      }
    }
    const double cut = max_cut_exact(X, p);
    if (cut < Q / 4.0 * (1 - 1e-12)) ++res.cut_violations;
    res.min_cut_ratio = std::min(res.min_cut_ratio, cut / (Q / 4.0));
  }
  return res;
}

} // namespace geocut
