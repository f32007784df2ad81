#include "geocut/quadtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geocut {

ShiftVector draw_shift(const GridConfig& cfg, std::uint64_t seed) {
  SplitMix64 rng(mix64(seed ^ 0x51f7ULL));
  ShiftVector v;
  v.offsets.resize(cfg.dim());
  for (auto& o : v.offsets) o = static_cast<std::int64_t>(rng.below(cfg.delta())) + 1;
  return v;
}

EdgeWeights::EdgeWeights(const GridConfig& cfg) {
  const double diam_unit = std::pow(static_cast<double>(cfg.dim()), 1.0 / cfg.norm_p());
  const std::uint32_t leaf = cfg.depth() + 1;
  beta_.resize(leaf + 1);
  for (std::uint32_t i = 0; i <= leaf; ++i) {
    beta_[i] = diam_unit * std::ldexp(1.0, static_cast<int>(leaf - i));
  }
}

double EdgeWeights::beta(std::uint32_t level) const {
  if (level >= beta_.size()) throw std::out_of_range("beta index out of range");
  return beta_[level];
}

ShiftedQuadtree::ShiftedQuadtree(GridConfig cfg, ShiftVector shift)
    : cfg_(cfg), shift_(std::move(shift)), weights_(cfg_) {
  if (shift_.offsets.size() != cfg_.dim()) throw std::invalid_argument("shift dimension mismatch");
  for (auto o : shift_.offsets) {
    if (o < 1 || static_cast<std::uint64_t>(o) > cfg_.delta()) throw std::out_of_range("shift outside [1, delta]");
  }
}

std::vector<std::uint64_t> ShiftedQuadtree::shifted(const Point& x) const {
  validate_point(x, cfg_);
  std::vector<std::uint64_t> y(cfg_.dim());
  for (std::size_t j = 0; j < y.size(); ++j) {
    // 0-based coordinate in [0, 2Δ-2]
    y[j] = static_cast<std::uint64_t>(x.coords[j] - 1 + shift_.offsets[j] - 1);
  }
  return y;
}

CellId ShiftedQuadtree::ancestor_cell(const Point& x, std::uint32_t level) const {
  if (level < 1 || level > leaf_level()) throw std::out_of_range("level outside [1, L+1]");
  const std::uint32_t side_bits = leaf_level() - level;
  CellId c{level, shifted(x)};
  for (auto& v : c.coords) v >>= side_bits;
  return c;
}

CellKey ShiftedQuadtree::ancestor_key(const Point& x, std::uint32_t level) const {
  if (level < 1 || level > leaf_level()) throw std::out_of_range("level outside [1, L+1]");
  const std::uint32_t side_bits = leaf_level() - level;
  const std::uint32_t coord_bits = level - 1; // cells per axis = 2^(level-1)
  if (static_cast<std::uint64_t>(coord_bits) * cfg_.dim() > 128) {
    throw std::out_of_range("cell key exceeds 128 bits");
  }
  CellKey key = 0;
  for (auto v : shifted(x)) key = (coord_bits == 0 ? 0 : (key << coord_bits)) | (v >> side_bits);
  return key;
}

std::vector<CellKey> ShiftedQuadtree::ancestor_keys(const Point& x) const {
  if (static_cast<std::uint64_t>(leaf_level() - 1) * cfg_.dim() > 128) throw std::out_of_range("cell key exceeds 128 bits");
  const auto y = shifted(x);
  std::vector<CellKey> keys(leaf_level() + 1, 0);
  for (std::uint32_t level = 1; level <= leaf_level(); ++level) {
    const std::uint32_t side_bits = leaf_level() - level;
    const std::uint32_t coord_bits = level - 1;
    CellKey key = 0;
    for (auto v : y) key = (coord_bits == 0 ? 0 : (key << coord_bits)) | (v >> side_bits);
    keys[level] = key;
  }
  return keys;
}

std::uint32_t ShiftedQuadtree::lca_level(const Point& x, const Point& y) const {
  const auto a = shifted(x);
  const auto b = shifted(y);
  std::uint32_t width = 0;
  for (std::size_t j = 0; j < a.size(); ++j) width = std::max(width, static_cast<std::uint32_t>(std::bit_width(a[j] ^ b[j])));
  // cells of side 2^s agree iff s >= width; level = L+1-s
  return leaf_level() - width;
}

double ShiftedQuadtree::tree_distance(const Point& x, const Point& y) const {
  const std::uint32_t lca = lca_level(x, y);
  double sum = 0.0;
  for (std::uint32_t i = lca + 1; i <= leaf_level(); ++i) sum += weights_.beta(i);
  return 2.0 * sum;
}

double ShiftedQuadtree::q_tree(const Point& x, const PointSet& X) const {
  const double n = static_cast<double>(X.size());
  // |X(anc_i(x))| = #{y : lca(x, y) >= i}
  std::vector<std::size_t> at_least(leaf_level() + 2, 0);
  for (const auto& y : X) ++at_least[lca_level(x, y)];
  for (std::uint32_t i = leaf_level(); i-- > 0;) at_least[i] += at_least[i + 1];
  double sum = 0.0; // i = 0 contributes β_0·(n − n) = 0
  for (std::uint32_t i = 1; i <= leaf_level(); ++i) {
    sum += weights_.beta(i) * (n - static_cast<double>(at_least[i]));
  }
  return 2.0 * sum;
}

CellId ancestor_cell(const Point& x, std::uint32_t level, const ShiftVector& shift, const GridConfig& cfg) {
  return ShiftedQuadtree(cfg, shift).ancestor_cell(x, level);
}

double tree_distance(const Point& x, const Point& y, const ShiftVector& shift, const GridConfig& cfg) {
  return ShiftedQuadtree(cfg, shift).tree_distance(x, y);
}

double q_tree(const Point& x, const PointSet& X, const ShiftVector& shift, const GridConfig& cfg) {
  return ShiftedQuadtree(cfg, shift).q_tree(x, X);
}

DistortionSummary distortion_stats(const PointSet& X, const GridConfig& cfg, std::size_t trials, double c_factor,
                                   std::uint64_t seed) {
  if (X.size() < 2) throw std::invalid_argument("distortion_stats needs at least two points");
  const std::size_t n = X.size();
  std::vector<double> dist(n * n, 0.0);
  std::vector<double> q(n, 0.0);
  double Q = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      dist[a * n + b] = lp_distance(X[a], X[b], cfg.norm_p());
      q[a] += dist[a * n + b];
    }
    Q += q[a];
  }
  const double bound = c_factor * cfg.dim() * std::max(1U, cfg.log_delta());

  DistortionSummary out;
  out.trials = trials;
  out.min_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> pair_sum(n * n, 0.0);
  std::size_t q_ok = 0;
  std::size_t share_ok = 0;
  SplitMix64 rng(mix64(seed));
  for (std::size_t t = 0; t < trials; ++t) {
    ShiftedQuadtree tree(cfg, draw_shift(cfg, rng()));
    std::vector<double> qt(n, 0.0);
    double QT = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double dt = tree.tree_distance(X[a], X[b]);
        qt[a] += dt;
        qt[b] += dt;
        if (dist[a * n + b] > 0) {
          const double r = dt / dist[a * n + b];
          pair_sum[a * n + b] += r;
          out.min_ratio = std::min(out.min_ratio, r);
        }
      }
    }
    for (auto v : qt) QT += v;
    if (QT <= bound * Q) ++q_ok;
    bool all = true;
    for (std::size_t a = 0; a < n; ++a) {
      if (qt[a] / QT < q[a] / (bound * Q)) all = false;
    }
    if (all) ++share_ok;
  }
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (dist[a * n + b] <= 0) continue;
      const double m = pair_sum[a * n + b] / static_cast<double>(trials);
      total += m;
      out.max_pair_mean = std::max(out.max_pair_mean, m);
      ++out.pairs;
    }
  }
  out.mean_ratio = out.pairs == 0 ? 0.0 : total / static_cast<double>(out.pairs);
  out.q_tree_success = static_cast<double>(q_ok) / static_cast<double>(trials);
  out.share_success = static_cast<double>(share_ok) / static_cast<double>(trials);
  return out;
}

} // namespace geocut
