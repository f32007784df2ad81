#include "geocut/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "geocut/hashing.hpp"

namespace geocut {

namespace {

std::int64_t uniform_coord(SplitMix64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double grid_size(const GridConfig& cfg) {
  return std::pow(static_cast<double>(cfg.delta()), static_cast<double>(cfg.dim()));
}

} // namespace

ClusteredInstance clustered_instance(const GridConfig& cfg, std::size_t n, std::size_t clusters, std::uint64_t seed) {
  if (clusters == 0) throw std::invalid_argument("need at least one cluster");
  if (static_cast<double>(n) > grid_size(cfg)) throw std::invalid_argument("more points than grid cells");
  const auto D = static_cast<std::int64_t>(cfg.delta());
  SplitMix64 rng(mix64(seed ^ 0x636c7573ULL));

  std::vector<std::vector<std::int64_t>> centers;
  for (std::size_t c = 0; c < clusters; ++c) {
    std::vector<std::int64_t> best;
    std::int64_t best_gap = -1;
    for (int attempt = 0; attempt < 200; ++attempt) {
      std::vector<std::int64_t> cand(cfg.dim());
      for (auto& v : cand) v = uniform_coord(rng, 1, D);
      std::int64_t gap = D;
      for (const auto& other : centers) {
        std::int64_t linf = 0;
        for (std::size_t j = 0; j < cand.size(); ++j) linf = std::max(linf, std::abs(cand[j] - other[j]));
        gap = std::min(gap, linf);
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = cand;
      }
      if (2 * gap >= D) break;
    }
    centers.push_back(best);
  }

  ClusteredInstance out;
  std::set<Point> used;
  for (std::size_t c = 0; c < clusters; ++c) {
    const std::size_t share = n / clusters + (c < n % clusters ? 1 : 0);
    std::int64_t r = std::max<std::int64_t>(2, D / 32);
    while (std::pow(static_cast<double>(std::min(2 * r + 1, D)), static_cast<double>(cfg.dim())) <
               2.0 * static_cast<double>(share) &&
           2 * r + 1 < D) {
      r *= 2;
    }
    std::size_t placed = 0;
    std::size_t misses = 0;
    while (placed < share) {
      Point p;
      p.coords.resize(cfg.dim());
      for (std::size_t j = 0; j < cfg.dim(); ++j) {
        const auto lo = std::max<std::int64_t>(1, centers[c][j] - r);
        const auto hi = std::min<std::int64_t>(D, centers[c][j] + r);
        p.coords[j] = uniform_coord(rng, lo, hi);
      }
      if (used.insert(p).second) {
        out.points.push_back(p);
        out.label.push_back(c);
        ++placed;
      } else if (++misses > 64 * (share + 16)) {
        r = std::min(D, 2 * r); // box saturated by neighbours
        misses = 0;
      }
    }
  }
  return out;
}

PointSet uniform_instance(const GridConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (static_cast<double>(n) > grid_size(cfg)) throw std::invalid_argument("more points than grid cells");
  SplitMix64 rng(mix64(seed ^ 0x756e6966ULL));
  const auto D = static_cast<std::int64_t>(cfg.delta());
  std::set<Point> used;
  PointSet X;
  while (X.size() < n) {
    Point p;
    p.coords.resize(cfg.dim());
    for (auto& v : p.coords) v = uniform_coord(rng, 1, D);
    if (used.insert(p).second) X.push_back(std::move(p));
  }
  return X;
}

std::vector<std::vector<double>> gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(mix64(seed ^ 0x6761757373ULL));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows) {
    for (auto& v : row) v = g(rng);
  }
  return rows;
}

std::vector<StreamUpdate> insert_stream(const PointSet& X) {
  std::vector<StreamUpdate> s;
  s.reserve(X.size());
  for (const auto& x : X) s.push_back({x, +1});
  return s;
}

} // namespace geocut
