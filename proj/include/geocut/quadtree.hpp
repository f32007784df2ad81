#pragma once

#include <cstdint>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/hashing.hpp"

namespace geocut {

/// Random shift v in [1, Δ]^d. Points are translated by v before cells are
/// computed, so the partition grid itself stays fixed over [2Δ]^d.
struct ShiftVector {
  std::vector<std::int64_t> offsets;

  bool operator==(const ShiftVector&) const = default;
};

[[nodiscard]] ShiftVector draw_shift(const GridConfig& cfg, std::uint64_t seed);

/// Axis-aligned cell of side 2^(L+1-level) in the partition of [2Δ]^d.
struct CellId {
  std::uint32_t level = 1;
  std::vector<std::uint64_t> coords;

  auto operator<=>(const CellId&) const = default;
};

/// Packed 128-bit key of a cell (level implied by context); injective per level.
using CellKey = unsigned __int128;

/// β_i = d^(1/p)·2^(L+1-i) for i in [0, L+1]: the diameter of a level-i cell,
/// which is also the weight of the edge from a level-i node to its parent.
class EdgeWeights {
public:
  explicit EdgeWeights(const GridConfig& cfg);

  [[nodiscard]] double beta(std::uint32_t level) const;
  [[nodiscard]] std::uint32_t max_level() const noexcept { return static_cast<std::uint32_t>(beta_.size()) - 1; }

private:
  std::vector<double> beta_;
};

class ShiftedQuadtree {
public:
  ShiftedQuadtree(GridConfig cfg, ShiftVector shift);

  [[nodiscard]] const GridConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const ShiftVector& shift() const noexcept { return shift_; }
  [[nodiscard]] const EdgeWeights& weights() const noexcept { return weights_; }
  /// Leaf level L+1.
  [[nodiscard]] std::uint32_t leaf_level() const noexcept { return cfg_.depth() + 1; }

  /// Level-`level` ancestor of x, 1 <= level <= L+1. O(d).
  [[nodiscard]] CellId ancestor_cell(const Point& x, std::uint32_t level) const;
  [[nodiscard]] CellKey ancestor_key(const Point& x, std::uint32_t level) const;
  /// Keys of every ancestor; entry i is the level-i key (entry 0 unused).
  [[nodiscard]] std::vector<CellKey> ancestor_keys(const Point& x) const;
  /// Deepest level whose cells contain both x and y.
  [[nodiscard]] std::uint32_t lca_level(const Point& x, const Point& y) const;
  [[nodiscard]] double tree_distance(const Point& x, const Point& y) const;
  /// q_T(x) = 2·Σ_{i=0}^{L+1} β_i·(n − |X(anc_i(x))|) from ancestor counts;
  /// anc_0 is a virtual super-root containing all of X.
  [[nodiscard]] double q_tree(const Point& x, const PointSet& X) const;

private:
  [[nodiscard]] std::vector<std::uint64_t> shifted(const Point& x) const;

  GridConfig cfg_;
  ShiftVector shift_;
  EdgeWeights weights_;
};

[[nodiscard]] CellId ancestor_cell(const Point& x, std::uint32_t level, const ShiftVector& shift,
                                   const GridConfig& cfg);
[[nodiscard]] double tree_distance(const Point& x, const Point& y, const ShiftVector& shift, const GridConfig& cfg);
[[nodiscard]] double q_tree(const Point& x, const PointSet& X, const ShiftVector& shift, const GridConfig& cfg);

struct DistortionSummary {
  std::size_t trials = 0;
  std::size_t pairs = 0;
  double mean_ratio = 0.0;     // mean over pairs and shifts of dist_T / dist
  double max_pair_mean = 0.0;  // worst pair's mean ratio over shifts
  double min_ratio = 0.0;      // smallest dist_T / dist seen; >= 1 by non-contraction
  double q_tree_success = 0.0; // fraction of shifts with Q_T <= C·d·log2Δ·Q
  double share_success = 0.0;  // fraction with q_T(x)/Q_T >= q(x)/(C·d·log2Δ·Q) for all x
};

/// Monte Carlo over `trials` independent shifts.
[[nodiscard]] DistortionSummary distortion_stats(const PointSet& X, const GridConfig& cfg, std::size_t trials,
                                                 double c_factor, std::uint64_t seed);

} // namespace geocut
