#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/hashing.hpp"
#include "geocut/quadtree.hpp"

namespace geocut::oracle {

// Brute-force reference computations. Everything here recomputes cells,
// counts and tree distances from scratch by integer division and explicit
// per-level comparison; nothing is shared with the streaming code.

struct Thresholds {
  double tau = 0.6;
  double sigma_minus = 0.55;
  double sigma_plus = 0.65;

  void validate() const;
};

/// q(x) = Σ_y dist(x, y) for every x, in input order.
[[nodiscard]] std::vector<double> exact_q(const PointSet& X, double norm_p);
[[nodiscard]] double exact_Q(const PointSet& X, double norm_p);

/// Level-`level` cell of x: floor((x_j + v_j - 2) / side) with side = 2Δ / 2^(level-1).
[[nodiscard]] std::vector<std::int64_t> cell_of(const Point& x, std::uint32_t level, const ShiftVector& shift,
                                                const GridConfig& cfg);
[[nodiscard]] double tree_distance(const Point& x, const Point& y, const ShiftVector& shift, const GridConfig& cfg);
[[nodiscard]] std::vector<double> exact_q_tree(const PointSet& X, const ShiftVector& shift, const GridConfig& cfg);

struct ExactProfile {
  std::size_t n = 0;
  std::uint32_t leaf_level = 0;
  std::vector<double> q;
  double Q = 0.0;
  std::vector<double> q_tree;
  double Q_tree = 0.0;

  /// Indexed by level 1..L+1 (index 0 unused): largest cell at each level and its size.
  std::vector<std::vector<std::int64_t>> heavy;
  std::vector<std::size_t> heavy_count;

  std::uint32_t k = 1; // largest level in [1, L] whose heavy cell holds >= τ·n

  /// Indexed by level 1..k (index 0 unused).
  std::vector<double> q_tilde;
  std::vector<std::size_t> ext_size;
  std::vector<std::vector<std::size_t>> ext_members; // indices into X
  std::vector<double> r;

  /// Per point, in input order.
  std::vector<std::uint32_t> ell;
  std::vector<double> prob; // exact Pr[z* = x]
};

/// Requires |X| >= 1 and distinct points.
[[nodiscard]] ExactProfile exact_profile(const PointSet& X, const ShiftVector& shift, const GridConfig& cfg,
                                         const Thresholds& th = {});

/// Exact output law of the two-stage sampler run with exact counts.
[[nodiscard]] std::map<Point, double> exact_alg1_distribution(const PointSet& X, const ShiftVector& shift,
                                                              const GridConfig& cfg, const Thresholds& th = {});

/// One offline execution with exact counts: draws i with probability r_i, then a
/// uniform member of X_i^ext. Returns the index into X.
[[nodiscard]] std::size_t offline_alg1_draw(const ExactProfile& prof, SplitMix64& rng);

/// Levels i in [1, L] with |X(h_i)| >= σ⁻n and |X(h_{i+1})| <= σ⁺n.
[[nodiscard]] std::vector<std::uint32_t> critical_levels(const ExactProfile& prof, const Thresholds& th = {});

/// Max-Cut by plain enumeration of every subset, recomputing each cut from
/// scratch. O(2^n·n²); n <= 20.
[[nodiscard]] double brute_force_max_cut(const PointSet& X, double norm_p);

/// Max-Cut of A ∪ B for |A| = |B| when every cross distance is at least every
/// within-cluster distance. Then the split {A, B} is optimal: any other side S
/// with a points of A and b of B loses at least (|A|-a-b)² cross pairs net, so
/// the value is the sum of cross distances. nullopt when the premise fails.
[[nodiscard]] std::optional<double> separated_clusters_max_cut(const PointSet& A, const PointSet& B, double norm_p);

} // namespace geocut::oracle
