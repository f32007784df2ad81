#pragma once

#include <cstdint>
#include <vector>

#include "geocut/core.hpp"

namespace geocut {

struct ClusteredInstance {
  PointSet points;
  std::vector<std::size_t> label; // cluster of each point
};

/// n distinct points split as evenly as possible over `clusters` boxes.
/// Centers are pairwise at least Δ/2 apart (ℓ∞) when that is possible; box
/// half-width is max(2, Δ/32), doubled until each box has room for twice
/// its share.
[[nodiscard]] ClusteredInstance clustered_instance(const GridConfig& cfg, std::size_t n, std::size_t clusters,
                                                   std::uint64_t seed);

/// n distinct uniform points of [Δ]^d.
[[nodiscard]] PointSet uniform_instance(const GridConfig& cfg, std::size_t n, std::uint64_t seed);

/// n rows of d independent standard normals.
[[nodiscard]] std::vector<std::vector<double>> gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed);

/// Insert-only stream of X in the given order.
[[nodiscard]] std::vector<StreamUpdate> insert_stream(const PointSet& X);

} // namespace geocut
