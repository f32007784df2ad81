#pragma once

#include <cstdint>
#include <vector>

namespace geocut {

using RealRows = std::vector<std::vector<double>>;

/// Linear map R^d -> R^d' given by a d'×d matrix of independent N(0, 1)
/// entries scaled by 1/√d'.
class JLMap {
public:
  JLMap(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);
  /// Uses `matrix` (out_dim rows of in_dim entries) as is.
  explicit JLMap(RealRows matrix);

  [[nodiscard]] std::size_t in_dim() const noexcept { return in_dim_; }
  [[nodiscard]] std::size_t out_dim() const noexcept { return matrix_.size(); }
  [[nodiscard]] const RealRows& matrix() const noexcept { return matrix_; }

  [[nodiscard]] std::vector<double> apply(const std::vector<double>& x) const;
  [[nodiscard]] RealRows apply(const RealRows& X) const;

private:
  std::size_t in_dim_ = 0;
  RealRows matrix_;
};

/// ceil(c·ε⁻²·ln(1/(ε·δ))).
[[nodiscard]] std::size_t jl_dimension(double epsilon, double delta, double constant = 8.0);

[[nodiscard]] RealRows jl_project(const RealRows& X, std::size_t out_dim, std::uint64_t seed);

struct PreservationReport {
  std::size_t trials = 0;
  std::size_t out_dim = 0;
  double max_cut_original = 0.0;
  std::vector<double> ratios;       // Max-Cut(π(X)) / Max-Cut(X) per trial
  std::vector<double> distortion;   // Σ|dist_π − dist| / Σ dist per trial
  double preserved_fraction = 0.0;  // ratio within 1 ± ε
  double distortion_fraction = 0.0; // distortion <= 3ε
};

/// Exact Max-Cut (ℓ2) on both sides over `trials` independent maps.
/// Requires |X| <= 16.
[[nodiscard]] PreservationReport verify_maxcut_preservation(const RealRows& X, std::size_t out_dim, std::size_t trials,
                                                            double epsilon, std::uint64_t seed);

} // namespace geocut
