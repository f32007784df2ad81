#include "geocut/jl.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "geocut/core.hpp"
#include "geocut/hashing.hpp"
#include "geocut/maxcut.hpp"

namespace geocut {

JLMap::JLMap(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) : in_dim_(in_dim) {
  if (in_dim == 0 || out_dim == 0) throw std::invalid_argument("JL dimensions must be positive");
  std::mt19937_64 rng(mix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(out_dim)));
  matrix_.assign(out_dim, std::vector<double>(in_dim));
  for (auto& row : matrix_) {
    for (auto& v : row) v = gauss(rng);
  }
}

JLMap::JLMap(RealRows matrix) : matrix_(std::move(matrix)) {
  if (matrix_.empty() || matrix_.front().empty()) throw std::invalid_argument("JL matrix must be nonempty");
  in_dim_ = matrix_.front().size();
  for (const auto& row : matrix_) {
    if (row.size() != in_dim_) throw std::invalid_argument("JL matrix rows differ in length");
  }
}

std::vector<double> JLMap::apply(const std::vector<double>& x) const {
  if (x.size() != in_dim_) throw std::invalid_argument("point dimension does not match the JL map");
  std::vector<double> y(matrix_.size(), 0.0);
  for (std::size_t r = 0; r < matrix_.size(); ++r) {
    for (std::size_t c = 0; c < in_dim_; ++c) y[r] += matrix_[r][c] * x[c];
  }
  return y;
}

RealRows JLMap::apply(const RealRows& X) const {
  RealRows out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(apply(x));
  return out;
}

std::size_t jl_dimension(double epsilon, double delta, double constant) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 1)) {
    throw std::invalid_argument("JL epsilon and delta must be in (0, 1)");
  }
  return static_cast<std::size_t>(std::ceil(constant / (epsilon * epsilon) * std::log(1.0 / (epsilon * delta))));
}

RealRows jl_project(const RealRows& X, std::size_t out_dim, std::uint64_t seed) {
  if (X.empty()) return {};
  return JLMap(X.front().size(), out_dim, seed).apply(X);
}

PreservationReport verify_maxcut_preservation(const RealRows& X, std::size_t out_dim, std::size_t trials,
                                              double epsilon, std::uint64_t seed) {
  if (X.size() > 16) throw std::length_error("preservation check needs at most 16 points");
  PreservationReport rep;
  rep.trials = trials;
  rep.out_dim = out_dim;
  const DistanceMatrix D = distance_matrix(X, 2.0);
  rep.max_cut_original = max_cut_exact(D).value;
  double total = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = i + 1; j < X.size(); ++j) total += D(i, j);
  }
  std::size_t preserved = 0;
  std::size_t low_distortion = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const DistanceMatrix P = distance_matrix(jl_project(X, out_dim, mix64(seed) + t), 2.0);
    const double projected = max_cut_exact(P).value;
    double err = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      for (std::size_t j = i + 1; j < X.size(); ++j) err += std::abs(P(i, j) - D(i, j));
    }
    const double ratio = rep.max_cut_original > 0 ? projected / rep.max_cut_original : (projected == 0 ? 1.0 : std::numeric_limits<double>::infinity());
    const double dist = total > 0 ? err / total : 0.0;
    rep.ratios.push_back(ratio);
    rep.distortion.push_back(dist);
    if (std::abs(ratio - 1.0) <= epsilon) ++preserved;
    if (dist <= 3 * epsilon) ++low_distortion;
  }
  if (trials > 0) {
    rep.preserved_fraction = static_cast<double>(preserved) / static_cast<double>(trials);
    rep.distortion_fraction = static_cast<double>(low_distortion) / static_cast<double>(trials);
  }
  return rep;
}

} // namespace geocut
