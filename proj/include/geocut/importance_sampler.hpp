#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/light_sampler.hpp"
#include "geocut/quadtree.hpp"
#include "geocut/sketches.hpp"

namespace geocut {

struct CriticalThresholds {
  double tau = 0.6;
  double sigma_minus = 0.55;
  double sigma_plus = 0.65;
};

struct SamplerConfig {
  GridConfig grid{2, 1};
  double epsilon = 0.2;
  /// Uniform samples used to locate heavy cells; 0 selects 200·ceil(d·log2(2Δ)).
  std::size_t pool_size = 0;
  /// Uniform samples reserved for sampling inside the critical heavy cell.
  std::size_t fresh_pool = 64;
  double light_delta = 0.01;
  double sigma = 0.05;
  CriticalThresholds thresholds{};
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] std::size_t effective_pool_size() const;
  /// Precision of every size estimate (support size, light-part sizes).
  [[nodiscard]] double count_epsilon() const noexcept { return epsilon * sigma; }
};

/// Everything the final draw depends on, computed from one copy's sketches.
/// Level-indexed vectors use index = level (entry 0 unused).
struct LevelProfile {
  double n_hat = 0.0;
  std::uint32_t leaf_level = 0;
  std::size_t samples = 0; // successful pool samples
  std::vector<CellKey> heavy;
  std::vector<double> fraction;
  std::uint32_t k = 1;
  bool degenerate = false; // no pool samples, so no level could be judged

  std::vector<double> heavy_size; // 1..k
  std::vector<double> q_tilde;    // 1..k
  std::vector<double> ext_size;   // 1..k
  std::vector<double> r;          // 1..k
  std::vector<LightSampler::Result> light; // 1..k-1: level-(i+1) light sampler answers
};

struct SampleOutcome {
  std::optional<Point> z; // nullopt is ⊥
  double p = 0.0;
  std::uint32_t level = 0; // i*
  std::uint32_t k = 0;
  std::uint32_t ell = 0;
  std::string status = "ok";
};

/// One copy of the streaming importance sampler.
class ImportanceSampler {
public:
  ImportanceSampler(const SamplerConfig& cfg, ShiftVector shift, std::uint64_t run_seed);

  void update(const StreamUpdate& u);
  void update(const Point& x, std::int64_t delta);

  [[nodiscard]] LevelProfile profile() const;
  /// Deterministic given the state: the run coins fix every draw.
  [[nodiscard]] SampleOutcome finalize() const;

  [[nodiscard]] const ShiftVector& shift() const noexcept { return tree_.shift(); }
  [[nodiscard]] const SamplerConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::uint64_t counter_count() const noexcept;
  /// Query-level equality: same coins and identical sketch contents.
  [[nodiscard]] bool same_state(const ImportanceSampler& other) const;

private:
  SamplerConfig cfg_;
  ShiftedQuadtree tree_;
  std::uint64_t run_seed_;
  L0Estimator count_;
  L0Sampler pool_;
  L0Sampler fresh_;
  std::vector<LightSampler> light_; // level i at index i-2, for i = 2..L
};

/// `copies` samplers sharing one shift (init coins) with independent run coins.
[[nodiscard]] std::vector<ImportanceSampler> sampler_init(const SamplerConfig& cfg, unsigned copies);
[[nodiscard]] std::vector<ImportanceSampler> sampler_init(const SamplerConfig& cfg, unsigned copies,
                                                          const ShiftVector& shift, std::uint64_t first_copy = 0);
[[nodiscard]] ShiftVector init_shift(const SamplerConfig& cfg);
[[nodiscard]] std::uint64_t run_seed(const SamplerConfig& cfg, std::uint64_t copy);

/// Largest level in [1, L] whose majority fraction reaches τ; 1 when none does.
[[nodiscard]] std::uint32_t find_critical_level(const LevelProfile& profile, const CriticalThresholds& th);
/// n̂·β_i + Σ_{j<=i} β_j·(n̂ − |X(h_j)|̂).
[[nodiscard]] double compute_q_tilde(const LevelProfile& profile, std::uint32_t i, const EdgeWeights& weights);

} // namespace geocut
