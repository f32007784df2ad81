#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/sketches.hpp"

namespace geocut {

/// Identifier of a partition class.
using PartId = unsigned __int128;

/// Total, deterministic map from domain indices to partition classes.
using PartitionMap = std::function<PartId(DomainIndex)>;

/// Samples uniformly from the support minus its heaviest partition class and
/// estimates the size of that remainder, in one pass over a turnstile stream.
///
/// Each of s = ceil(log2(N/δ)) hash functions splits the classes into two
/// buckets; every bucket carries an ℓ0-sampler and a two-copy ℓ0-estimator,
/// all under one seed so they can be summed. At query time the bucket holding
/// the heavy class is identified per hash (estimator copy 0), the remaining
/// buckets are summed over all hashes, and the sum is queried (sampler, and
/// estimator copy 1).
class LightSampler {
public:
  struct Params {
    std::uint64_t domain_size = 0;
    double epsilon = 0.2;
    double delta = 0.05;
    double sigma = 0.05;

    bool operator==(const Params&) const = default;
  };

  struct Result {
    std::optional<DomainIndex> index; // nullopt: empty light part or sketch failure
    double size = 0.0;                // estimate of |X_light|
    bool verified = true;             // false when the heavy-class precondition visibly fails
  };

  LightSampler(Params params, SketchSeed seed, PartitionMap map = {});

  /// Routes the update to bucket h_t(P(i)) for every t.
  void update(DomainIndex i, std::int64_t delta);
  void update(DomainIndex i, PartId part, std::int64_t delta);

  /// Hash evaluations shared by every bucket; lets a caller that already knows
  /// z^i and the per-level hashes skip recomputation.
  struct Key {
    L0Sampler::Key sampler;
    L0Estimator::Key estimator;
  };
  void make_key(DomainIndex i, Key& key) const;
  void apply(const Key& key, PartId part, std::int64_t delta);

  [[nodiscard]] Result query() const;

  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] unsigned hash_count() const noexcept { return s_; }
  /// Bucket of `part` under hash t.
  [[nodiscard]] unsigned bucket(unsigned t, PartId part) const;
  /// Per-hash index of the bucket judged heavy at query time.
  [[nodiscard]] std::vector<unsigned> heavy_buckets() const;
  [[nodiscard]] std::uint64_t counter_count() const noexcept;
  /// Same parameters, coins and sketch contents.
  [[nodiscard]] bool same_state(const LightSampler& other) const {
    return params_ == other.params_ && seed_ == other.seed_ && samplers_ == other.samplers_ &&
           estimators_ == other.estimators_;
  }

  /// Debug hook for small domains: keep exact frequencies alongside the sketches.
  void enable_debug();
  /// Support of the summed non-heavy buckets (D_all); requires enable_debug().
  [[nodiscard]] std::set<DomainIndex> recovered_support() const;

private:
  struct BucketHash {
    std::uint64_t a[4] = {0, 0, 0, 0};
    [[nodiscard]] unsigned operator()(PartId part) const noexcept;
  };

  [[nodiscard]] std::size_t slot(unsigned t, unsigned j) const noexcept { return 2 * static_cast<std::size_t>(t) + j; }

  Params params_;
  SketchSeed seed_;
  PartitionMap map_;
  unsigned s_ = 1;
  std::vector<BucketHash> hashes_;
  std::vector<L0Sampler> samplers_;     // [slot(t, j)]
  std::vector<L0Estimator> estimators_; // [slot(t, j)]
  bool debug_ = false;
  std::map<DomainIndex::value_type, std::pair<std::int64_t, PartId>> shadow_;
};

} // namespace geocut
