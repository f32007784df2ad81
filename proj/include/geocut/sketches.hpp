#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geocut/core.hpp"
#include "geocut/hashing.hpp"

namespace geocut {

/// Master seed plus a derivation path. Equal seeds instantiate identical hash
/// families, which is what makes two sketches addable.
struct SketchSeed {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> path;

  [[nodiscard]] SketchSeed child(std::uint64_t tag) const {
    SketchSeed s = *this;
    s.path.push_back(tag);
    return s;
  }
  /// Folded 64-bit key of (master, path).
  [[nodiscard]] std::uint64_t key() const noexcept;
  /// Generator for coefficients under this seed, salted by `stream`.
  [[nodiscard]] SplitMix64 generator(std::uint64_t stream) const noexcept;
  /// Fingerprint evaluation point. Depends on the master seed only, so every
  /// sketch under one master shares it and the power z^i is computed once per
  /// update.
  [[nodiscard]] std::uint64_t fingerprint_point() const noexcept;

  bool operator==(const SketchSeed&) const = default;
};

class SketchMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// z^i for the fingerprint point z; shared by all sketches under one master.
[[nodiscard]] std::uint64_t fingerprint_power(std::uint64_t z, std::uint64_t index) noexcept;

/// Number of geometric subsampling levels for a domain of size N: 0..ceil(log2 N).
[[nodiscard]] unsigned subsampling_levels(std::uint64_t domain_size) noexcept;

/// Largest supported sketch domain: indices must be field elements.
inline constexpr std::uint64_t kMaxSketchDomain = mersenne::kPrime;

// ---------------------------------------------------------------------------
// ℓ0 estimator
// ---------------------------------------------------------------------------

/// Turnstile ℓ0-norm estimator: geometric subsampling into `bins` buckets per
/// level, each bucket holding a random-evaluation fingerprint of its
/// frequency vector, so emptiness is exact with probability 1 - N/p. A
/// repetition inverts the linear-counting law at the shallowest level whose
/// occupancy is at most half the buckets; the answer is the median over
/// repetitions.
///
/// Counters are stored sparsely (only nonzero buckets); the nominal counter
/// count is copies·repetitions·levels·bins.
class L0Estimator {
public:
  struct Params {
    std::uint64_t domain_size = 0;
    double epsilon = 0.1;
    double delta = 0.05;
    std::int64_t max_frequency = 1;
    unsigned copies = 1;

    bool operator==(const Params&) const = default;
  };

  L0Estimator(Params params, SketchSeed seed);

  void update(DomainIndex i, std::int64_t delta);
  /// (1±ε)·|support| with probability >= 1-δ, using independent copy `copy`.
  [[nodiscard]] double estimate(unsigned copy = 0) const;

  /// Per-update hash evaluations; identical for every sketch sharing the seed.
  struct Key {
    std::uint64_t fingerprint = 0;
    std::vector<std::uint64_t> cells; // one cell key per (copy, repetition)
  };
  void make_key(DomainIndex i, Key& key) const;
  void apply(const Key& key, std::int64_t delta);

  L0Estimator& operator+=(const L0Estimator& other);
  L0Estimator& operator-=(const L0Estimator& other);
  [[nodiscard]] bool compatible(const L0Estimator& other) const noexcept;
  [[nodiscard]] bool empty_state() const {
    flush();
    return cells_.empty();
  }

  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] const SketchSeed& seed() const noexcept { return seed_; }
  [[nodiscard]] unsigned repetitions() const noexcept { return reps_; }
  [[nodiscard]] unsigned levels() const noexcept { return levels_; }
  [[nodiscard]] std::uint64_t bins() const noexcept { return bins_; }
  [[nodiscard]] std::uint64_t counter_count() const noexcept;
  [[nodiscard]] std::size_t stored_counters() const {
    flush();
    return cells_.size();
  }

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  [[nodiscard]] static L0Estimator deserialize(std::span<const std::uint8_t> blob);

  bool operator==(const L0Estimator& other) const {
    flush();
    other.flush();
    return params_ == other.params_ && seed_ == other.seed_ && cells_ == other.cells_;
  }

private:
  void build_hashes();
  void add_cell(std::uint64_t key, std::uint64_t value);
  /// Folds buffered additions into the sorted cell list.
  void flush() const;
  [[nodiscard]] double estimate_repetition(unsigned copy, unsigned rep) const;

  Params params_;
  SketchSeed seed_;
  unsigned reps_ = 1;
  unsigned levels_ = 1;
  std::uint64_t bins_ = 1;
  std::uint64_t z_ = 1;
  std::vector<PolyHash> level_hash_; // per (copy, rep)
  std::vector<PolyHash> bin_hash_;   // per (copy, rep)
  mutable std::vector<std::pair<std::uint64_t, std::uint64_t>> cells_;   // sorted (cell key, fingerprint)
  mutable std::vector<std::pair<std::uint64_t, std::uint64_t>> pending_; // unsorted additions
};

// ---------------------------------------------------------------------------
// ℓ0 sampler
// ---------------------------------------------------------------------------

/// Turnstile ℓ0-sampler: geometric subsampling levels, each with a 1-sparse
/// recovery cell (count, index sum, fingerprint). A repetition succeeds when
/// some level holds exactly one index; the deepest such level wins.
/// Repetitions are tried in order and the first success is returned.
class L0Sampler {
public:
  struct Params {
    std::uint64_t domain_size = 0;
    double delta = 0.05;
    std::int64_t max_frequency = 1;
    unsigned copies = 1;
    unsigned independence = 4; // of the level hash

    bool operator==(const Params&) const = default;
  };

  struct Cell {
    std::int64_t count = 0;
    std::uint64_t index_sum = 0;   // Σ f_i·i mod p
    std::uint64_t fingerprint = 0; // Σ f_i·z^i mod p

    bool operator==(const Cell&) const = default;
    [[nodiscard]] bool zero() const noexcept { return count == 0 && index_sum == 0 && fingerprint == 0; }
  };

  L0Sampler(Params params, SketchSeed seed);

  void update(DomainIndex i, std::int64_t delta);
  /// Uniform element of the support, or nullopt for an empty support or an
  /// internal failure (probability <= δ).
  [[nodiscard]] std::optional<DomainIndex> sample(unsigned copy = 0) const;

  struct Key {
    std::uint64_t index = 0;
    std::uint64_t fingerprint = 0;
    std::vector<std::uint8_t> levels; // one level per (copy, repetition)
  };
  void make_key(DomainIndex i, Key& key) const;
  void apply(const Key& key, std::int64_t delta);
  /// Update with z^i supplied by the caller (see fingerprint_power).
  void update_with_power(std::uint64_t index, std::uint64_t z_pow, std::int64_t delta);

  L0Sampler& operator+=(const L0Sampler& other);
  L0Sampler& operator-=(const L0Sampler& other);
  [[nodiscard]] bool compatible(const L0Sampler& other) const noexcept;
  [[nodiscard]] bool empty_state() const noexcept;

  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] const SketchSeed& seed() const noexcept { return seed_; }
  [[nodiscard]] unsigned repetitions() const noexcept { return reps_; }
  [[nodiscard]] unsigned levels() const noexcept { return levels_; }
  [[nodiscard]] std::uint64_t fingerprint_point() const noexcept { return z_; }
  [[nodiscard]] std::uint64_t counter_count() const noexcept { return 3 * cells_.size(); }

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  [[nodiscard]] static L0Sampler deserialize(std::span<const std::uint8_t> blob);

  bool operator==(const L0Sampler& other) const noexcept {
    return params_ == other.params_ && seed_ == other.seed_ && cells_ == other.cells_;
  }

private:
  void build_hashes();
  [[nodiscard]] std::optional<DomainIndex> recover(const Cell& c) const;

  Params params_;
  SketchSeed seed_;
  unsigned reps_ = 1;
  unsigned levels_ = 1;
  std::uint64_t z_ = 1;
  std::vector<PolyHash> level_hash_; // per (copy, rep)
  std::vector<Cell> cells_;          // [(copy·reps + rep)·levels + level]
};

/// Repetitions needed for failure probability δ when a single repetition
/// fails with probability at most 1/3.
[[nodiscard]] unsigned sampler_repetitions(double delta);

/// Odd repetition count whose median fails with probability <= δ when each
/// repetition fails independently with probability at most 0.1.
[[nodiscard]] unsigned estimator_repetitions(double delta);

template <class Sketch>
[[nodiscard]] Sketch sketch_merge(Sketch a, const Sketch& b) {
  a += b;
  return a;
}

} // namespace geocut
