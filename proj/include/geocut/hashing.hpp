#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace geocut {

/// Arithmetic in GF(2^61 - 1).
namespace mersenne {

inline constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

[[nodiscard]] constexpr std::uint64_t reduce(unsigned __int128 x) noexcept {
  std::uint64_t lo = static_cast<std::uint64_t>(x & kPrime);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  // Two folds bring any 128-bit input below 2^61 + 2^7.
  r = (r & kPrime) + (r >> 61);
  return r >= kPrime ? r - kPrime : r;
}

[[nodiscard]] constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t r = a + b;
  return r >= kPrime ? r - kPrime : r;
}

[[nodiscard]] constexpr std::uint64_t sub(std::uint64_t a, std::uint64_t b) noexcept {
  return a >= b ? a - b : a + kPrime - b;
}

[[nodiscard]] constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
  return reduce(static_cast<unsigned __int128>(a) * b);
}

[[nodiscard]] constexpr std::uint64_t pow(std::uint64_t base, std::uint64_t e) noexcept {
  std::uint64_t r = 1;
  while (e != 0) {
    if (e & 1U) r = mul(r, base);
    base = mul(base, base);
    e >>= 1U;
  }
  return r;
}

[[nodiscard]] constexpr std::uint64_t inverse(std::uint64_t a) noexcept { return pow(a, kPrime - 2); }

/// Field image of a signed integer.
[[nodiscard]] constexpr std::uint64_t from_signed(std::int64_t v) noexcept {
  if (v >= 0) return static_cast<std::uint64_t>(v) % kPrime;
  return sub(0, static_cast<std::uint64_t>(-(v + 1)) % kPrime + 1);
}

/// Field element times a small signed integer.
[[nodiscard]] constexpr std::uint64_t scale(std::uint64_t a, std::int64_t k) noexcept {
  if (k == 1) return a;
  if (k == -1) return sub(0, a);
  return mul(a, from_signed(k));
}

} // namespace mersenne

/// SplitMix64 finalizer; used to derive independent seeds from a seed path.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator over mix64, cheap enough to seed per sketch.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform field element in [0, p).
  constexpr std::uint64_t field() noexcept {
    for (;;) {
      std::uint64_t v = (*this)() >> 3;
      if (v < mersenne::kPrime) return v;
    }
  }

  /// Uniform double in [0, 1).
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    for (;;) {
      unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

private:
  std::uint64_t state_;
};

/// k-wise independent family: a random polynomial of degree k-1 over GF(2^61-1).
class PolyHash {
public:
  static constexpr unsigned kMaxIndependence = 8;

  PolyHash() = default;
  PolyHash(unsigned k, SplitMix64& rng) : k_(k) {
    if (k == 0 || k > kMaxIndependence) throw std::invalid_argument("hash independence must be in [1, 8]");
    for (unsigned j = 0; j < k; ++j) coeffs_[j] = rng.field();
  }

  /// Hash of x (reduced into the field first).
  [[nodiscard]] std::uint64_t operator()(std::uint64_t x) const noexcept {
    const std::uint64_t xr = x % mersenne::kPrime;
    std::uint64_t acc = 0;
    for (unsigned j = k_; j-- > 0;) {
      acc = mersenne::add(mersenne::mul(acc, xr), coeffs_[j]);
    }
    return acc;
  }

  [[nodiscard]] unsigned independence() const noexcept { return k_; }

  bool operator==(const PolyHash&) const = default;

private:
  std::array<std::uint64_t, kMaxIndependence> coeffs_{};
  unsigned k_ = 0;
};

/// Geometric level of a uniform field element: Pr[level >= l] ~= 2^-l, capped.
[[nodiscard]] inline unsigned geometric_level(std::uint64_t h, unsigned max_level) noexcept {
  // h < 2^61; count leading zeros within the 61-bit window.
  const unsigned lz = h == 0 ? 61U : static_cast<unsigned>(__builtin_clzll(h)) - 3U;
  return lz < max_level ? lz : max_level;
}

} // namespace geocut
