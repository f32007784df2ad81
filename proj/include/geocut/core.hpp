#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geocut {

/// The grid [Δ]^d, the ℓp exponent, and the derived quadtree depth.
///
/// Levels run from 1 (the root cell of side 2Δ) down to depth()+1 (unit
/// cells holding a single grid point).
class GridConfig {
public:
  GridConfig(std::uint64_t delta, std::uint32_t dim, double norm_p = 2.0);

  [[nodiscard]] std::uint64_t delta() const noexcept { return delta_; }
  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
  [[nodiscard]] double norm_p() const noexcept { return norm_p_; }
  [[nodiscard]] std::uint32_t log_delta() const noexcept { return log_delta_; }
  /// L = 1 + log2(Δ).
  [[nodiscard]] std::uint32_t depth() const noexcept { return log_delta_ + 1; }
  /// Number of bits of a DomainIndex, d·log2(Δ).
  [[nodiscard]] std::uint32_t index_bits() const noexcept { return dim_ * log_delta_; }

  bool operator==(const GridConfig&) const = default;

private:
  std::uint64_t delta_;
  std::uint32_t dim_;
  double norm_p_;
  std::uint32_t log_delta_;
};

/// A grid point with 1-based coordinates in [1, Δ].
struct Point {
  std::vector<std::int64_t> coords;

  [[nodiscard]] std::size_t dim() const noexcept { return coords.size(); }
  auto operator<=>(const Point&) const = default;
};

/// Throws std::out_of_range unless p lies in [Δ]^d for cfg.
void validate_point(const Point& p, const GridConfig& cfg);

struct StreamUpdate {
  Point point;
  int sign = +1; // +1 insert, -1 delete
};

/// Row-major, 0-based encoding of a grid point; the first coordinate is the
/// most significant digit.
class DomainIndex {
public:
  using value_type = unsigned __int128;

  constexpr DomainIndex() = default;
  constexpr explicit DomainIndex(value_type v) : value_(v) {}

  [[nodiscard]] constexpr value_type value() const noexcept { return value_; }
  /// Low 64 bits; exact whenever index_bits() <= 64.
  [[nodiscard]] constexpr std::uint64_t low64() const noexcept {
    return static_cast<std::uint64_t>(value_);
  }

  constexpr auto operator<=>(const DomainIndex&) const = default;

private:
  value_type value_ = 0;
};

std::string to_string(DomainIndex idx);

[[nodiscard]] DomainIndex encode_point(const Point& p, const GridConfig& cfg);
[[nodiscard]] Point decode_point(DomainIndex idx, const GridConfig& cfg);

[[nodiscard]] double lp_distance(std::span<const double> a, std::span<const double> b, double norm_p);
[[nodiscard]] double lp_distance(const Point& a, const Point& b, double norm_p);

/// A set of points given as a list; callers keep it duplicate-free.
using PointSet = std::vector<Point>;

// Stream text format: one update per line, "+ x1 ... xd" or "- x1 ... xd";
// lines starting with '#' and blank lines are skipped.
std::vector<StreamUpdate> parse_stream(std::istream& in, const GridConfig& cfg);
std::vector<StreamUpdate> read_stream_file(const std::string& path, const GridConfig& cfg);
void write_stream(std::ostream& out, std::span<const StreamUpdate> updates);

/// Net point set of a stream. Throws std::invalid_argument if any prefix
/// drives a point's count outside {0, 1}.
PointSet materialize(std::span<const StreamUpdate> updates, const GridConfig& cfg);

/// Real-valued point rows in the same line format, for the JL tools.
std::vector<std::vector<double>> parse_real_points(std::istream& in);

} // namespace geocut
