#include "geocut/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace geocut {

GridConfig::GridConfig(std::uint64_t delta, std::uint32_t dim, double norm_p)
    : delta_(delta), dim_(dim), norm_p_(norm_p), log_delta_(0) {
  if (delta == 0 || !std::has_single_bit(delta)) {
    throw std::invalid_argument("grid side must be a power of two, got " + std::to_string(delta));
  }
  if (dim == 0) {
    throw std::invalid_argument("dimension must be positive");
  }
  if (!(norm_p >= 1.0)) {
    throw std::invalid_argument("norm exponent p must be >= 1");
  }
  log_delta_ = static_cast<std::uint32_t>(std::countr_zero(delta));
  if (static_cast<std::uint64_t>(dim) * log_delta_ > 127) {
    throw std::invalid_argument("d*log2(delta) exceeds the 127-bit index width");
  }
}

void validate_point(const Point& p, const GridConfig& cfg) {
  if (p.dim() != cfg.dim()) {
    throw std::out_of_range("point has " + std::to_string(p.dim()) + " coordinates, expected " +
                            std::to_string(cfg.dim()));
  }
  for (auto c : p.coords) {
    if (c < 1 || static_cast<std::uint64_t>(c) > cfg.delta()) {
      throw std::out_of_range("coordinate " + std::to_string(c) + " outside [1, " +
                              std::to_string(cfg.delta()) + "]");
    }
  }
}

std::string to_string(DomainIndex idx) {
  auto v = idx.value();
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

DomainIndex encode_point(const Point& p, const GridConfig& cfg) {
  validate_point(p, cfg);
  DomainIndex::value_type v = 0;
  for (auto c : p.coords) {
    v = (v << cfg.log_delta()) | static_cast<DomainIndex::value_type>(c - 1);
  }
  return DomainIndex{v};
}

Point decode_point(DomainIndex idx, const GridConfig& cfg) {
  const auto bits = cfg.index_bits();
  if (bits < 128 && (idx.value() >> bits) != 0) {
    throw std::out_of_range("index " + to_string(idx) + " outside the grid domain");
  }
  Point p;
  p.coords.resize(cfg.dim());
  auto v = idx.value();
  const auto mask = static_cast<DomainIndex::value_type>(cfg.delta() - 1);
  for (std::size_t j = cfg.dim(); j-- > 0;) {
    p.coords[j] = static_cast<std::int64_t>(v & mask) + 1;
    v >>= cfg.log_delta();
  }
  return p;
}

double lp_distance(std::span<const double> a, std::span<const double> b, double norm_p) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dimension mismatch in lp_distance");
  }
  double acc = 0.0;
  if (norm_p == 1.0) {
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::abs(a[j] - b[j]);
    return acc;
  }
  if (norm_p == 2.0) {
    for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(acc);
  }
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::pow(std::abs(a[j] - b[j]), norm_p);
  return std::pow(acc, 1.0 / norm_p);
}

double lp_distance(const Point& a, const Point& b, double norm_p) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("dimension mismatch in lp_distance");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double diff = std::abs(static_cast<double>(a.coords[j] - b.coords[j]));
    if (norm_p == 1.0) {
      acc += diff;
    } else if (norm_p == 2.0) {
      acc += diff * diff;
    } else {
      acc += std::pow(diff, norm_p);
    }
  }
  if (norm_p == 1.0) return acc;
  if (norm_p == 2.0) return std::sqrt(acc);
  return std::pow(acc, 1.0 / norm_p);
}

namespace {

bool skip_line(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

} // namespace

std::vector<StreamUpdate> parse_stream(std::istream& in, const GridConfig& cfg) {
  std::vector<StreamUpdate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    std::istringstream ls(line);
    std::string op;
    ls >> op;
    StreamUpdate u;
    if (op == "+") {
      u.sign = +1;
    } else if (op == "-") {
      u.sign = -1;
    } else {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected '+' or '-', got '" + op + "'");
    }
    std::int64_t c = 0;
    while (ls >> c) u.point.coords.push_back(c);
    if (!ls.eof()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed coordinate");
    }
    try {
      validate_point(u.point, cfg);
    } catch (const std::out_of_range& e) {
      throw std::out_of_range("line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<StreamUpdate> read_stream_file(const std::string& path, const GridConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file " + path);
  return parse_stream(in, cfg);
}

void write_stream(std::ostream& out, std::span<const StreamUpdate> updates) {
  for (const auto& u : updates) {
    out << (u.sign > 0 ? '+' : '-');
    for (auto c : u.point.coords) out << ' ' << c;
    out << '\n';
  }
}

PointSet materialize(std::span<const StreamUpdate> updates, const GridConfig& cfg) {
  std::map<Point, int> count;
  for (const auto& u : updates) {
    validate_point(u.point, cfg);
    int& c = count[u.point];
    c += u.sign;
    if (c < 0 || c > 1) {
      throw std::invalid_argument("stream drives a point's multiplicity outside {0,1}");
    }
  }
  PointSet out;
  for (const auto& [p, c] : count) {
    if (c == 1) out.push_back(p);
  }
  return out;
}

std::vector<std::vector<double>> parse_real_points(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    std::vector<double> row;
    if (first != "+") row.push_back(std::stod(first));
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed value");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": inconsistent dimension");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace geocut
