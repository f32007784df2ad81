#include "geocut/sketches.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>

namespace geocut {

namespace {

constexpr std::uint32_t kBlobMagic = 0x4b534347; // "GCSK"
constexpr std::uint32_t kBlobVersion = 1;
constexpr std::uint32_t kTagEstimator = 1;
constexpr std::uint32_t kTagSampler = 2;

constexpr std::uint64_t kStreamLevel = 0x6c6576656cULL;
constexpr std::uint64_t kStreamBin = 0x62696eULL;

class ByteWriter {
public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_seed(const SketchSeed& s) {
    put(s.master);
    put(static_cast<std::uint64_t>(s.path.size()));
    for (auto v : s.path) put(v);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > in_.size()) throw std::invalid_argument("sketch blob truncated");
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  SketchSeed get_seed() {
    SketchSeed s;
    s.master = get<std::uint64_t>();
    const auto n = get<std::uint64_t>();
    if (n > (in_.size() - pos_) / sizeof(std::uint64_t)) throw std::invalid_argument("sketch blob truncated");
    s.path.resize(n);
    for (auto& v : s.path) v = get<std::uint64_t>();
    return s;
  }
  void expect_header(std::uint32_t tag) {
    if (get<std::uint32_t>() != kBlobMagic) throw std::invalid_argument("not a sketch blob");
    if (get<std::uint32_t>() != kBlobVersion) throw std::invalid_argument("unsupported sketch blob version");
    if (get<std::uint32_t>() != tag) throw std::invalid_argument("sketch blob holds a different sketch type");
  }
  void expect_end() const {
    if (pos_ != in_.size()) throw std::invalid_argument("trailing bytes in sketch blob");
  }

private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint64_t checked_index(DomainIndex i, std::uint64_t domain) {
  if (i.value() >= domain) {
    throw std::out_of_range("index " + to_string(i) + " outside sketch domain");
  }
  return i.low64();
}

void check_domain(std::uint64_t domain) {
  if (domain == 0 || domain > kMaxSketchDomain) {
    throw std::invalid_argument("sketch domain size must be in [1, 2^61-1]");
  }
}

void check_probability(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
}

} // namespace

std::uint64_t SketchSeed::key() const noexcept {
  std::uint64_t h = mix64(master ^ 0x5eedULL);
  for (auto v : path) h = mix64(h ^ mix64(v));
  return h;
}

SplitMix64 SketchSeed::generator(std::uint64_t stream) const noexcept {
  return SplitMix64(mix64(key() ^ mix64(stream)));
}

std::uint64_t SketchSeed::fingerprint_point() const noexcept {
  SplitMix64 g(mix64(master ^ 0xf1a9e7ULL));
  for (;;) {
    auto z = g.field();
    if (z > 1) return z;
  }
}

std::uint64_t fingerprint_power(std::uint64_t z, std::uint64_t index) noexcept { return mersenne::pow(z, index); }

unsigned subsampling_levels(std::uint64_t domain_size) noexcept {
  if (domain_size <= 1) return 1;
  return static_cast<unsigned>(std::bit_width(domain_size - 1)) + 1;
}

unsigned sampler_repetitions(double delta) {
  check_probability(delta, "sampler failure probability");
  return std::max(1U, static_cast<unsigned>(std::ceil(std::log(1.0 / delta) / std::log(3.0))));
}

unsigned estimator_repetitions(double delta) {
  check_probability(delta, "estimator failure probability");
  constexpr double f = 0.1;
  for (unsigned r = 1;; r += 2) {
    // Pr[Bin(r, f) >= (r+1)/2]
    double tail = 0.0;
    for (unsigned k = (r + 1) / 2; k <= r; ++k) {
      tail += std::exp(std::lgamma(r + 1.0) - std::lgamma(k + 1.0) - std::lgamma(r - k + 1.0) + k * std::log(f) +
                       (r - k) * std::log1p(-f));
    }
    if (tail <= delta) return r;
  }
}

// ---------------------------------------------------------------------------
// L0Estimator
// ---------------------------------------------------------------------------

L0Estimator::L0Estimator(Params params, SketchSeed seed) : params_(params), seed_(std::move(seed)) {
  check_domain(params_.domain_size);
  check_probability(params_.epsilon, "estimator epsilon");
  check_probability(params_.delta, "estimator delta");
  if (params_.copies == 0) throw std::invalid_argument("copies must be positive");
  if (params_.max_frequency < 1) throw std::invalid_argument("max frequency must be positive");
  reps_ = estimator_repetitions(params_.delta);
  levels_ = subsampling_levels(params_.domain_size);
  bins_ = static_cast<std::uint64_t>(std::ceil(16.0 / (params_.epsilon * params_.epsilon)));
  build_hashes();
}

void L0Estimator::build_hashes() {
  z_ = seed_.fingerprint_point();
  const unsigned n = params_.copies * reps_;
  level_hash_.clear();
  bin_hash_.clear();
  level_hash_.reserve(n);
  bin_hash_.reserve(n);
  for (unsigned cr = 0; cr < n; ++cr) {
    auto g = seed_.generator(kStreamBin + cr);
    level_hash_.emplace_back(2, g);
    bin_hash_.emplace_back(2, g);
  }
}

std::uint64_t L0Estimator::counter_count() const noexcept {
  return static_cast<std::uint64_t>(params_.copies) * reps_ * levels_ * bins_;
}

void L0Estimator::make_key(DomainIndex i, Key& key) const {
  const std::uint64_t idx = checked_index(i, params_.domain_size);
  key.fingerprint = fingerprint_power(z_, idx);
  const unsigned n = params_.copies * reps_;
  key.cells.resize(n);
  for (unsigned cr = 0; cr < n; ++cr) {
    const unsigned level = geometric_level(level_hash_[cr](idx), levels_ - 1);
    const std::uint64_t bin = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bin_hash_[cr](idx)) * bins_) >> 61);
    key.cells[cr] = (static_cast<std::uint64_t>(cr) * levels_ + level) * bins_ + bin;
  }
}

namespace {

using CellList = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

// Merges two sorted cell lists, adding fingerprints on equal keys and dropping zeros.
CellList merge_cells(const CellList& x, const CellList& y) {
  CellList out;
  out.reserve(x.size() + y.size());
  auto a = x.begin();
  auto b = y.begin();
  while (a != x.end() || b != y.end()) {
    if (b == y.end() || (a != x.end() && a->first < b->first)) {
      out.push_back(*a++);
    } else if (a == x.end() || b->first < a->first) {
      out.push_back(*b++);
    } else {
      const auto v = mersenne::add(a->second, b->second);
      if (v != 0) out.emplace_back(a->first, v);
      ++a;
      ++b;
    }
  }
  return out;
}

} // namespace

void L0Estimator::add_cell(std::uint64_t key, std::uint64_t value) {
  if (value == 0) return;
  pending_.emplace_back(key, value);
  if (pending_.size() > std::max<std::size_t>(256, cells_.size())) flush();
}

void L0Estimator::flush() const {
  if (pending_.empty()) return;
  std::sort(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  CellList folded;
  folded.reserve(pending_.size());
  for (const auto& [k, v] : pending_) {
    if (!folded.empty() && folded.back().first == k) {
      folded.back().second = mersenne::add(folded.back().second, v);
      if (folded.back().second == 0) folded.pop_back();
    } else {
      folded.emplace_back(k, v);
    }
  }
  pending_.clear();
  cells_ = merge_cells(cells_, folded);
}

void L0Estimator::apply(const Key& key, std::int64_t delta) {
  if (delta == 0) return;
  const std::uint64_t value = mersenne::scale(key.fingerprint, delta);
  for (auto cell : key.cells) add_cell(cell, value);
}

void L0Estimator::update(DomainIndex i, std::int64_t delta) {
  Key key;
  make_key(i, key);
  apply(key, delta);
}

double L0Estimator::estimate_repetition(unsigned copy, unsigned rep) const {
  const std::uint64_t cr = static_cast<std::uint64_t>(copy) * reps_ + rep;
  const std::uint64_t lo = cr * levels_ * bins_;
  const std::uint64_t hi = lo + levels_ * bins_;
  auto first = std::lower_bound(cells_.begin(), cells_.end(), lo,
                                [](const auto& e, std::uint64_t k) { return e.first < k; });
  auto last = std::lower_bound(first, cells_.end(), hi,
                               [](const auto& e, std::uint64_t k) { return e.first < k; });
  if (first == last) return 0.0;

  struct Entry {
    std::uint64_t bin;
    unsigned level;
    std::uint64_t value;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(last - first));
  for (auto it = first; it != last; ++it) {
    const std::uint64_t off = it->first - lo;
    entries.push_back({off % bins_, static_cast<unsigned>(off / bins_), it->second});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.bin != b.bin ? a.bin < b.bin : a.level > b.level;
  });

  // occupied[l] = number of bins whose items at levels >= l have a nonzero vector.
  std::vector<std::uint64_t> occupied(levels_, 0);
  for (std::size_t s = 0; s < entries.size();) {
    std::size_t e = s;
    std::uint64_t suffix = 0;
    int level = static_cast<int>(levels_) - 1;
    while (level >= 0) {
      while (e < entries.size() && entries[e].bin == entries[s].bin &&
             entries[e].level == static_cast<unsigned>(level)) {
        suffix = mersenne::add(suffix, entries[e].value);
        ++e;
      }
      if (suffix != 0) ++occupied[static_cast<unsigned>(level)];
      --level;
    }
    s = e;
  }

  const double b = static_cast<double>(bins_);
  for (unsigned level = 0; level < levels_; ++level) {
    const double z = static_cast<double>(occupied[level]);
    if (z <= b / 2 || level + 1 == levels_) {
      const double frac = std::min(z, b - 1) / b;
      const double m = std::log1p(-frac) / std::log1p(-1.0 / b);
      return std::ldexp(m, static_cast<int>(level));
    }
  }
  return 0.0;
}

double L0Estimator::estimate(unsigned copy) const {
  if (copy >= params_.copies) throw std::out_of_range("estimator copy index out of range");
  flush();
  std::vector<double> values(reps_);
  for (unsigned r = 0; r < reps_; ++r) values[r] = estimate_repetition(copy, r);
  std::nth_element(values.begin(), values.begin() + reps_ / 2, values.end());
  return values[reps_ / 2];
}

bool L0Estimator::compatible(const L0Estimator& other) const noexcept {
  return params_ == other.params_ && seed_ == other.seed_;
}

L0Estimator& L0Estimator::operator+=(const L0Estimator& other) {
  if (!compatible(other)) throw SketchMismatch("cannot merge estimators with different seeds or parameters");
  flush();
  other.flush();
  cells_ = merge_cells(cells_, other.cells_);
  return *this;
}

L0Estimator& L0Estimator::operator-=(const L0Estimator& other) {
  if (!compatible(other)) throw SketchMismatch("cannot merge estimators with different seeds or parameters");
  other.flush();
  for (const auto& [k, v] : other.cells_) add_cell(k, mersenne::sub(0, v));
  flush();
  return *this;
}

std::vector<std::uint8_t> L0Estimator::serialize() const {
  ByteWriter w;
  w.put(kBlobMagic);
  w.put(kBlobVersion);
  w.put(kTagEstimator);
  w.put(params_.domain_size);
  w.put(params_.epsilon);
  w.put(params_.delta);
  w.put(params_.max_frequency);
  w.put(params_.copies);
  w.put_seed(seed_);
  flush();
  w.put(static_cast<std::uint64_t>(cells_.size()));
  for (const auto& [k, v] : cells_) {
    w.put(k);
    w.put(v);
  }
  return w.take();
}

L0Estimator L0Estimator::deserialize(std::span<const std::uint8_t> blob) {
  ByteReader r(blob);
  r.expect_header(kTagEstimator);
  Params p;
  p.domain_size = r.get<std::uint64_t>();
  p.epsilon = r.get<double>();
  p.delta = r.get<double>();
  p.max_frequency = r.get<std::int64_t>();
  p.copies = r.get<unsigned>();
  L0Estimator est(p, r.get_seed());
  const auto n = r.get<std::uint64_t>();
  const std::uint64_t limit = est.counter_count();
  for (std::uint64_t j = 0; j < n; ++j) {
    const auto k = r.get<std::uint64_t>();
    const auto v = r.get<std::uint64_t>();
    if (k >= limit || v == 0 || v >= mersenne::kPrime || (!est.cells_.empty() && est.cells_.back().first >= k)) {
      throw std::invalid_argument("corrupt estimator counters");
    }
    est.cells_.emplace_back(k, v);
  }
  r.expect_end();
  return est;
}

// ---------------------------------------------------------------------------
// L0Sampler
// ---------------------------------------------------------------------------

L0Sampler::L0Sampler(Params params, SketchSeed seed) : params_(params), seed_(std::move(seed)) {
  check_domain(params_.domain_size);
  check_probability(params_.delta, "sampler delta");
  if (params_.copies == 0) throw std::invalid_argument("copies must be positive");
  if (params_.max_frequency < 1) throw std::invalid_argument("max frequency must be positive");
  reps_ = sampler_repetitions(params_.delta);
  levels_ = subsampling_levels(params_.domain_size);
  cells_.assign(static_cast<std::size_t>(params_.copies) * reps_ * levels_, Cell{});
  build_hashes();
}

void L0Sampler::build_hashes() {
  z_ = seed_.fingerprint_point();
  const unsigned n = params_.copies * reps_;
  level_hash_.clear();
  level_hash_.reserve(n);
  for (unsigned cr = 0; cr < n; ++cr) {
    auto g = seed_.generator(kStreamLevel + cr);
    level_hash_.emplace_back(params_.independence, g);
  }
}

void L0Sampler::make_key(DomainIndex i, Key& key) const {
  key.index = checked_index(i, params_.domain_size);
  key.fingerprint = fingerprint_power(z_, key.index);
  const unsigned n = params_.copies * reps_;
  key.levels.resize(n);
  for (unsigned cr = 0; cr < n; ++cr) {
    key.levels[cr] = static_cast<std::uint8_t>(geometric_level(level_hash_[cr](key.index), levels_ - 1));
  }
}

void L0Sampler::apply(const Key& key, std::int64_t delta) {
  if (delta == 0) return;
  const std::uint64_t di = mersenne::scale(key.index, delta);
  const std::uint64_t df = mersenne::scale(key.fingerprint, delta);
  for (std::size_t cr = 0; cr < key.levels.size(); ++cr) {
    Cell& c = cells_[cr * levels_ + key.levels[cr]];
    c.count += delta;
    c.index_sum = mersenne::add(c.index_sum, di);
    c.fingerprint = mersenne::add(c.fingerprint, df);
  }
}

void L0Sampler::update_with_power(std::uint64_t index, std::uint64_t z_pow, std::int64_t delta) {
  if (index >= params_.domain_size) throw std::out_of_range("index outside sketch domain");
  if (delta == 0) return;
  const std::uint64_t di = mersenne::scale(index, delta);
  const std::uint64_t df = mersenne::scale(z_pow, delta);
  const unsigned n = params_.copies * reps_;
  for (unsigned cr = 0; cr < n; ++cr) {
    Cell& c = cells_[static_cast<std::size_t>(cr) * levels_ + geometric_level(level_hash_[cr](index), levels_ - 1)];
    c.count += delta;
    c.index_sum = mersenne::add(c.index_sum, di);
    c.fingerprint = mersenne::add(c.fingerprint, df);
  }
}

void L0Sampler::update(DomainIndex i, std::int64_t delta) {
  const std::uint64_t idx = checked_index(i, params_.domain_size);
  update_with_power(idx, fingerprint_power(z_, idx), delta);
}

namespace {

constexpr std::int64_t kSmallInverses = 64;

// 1/c mod p for 0 < |c| <= kSmallInverses without exponentiation.
std::uint64_t count_inverse(std::int64_t c, std::uint64_t cf) {
  static const auto table = [] {
    std::array<std::uint64_t, kSmallInverses + 1> t{};
    for (std::int64_t k = 1; k <= kSmallInverses; ++k) t[k] = mersenne::inverse(static_cast<std::uint64_t>(k));
    return t;
  }();
  if (c > 0 && c <= kSmallInverses) return table[c];
  if (c < 0 && c >= -kSmallInverses) return mersenne::sub(0, table[-c]);
  return mersenne::inverse(cf);
}

} // namespace

std::optional<DomainIndex> L0Sampler::recover(const Cell& c) const {
  if (c.count == 0) return std::nullopt;
  const std::uint64_t cf = mersenne::from_signed(c.count);
  if (cf == 0) return std::nullopt;
  const std::uint64_t j = mersenne::mul(c.index_sum, count_inverse(c.count, cf));
  if (j >= params_.domain_size) return std::nullopt;
  if (mersenne::mul(fingerprint_power(z_, j), cf) != c.fingerprint) return std::nullopt;
  return DomainIndex{j};
}

std::optional<DomainIndex> L0Sampler::sample(unsigned copy) const {
  if (copy >= params_.copies) throw std::out_of_range("sampler copy index out of range");
  for (unsigned rep = 0; rep < reps_; ++rep) {
    const std::size_t base = (static_cast<std::size_t>(copy) * reps_ + rep) * levels_;
    bool all_zero = true;
    for (unsigned level = levels_; level-- > 0;) {
      const Cell& c = cells_[base + level];
      if (c.zero()) continue;
      all_zero = false;
      if (auto idx = recover(c)) return idx;
    }
    if (all_zero) return std::nullopt; // empty support
  }
  return std::nullopt;
}

bool L0Sampler::compatible(const L0Sampler& other) const noexcept {
  return params_ == other.params_ && seed_ == other.seed_;
}

bool L0Sampler::empty_state() const noexcept {
  return std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.zero(); });
}

L0Sampler& L0Sampler::operator+=(const L0Sampler& other) {
  if (!compatible(other)) throw SketchMismatch("cannot merge samplers with different seeds or parameters");
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    cells_[k].count += other.cells_[k].count;
    cells_[k].index_sum = mersenne::add(cells_[k].index_sum, other.cells_[k].index_sum);
    cells_[k].fingerprint = mersenne::add(cells_[k].fingerprint, other.cells_[k].fingerprint);
  }
  return *this;
}

L0Sampler& L0Sampler::operator-=(const L0Sampler& other) {
  if (!compatible(other)) throw SketchMismatch("cannot merge samplers with different seeds or parameters");
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    cells_[k].count -= other.cells_[k].count;
    cells_[k].index_sum = mersenne::sub(cells_[k].index_sum, other.cells_[k].index_sum);
    cells_[k].fingerprint = mersenne::sub(cells_[k].fingerprint, other.cells_[k].fingerprint);
  }
  return *this;
}

std::vector<std::uint8_t> L0Sampler::serialize() const {
  ByteWriter w;
  w.put(kBlobMagic);
  w.put(kBlobVersion);
  w.put(kTagSampler);
  w.put(params_.domain_size);
  w.put(params_.delta);
  w.put(params_.max_frequency);
  w.put(params_.copies);
  w.put(params_.independence);
  w.put_seed(seed_);
  w.put(static_cast<std::uint64_t>(cells_.size()));
  for (const auto& c : cells_) {
    w.put(c.count);
    w.put(c.index_sum);
    w.put(c.fingerprint);
  }
  return w.take();
}

L0Sampler L0Sampler::deserialize(std::span<const std::uint8_t> blob) {
  ByteReader r(blob);
  r.expect_header(kTagSampler);
  Params p;
  p.domain_size = r.get<std::uint64_t>();
  p.delta = r.get<double>();
  p.max_frequency = r.get<std::int64_t>();
  p.copies = r.get<unsigned>();
  p.independence = r.get<unsigned>();
  L0Sampler s(p, r.get_seed());
  if (r.get<std::uint64_t>() != s.cells_.size()) throw std::invalid_argument("sampler blob has wrong counter count");
  for (auto& c : s.cells_) {
    c.count = r.get<std::int64_t>();
    c.index_sum = r.get<std::uint64_t>();
    c.fingerprint = r.get<std::uint64_t>();
    if (c.index_sum >= mersenne::kPrime || c.fingerprint >= mersenne::kPrime) {
      throw std::invalid_argument("corrupt sampler counters");
    }
  }
  r.expect_end();
  return s;
}

} // namespace geocut
