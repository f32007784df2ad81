#include "geocut/light_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geocut {

namespace {

constexpr std::uint64_t kTagSketch = 0x736b65ULL;
constexpr std::uint64_t kTagBucket = 0x62756bULL;
constexpr std::uint64_t kLimbMask = (std::uint64_t{1} << 60) - 1;

} // namespace

unsigned LightSampler::BucketHash::operator()(PartId part) const noexcept {
  const auto l0 = static_cast<std::uint64_t>(part) & kLimbMask;
  const auto l1 = static_cast<std::uint64_t>(part >> 60) & kLimbMask;
  const auto l2 = static_cast<std::uint64_t>(part >> 120);
  std::uint64_t h = a[0];
  h = mersenne::add(h, mersenne::mul(a[1], l0));
  h = mersenne::add(h, mersenne::mul(a[2], l1));
  h = mersenne::add(h, mersenne::mul(a[3], l2));
  return static_cast<unsigned>(h & 1U);
}

LightSampler::LightSampler(Params params, SketchSeed seed, PartitionMap map)
    : params_(params), seed_(std::move(seed)), map_(std::move(map)) {
  if (params_.domain_size < 1 || params_.domain_size > kMaxSketchDomain) throw std::out_of_range("bad sketch domain");
  if (!(params_.epsilon > 0 && params_.epsilon < 1)) throw std::invalid_argument("epsilon must be in (0, 1)");
  if (!(params_.delta > 0 && params_.delta < 1)) throw std::invalid_argument("delta must be in (0, 1)");
  if (!(params_.sigma > 0 && params_.sigma < 0.5)) throw std::invalid_argument("sigma must be in (0, 0.5)");

  s_ = static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(params_.domain_size) / params_.delta)));
  s_ = std::max(1U, s_);

  auto g = seed_.child(kTagBucket).generator(0);
  hashes_.resize(s_);
  for (auto& h : hashes_) {
    for (auto& c : h.a) c = g.field();
  }

  // Union bound over the 2s bucket estimates, the final sample and the final estimate.
  const double sub_delta = params_.delta / (2.0 * s_ + 2.0);
  const SketchSeed shared = seed_.child(kTagSketch);
  L0Sampler proto_s({params_.domain_size, sub_delta, static_cast<std::int64_t>(s_), 1, 4}, shared);
  L0Estimator proto_e({params_.domain_size, params_.epsilon * params_.sigma, sub_delta, static_cast<std::int64_t>(s_), 2},
                      shared);
  samplers_.assign(2 * static_cast<std::size_t>(s_), proto_s);
  estimators_.assign(2 * static_cast<std::size_t>(s_), proto_e);
}

unsigned LightSampler::bucket(unsigned t, PartId part) const {
  if (t >= s_) throw std::out_of_range("hash index out of range");
  return hashes_[t](part);
}

void LightSampler::make_key(DomainIndex i, Key& key) const {
  samplers_.front().make_key(i, key.sampler);
  estimators_.front().make_key(i, key.estimator);
}

void LightSampler::apply(const Key& key, PartId part, std::int64_t delta) {
  for (unsigned t = 0; t < s_; ++t) {
    const std::size_t k = slot(t, hashes_[t](part));
    samplers_[k].apply(key.sampler, delta);
    estimators_[k].apply(key.estimator, delta);
  }
  if (debug_) {
    auto& e = shadow_[DomainIndex{key.sampler.index}.value()];
    e.first += delta;
    e.second = part;
  }
}

void LightSampler::update(DomainIndex i, PartId part, std::int64_t delta) {
  Key key;
  make_key(i, key);
  apply(key, part, delta);
}

void LightSampler::update(DomainIndex i, std::int64_t delta) {
  if (!map_) throw std::logic_error("light sampler has no partition map");
  update(i, map_(i), delta);
}

std::vector<unsigned> LightSampler::heavy_buckets() const {
  std::vector<unsigned> out(s_);
  for (unsigned t = 0; t < s_; ++t) {
    const double e0 = estimators_[slot(t, 0)].estimate(0);
    const double e1 = estimators_[slot(t, 1)].estimate(0);
    out[t] = e1 > e0 ? 1U : 0U;
  }
  return out;
}

LightSampler::Result LightSampler::query() const {
  const double slack = params_.epsilon * params_.sigma;
  const double threshold = (0.5 + params_.sigma) * (1.0 - slack) / (1.0 + slack);
  Result res;
  std::vector<unsigned> heavy(s_);
  for (unsigned t = 0; t < s_; ++t) {
    const double e0 = estimators_[slot(t, 0)].estimate(0);
    const double e1 = estimators_[slot(t, 1)].estimate(0);
    heavy[t] = e1 > e0 ? 1U : 0U;
    if (e0 + e1 > 0 && std::max(e0, e1) < threshold * (e0 + e1)) res.verified = false;
  }
  L0Sampler sampler = samplers_[slot(0, 1 - heavy[0])];
  L0Estimator estimator = estimators_[slot(0, 1 - heavy[0])];
  for (unsigned t = 1; t < s_; ++t) {
    sampler += samplers_[slot(t, 1 - heavy[t])];
    estimator += estimators_[slot(t, 1 - heavy[t])];
  }
  res.index = sampler.sample(0);
  res.size = estimator.estimate(1);
  return res;
}

std::uint64_t LightSampler::counter_count() const noexcept {
  std::uint64_t total = 0;
  for (const auto& s : samplers_) total += s.counter_count();
  for (const auto& e : estimators_) total += e.counter_count();
  return total;
}

void LightSampler::enable_debug() {
  for (std::size_t k = 0; k < samplers_.size(); ++k) {
    if (!samplers_[k].empty_state() || !estimators_[k].empty_state()) {
      throw std::logic_error("enable_debug must precede the first update");
    }
  }
  debug_ = true;
}

std::set<DomainIndex> LightSampler::recovered_support() const {
  if (!debug_) throw std::logic_error("recovered_support requires enable_debug()");
  const auto heavy = heavy_buckets();
  std::set<DomainIndex> out;
  for (const auto& [idx, entry] : shadow_) {
    if (entry.first == 0) continue;
    for (unsigned t = 0; t < s_; ++t) {
      if (hashes_[t](entry.second) != heavy[t]) {
        out.insert(DomainIndex{idx});
        break;
      }
    }
  }
  return out;
}

} // namespace geocut
