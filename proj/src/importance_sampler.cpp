#include "geocut/importance_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geocut {

namespace {

constexpr std::uint64_t kTagCount = 1;
constexpr std::uint64_t kTagPool = 2;
constexpr std::uint64_t kTagFresh = 3;
constexpr std::uint64_t kTagLight = 4;
constexpr std::uint64_t kTagInit = 0x696e6974ULL;
constexpr std::uint64_t kTagRun = 0x72756eULL;
constexpr std::uint64_t kTagDraw = 0x64726177ULL;
// A single repetition per pool sampler: failure <= 1/3, and failed draws are dropped.
constexpr double kPoolDelta = 0.34;

std::uint64_t domain_size(const GridConfig& g) { return std::uint64_t{1} << g.index_bits(); }

} // namespace

void SamplerConfig::validate() const {
  if (grid.index_bits() > 60) throw std::invalid_argument("streaming sampler needs d*log2(delta) <= 60");
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must be in (0, 1)");
  if (!(light_delta > 0 && light_delta < 1)) throw std::invalid_argument("light delta must be in (0, 1)");
  if (!(sigma > 0 && sigma < 0.5)) throw std::invalid_argument("sigma must be in (0, 0.5)");
  const auto& t = thresholds;
  if (!(t.sigma_minus > 0.5 && t.sigma_minus <= t.sigma_plus && t.sigma_plus <= 1.0)) {
    throw std::invalid_argument("thresholds need 0.5 < sigma- <= sigma+ <= 1");
  }
  if (!(t.tau > t.sigma_minus && t.tau < t.sigma_plus)) throw std::invalid_argument("tau must lie strictly between sigma- and sigma+");
  if (fresh_pool == 0) throw std::invalid_argument("fresh pool must be nonempty");
}

std::size_t SamplerConfig::effective_pool_size() const {
  if (pool_size != 0) return pool_size;
  const double bits = static_cast<double>(grid.dim()) * std::log2(2.0 * static_cast<double>(grid.delta()));
  return 200 * static_cast<std::size_t>(std::ceil(bits));
}

ShiftVector init_shift(const SamplerConfig& cfg) { return draw_shift(cfg.grid, mix64(cfg.seed ^ kTagInit)); }

std::uint64_t run_seed(const SamplerConfig& cfg, std::uint64_t copy) { return mix64(mix64(cfg.seed ^ kTagRun) + copy); }

ImportanceSampler::ImportanceSampler(const SamplerConfig& cfg, ShiftVector shift, std::uint64_t run_seed)
    : cfg_((cfg.validate(), cfg)),
      tree_(cfg.grid, std::move(shift)),
      run_seed_(run_seed),
      count_({domain_size(cfg.grid), cfg.count_epsilon(), cfg.light_delta, 1, 1}, SketchSeed{run_seed, {kTagCount}}),
      pool_({domain_size(cfg.grid), kPoolDelta, 1, static_cast<unsigned>(cfg.effective_pool_size()), 4},
            SketchSeed{run_seed, {kTagPool}}),
      fresh_({domain_size(cfg.grid), kPoolDelta, 1, static_cast<unsigned>(cfg.fresh_pool), 4},
             SketchSeed{run_seed, {kTagFresh}}) {
  const LightSampler::Params lp{domain_size(cfg.grid), cfg.epsilon, cfg.light_delta, cfg.sigma};
  for (std::uint32_t level = 2; level <= cfg.grid.depth(); ++level) {
    light_.emplace_back(lp, SketchSeed{run_seed, {kTagLight, level}});
  }
}

void ImportanceSampler::update(const StreamUpdate& u) { update(u.point, u.sign); }

void ImportanceSampler::update(const Point& x, std::int64_t delta) {
  const DomainIndex idx = encode_point(x, cfg_.grid);
  const std::uint64_t i = idx.low64();
  const std::uint64_t zpow = fingerprint_power(pool_.fingerprint_point(), i);
  count_.update(idx, delta);
  pool_.update_with_power(i, zpow, delta);
  fresh_.update_with_power(i, zpow, delta);
  const auto keys = tree_.ancestor_keys(x);
  LightSampler::Key key;
  for (std::size_t k = 0; k < light_.size(); ++k) {
    light_[k].make_key(idx, key);
    light_[k].apply(key, keys[k + 2], delta);
  }
}

std::uint32_t find_critical_level(const LevelProfile& profile, const CriticalThresholds& th) {
  std::uint32_t k = 1;
  for (std::uint32_t i = 1; i < profile.fraction.size(); ++i) {
    if (profile.fraction[i] >= th.tau) k = i;
  }
  return k;
}

double compute_q_tilde(const LevelProfile& profile, std::uint32_t i, const EdgeWeights& weights) {
  if (i < 1 || i >= profile.heavy_size.size()) throw std::out_of_range("q-tilde level outside [1, k]");
  double q = profile.n_hat * weights.beta(i);
  for (std::uint32_t j = 1; j <= i; ++j) q += weights.beta(j) * (profile.n_hat - profile.heavy_size[j]);
  return q;
}

LevelProfile ImportanceSampler::profile() const {
  LevelProfile prof;
  const std::uint32_t L = cfg_.grid.depth();
  prof.leaf_level = L + 1;
  prof.n_hat = count_.estimate(0);

  std::vector<std::uint64_t> drawn;
  drawn.reserve(pool_.params().copies);
  for (unsigned c = 0; c < pool_.params().copies; ++c) {
    if (auto s = pool_.sample(c)) drawn.push_back(s->low64());
  }
  prof.samples = drawn.size();
  std::sort(drawn.begin(), drawn.end());

  // distinct sampled points with multiplicities, then per-level cell tallies
  std::vector<std::vector<std::pair<CellKey, std::size_t>>> tally(L + 1);
  for (std::size_t a = 0; a < drawn.size();) {
    std::size_t b = a;
    while (b < drawn.size() && drawn[b] == drawn[a]) ++b;
    const auto keys = tree_.ancestor_keys(decode_point(DomainIndex{drawn[a]}, cfg_.grid));
    for (std::uint32_t i = 1; i <= L; ++i) tally[i].emplace_back(keys[i], b - a);
    a = b;
  }
  prof.heavy.assign(L + 1, 0);
  prof.fraction.assign(L + 1, 0.0);
  for (std::uint32_t i = 1; i <= L; ++i) {
    auto& t = tally[i];
    std::sort(t.begin(), t.end());
    std::size_t best = 0;
    for (std::size_t a = 0; a < t.size();) {
      std::size_t b = a;
      std::size_t count = 0;
      for (; b < t.size() && t[b].first == t[a].first; ++b) count += t[b].second;
      if (count > best) { // ascending keys: ties keep the smallest cell
        best = count;
        prof.heavy[i] = t[a].first;
      }
      a = b;
    }
    prof.fraction[i] = drawn.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(drawn.size());
  }
  prof.degenerate = drawn.empty();
  prof.k = prof.degenerate ? 1 : find_critical_level(prof, cfg_.thresholds);

  const std::uint32_t k = prof.k;
  prof.heavy_size.assign(k + 1, 0.0);
  for (std::uint32_t j = 1; j <= k; ++j) prof.heavy_size[j] = prof.fraction[j] * prof.n_hat;
  prof.q_tilde.assign(k + 1, 0.0);
  for (std::uint32_t i = 1; i <= k; ++i) prof.q_tilde[i] = compute_q_tilde(prof, i, tree_.weights());

  prof.light.assign(k, {});
  prof.ext_size.assign(k + 1, 0.0);
  for (std::uint32_t i = 1; i < k; ++i) {
    prof.light[i] = light_[i + 1 - 2].query();
    prof.ext_size[i] = std::max(0.0, prof.light[i].size);
  }
  prof.ext_size[k] = prof.heavy_size[k];

  prof.r.assign(k + 1, 0.0);
  double denom = 0.0;
  for (std::uint32_t i = 1; i <= k; ++i) denom += prof.ext_size[i] * prof.q_tilde[i];
  if (denom > 0) {
    for (std::uint32_t i = 1; i <= k; ++i) prof.r[i] = prof.ext_size[i] * prof.q_tilde[i] / denom;
  }
  return prof;
}

SampleOutcome ImportanceSampler::finalize() const {
  SampleOutcome out;
  if (std::llround(count_.estimate(0)) < 2) {
    out.status = "too_few_points";
    return out;
  }
  const LevelProfile prof = profile();
  out.k = prof.k;
  if (prof.degenerate) {
    out.status = "no_pool_samples";
    return out;
  }
  const std::uint32_t k = prof.k;
  double total = 0.0;
  for (std::uint32_t i = 1; i <= k; ++i) total += prof.r[i];
  if (total <= 0) {
    out.status = "empty_distribution";
    return out;
  }

  SplitMix64 rng(mix64(run_seed_ ^ kTagDraw));
  double u = rng.uniform() * total;
  std::uint32_t pick = 0;
  for (std::uint32_t i = 1; i <= k; ++i) {
    if (prof.r[i] <= 0) continue;
    pick = i;
    if (u < prof.r[i]) break;
    u -= prof.r[i];
  }
  out.level = pick;

  Point z;
  if (pick < k) {
    const auto& res = prof.light[pick];
    if (!res.index) {
      out.status = "light_sampler_empty";
      return out;
    }
    z = decode_point(*res.index, cfg_.grid);
  } else {
    bool found = false;
    for (unsigned c = 0; c < fresh_.params().copies && !found; ++c) {
      auto s = fresh_.sample(c);
      if (!s) continue;
      Point cand = decode_point(*s, cfg_.grid);
      if (tree_.ancestor_key(cand, k) == prof.heavy[k]) {
        z = std::move(cand);
        found = true;
      }
    }
    if (!found) {
      out.status = "heavy_cell_miss";
      return out;
    }
  }

  const auto keys = tree_.ancestor_keys(z);
  std::uint32_t ell = 1;
  for (std::uint32_t j = 1; j <= k; ++j) {
    if (keys[j] == prof.heavy[j]) ell = j;
  }
  // z lies in X_i^ext for ℓ <= i < k, and in X_k^ext only when ℓ = k
  double p = 0.0;
  for (std::uint32_t i = ell; i < k; ++i) {
    if (prof.ext_size[i] > 0) p += prof.r[i] / prof.ext_size[i];
  }
  if (ell == k && prof.ext_size[k] > 0) p += prof.r[k] / prof.ext_size[k];

  out.z = std::move(z);
  out.ell = ell;
  out.p = std::min(1.0, p);
  if (out.p <= 0) {
    out.z.reset();
    out.status = "zero_probability";
  }
  return out;
}

std::uint64_t ImportanceSampler::counter_count() const noexcept {
  std::uint64_t total = count_.counter_count() + pool_.counter_count() + fresh_.counter_count();
  for (const auto& l : light_) total += l.counter_count();
  return total;
}

bool ImportanceSampler::same_state(const ImportanceSampler& other) const {
  if (!(tree_.shift() == other.tree_.shift()) || run_seed_ != other.run_seed_) return false;
  if (!(count_ == other.count_) || !(pool_ == other.pool_) || !(fresh_ == other.fresh_)) return false;
  if (light_.size() != other.light_.size()) return false;
  for (std::size_t k = 0; k < light_.size(); ++k) {
    if (!light_[k].same_state(other.light_[k])) return false;
  }
  return true;
}

std::vector<ImportanceSampler> sampler_init(const SamplerConfig& cfg, unsigned copies) {
  return sampler_init(cfg, copies, init_shift(cfg));
}

std::vector<ImportanceSampler> sampler_init(const SamplerConfig& cfg, unsigned copies, const ShiftVector& shift,
                                            std::uint64_t first_copy) {
  if (copies == 0) throw std::invalid_argument("copies must be positive");
  cfg.validate();
  std::vector<ImportanceSampler> out;
  out.reserve(copies);
  for (unsigned c = 0; c < copies; ++c) out.emplace_back(cfg, shift, run_seed(cfg, first_copy + c));
  return out;
}

} // namespace geocut
