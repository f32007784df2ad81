#include "geocut/maxcut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "geocut/parallel.hpp"

namespace geocut {

DistanceMatrix distance_matrix(const PointSet& X, double norm_p) {
  DistanceMatrix D(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = i + 1; j < X.size(); ++j) D.set(i, j, lp_distance(X[i], X[j], norm_p));
  }
  return D;
}

DistanceMatrix distance_matrix(const PointWeightedSet& S, double norm_p) {
  for (const auto& s : S) {
    if (!(s.weight > 0)) throw std::invalid_argument("sample weights must be positive");
  }
  DistanceMatrix D(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    for (std::size_t j = i + 1; j < S.size(); ++j) {
      D.set(i, j, lp_distance(S[i].point, S[j].point, norm_p) / (S[i].weight * S[j].weight));
    }
  }
  return D;
}

DistanceMatrix distance_matrix(const std::vector<std::vector<double>>& rows, double norm_p) {
  DistanceMatrix D(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) D.set(i, j, lp_distance(rows[i], rows[j], norm_p));
  }
  return D;
}

double cut_value(const DistanceMatrix& D, const std::vector<std::uint8_t>& in_s) {
  if (in_s.size() != D.size()) throw std::invalid_argument("membership vector has the wrong length");
  double total = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (!in_s[i]) continue;
    for (std::size_t j = 0; j < D.size(); ++j) {
      if (!in_s[j]) total += D(i, j);
    }
  }
  return total;
}

double cut_value(const PointSet& X, const std::vector<std::uint8_t>& in_s, double norm_p) {
  return cut_value(distance_matrix(X, norm_p), in_s);
}

namespace {

struct ChunkBest {
  double value = -1.0;
  std::uint64_t mask = 0; // bipartition of the first n-1 points; point n-1 stays on side 0
};

// Walks the low `low_bits` free points in Gray-code order with the high free
// bits fixed to `high`. s[v] = Σ_u D(v,u)·σ_u with σ = +1 on side 0, -1 on side 1;
// flipping v changes the cut by σ_v·s[v].
ChunkBest search_chunk(const DistanceMatrix& D, unsigned low_bits, std::uint64_t high) {
  const std::size_t n = D.size();
  const std::uint64_t start = high << low_bits;
  std::vector<double> sigma(n, 1.0);
  for (std::size_t v = 0; v + 1 < n; ++v) {
    if ((start >> v) & 1U) sigma[v] = -1.0;
  }
  std::vector<double> s(n, 0.0);
  double cut = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      s[v] += D(v, u) * sigma[u];
      if (u > v && sigma[u] != sigma[v]) cut += D(v, u);
    }
  }
  ChunkBest best{cut, start};
  const std::uint64_t steps = std::uint64_t{1} << low_bits;
  for (std::uint64_t t = 1; t < steps; ++t) {
    const auto v = static_cast<std::size_t>(std::countr_zero(t));
    cut += sigma[v] * s[v];
    const double twice = 2.0 * sigma[v];
    for (std::size_t u = 0; u < n; ++u) s[u] -= twice * D(u, v);
    sigma[v] = -sigma[v];
    if (cut > best.value) best = {cut, start | (t ^ (t >> 1))};
  }
  return best;
}

std::vector<std::uint8_t> sides_of(std::uint64_t mask, std::size_t n) {
  std::vector<std::uint8_t> side(n, 0);
  for (std::size_t v = 0; v + 1 < n; ++v) side[v] = static_cast<std::uint8_t>((mask >> v) & 1U);
  return side;
}

} // namespace

CutSolution max_cut_exact(const DistanceMatrix& D, unsigned threads) {
  const std::size_t n = D.size();
  if (n > kExactCutCap) throw std::length_error("exact Max-Cut is limited to 24 points");
  CutSolution sol;
  sol.side.assign(n, 0);
  if (n <= 1) return sol;

  const auto free_bits = static_cast<unsigned>(n - 1);
  const unsigned high_bits = threads == 1 ? 0U : std::min(free_bits, 6U);
  const std::size_t chunks = std::size_t{1} << high_bits;
  std::vector<ChunkBest> best(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) { best[c] = search_chunk(D, free_bits - high_bits, c); });

  ChunkBest top = best.front();
  for (const auto& b : best) {
    if (b.value > top.value) top = b;
  }
  sol.side = sides_of(top.mask, n);
  sol.value = cut_value(D, sol.side);
  return sol;
}

double max_cut_exact(const PointSet& X, double norm_p) { return max_cut_exact(distance_matrix(X, norm_p)).value; }

double max_cut_exact(const PointWeightedSet& S, double norm_p) {
  return max_cut_exact(distance_matrix(S, norm_p)).value;
}

CutSolution max_cut_local_search(const DistanceMatrix& D, unsigned restarts, std::uint64_t seed) {
  const std::size_t n = D.size();
  CutSolution best;
  best.exact = false;
  best.side.assign(n, 0);
  if (n <= 1) return best;
  SplitMix64 rng(mix64(seed));
  for (unsigned r = 0; r < std::max(1U, restarts); ++r) {
    std::vector<double> sigma(n);
    for (auto& x : sigma) x = (rng() & 1U) ? -1.0 : 1.0;
    std::vector<double> s(n, 0.0);
    double cut = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        s[v] += D(v, u) * sigma[u];
        if (u > v && sigma[u] != sigma[v]) cut += D(v, u);
      }
    }
    for (;;) {
      std::size_t pick = n;
      double gain = 1e-12 * std::max(1.0, std::abs(cut));
      for (std::size_t v = 0; v < n; ++v) {
        if (sigma[v] * s[v] > gain) {
          gain = sigma[v] * s[v];
          pick = v;
        }
      }
      if (pick == n) break;
      cut += gain;
      for (std::size_t u = 0; u < n; ++u) s[u] -= 2.0 * sigma[pick] * D(u, pick);
      sigma[pick] = -sigma[pick];
    }
    std::vector<std::uint8_t> side(n);
    for (std::size_t v = 0; v < n; ++v) side[v] = sigma[v] < 0 ? 1 : 0;
    const double value = cut_value(D, side);
    if (value > best.value) {
      best.value = value;
      best.side = std::move(side);
    }
  }
  return best;
}

double offline_estimate(const PointSet& X, const std::vector<double>& prob, std::size_t m, std::uint64_t seed,
                        double norm_p) {
  if (prob.size() != X.size() || X.empty()) throw std::invalid_argument("need one probability per point");
  std::vector<double> cdf(prob.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] >= 0)) throw std::invalid_argument("probabilities must be nonnegative");
    acc += prob[i];
    cdf[i] = acc;
  }
  if (!(acc > 0)) throw std::invalid_argument("probabilities sum to zero");
  SplitMix64 rng(mix64(seed));
  PointWeightedSet S;
  for (std::size_t t = 0; t < m; ++t) {
    const double u = rng.uniform() * acc;
    auto i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    i = std::min(i, X.size() - 1);
    while (prob[i] <= 0) --i;
    S.push_back({X[i], prob[i] / acc});
  }
  return max_cut_exact(distance_matrix(S, norm_p)).value / static_cast<double>(m * m);
}

EstimateResult estimate_max_cut(std::span<const StreamUpdate> stream, const EstimateOptions& opt) {
  const SamplerConfig& cfg = opt.sampler;
  cfg.validate();
  if (opt.m < 2) throw std::invalid_argument("m must be at least 2");
  if (opt.m > kExactCutCap && !opt.allow_local_search) {
    throw std::invalid_argument("m above the exact Max-Cut cap needs the local-search fallback");
  }
  const ShiftVector shift = init_shift(cfg);
  const std::size_t m = opt.m;
  const std::size_t budget = 2 * m;

  EstimateResult res;
  std::vector<std::uint64_t> words(budget, 0);
  auto run_copies = [&](std::size_t first, std::size_t count) {
    res.copies.resize(first + count);
    parallel_for(count, opt.threads, [&](std::size_t j) {
      const std::size_t c = first + j;
      ImportanceSampler s(cfg, shift, run_seed(cfg, c));
      for (const auto& u : stream) s.update(u);
      res.copies[c] = s.finalize();
      words[c] = s.counter_count();
    });
  };

  run_copies(0, m);
  res.counter_words = words[0];
  const auto too_few = std::count_if(res.copies.begin(), res.copies.end(),
                                     [](const SampleOutcome& o) { return o.status == "too_few_points"; });
  if (2 * static_cast<std::size_t>(too_few) > m) return res; // fewer than two points: Max-Cut is 0

  auto accepted = [&] {
    return static_cast<std::size_t>(
        std::count_if(res.copies.begin(), res.copies.end(), [](const SampleOutcome& o) { return o.z.has_value(); }));
  };
  for (std::size_t have = accepted(); have < m && res.copies.size() < budget; have = accepted()) {
    run_copies(res.copies.size(), std::min(m - have, budget - res.copies.size()));
  }
  for (const auto& o : res.copies) {
    if (o.z && res.samples.size() < m) res.samples.push_back({*o.z, o.p});
  }
  if (res.samples.size() < m) {
    res.status = "insufficient_samples";
    res.samples.clear();
    return res;
  }

  const DistanceMatrix D = distance_matrix(res.samples, cfg.grid.norm_p());
  CutSolution cut;
  if (m <= kExactCutCap) {
    cut = max_cut_exact(D, opt.threads);
  } else {
    cut = max_cut_local_search(D, 20, cfg.seed);
  }
  res.exact = cut.exact;
  res.eta = cut.value / static_cast<double>(m * m);
  return res;
}

} // namespace geocut
