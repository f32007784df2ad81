#include "geocut/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geocut::oracle {

void Thresholds::validate() const {
  if (!(sigma_minus > 0.5 && sigma_minus <= sigma_plus && sigma_plus <= 1.0)) {
    throw std::invalid_argument("thresholds need 0.5 < sigma- <= sigma+ <= 1");
  }
  if (!(tau > sigma_minus && tau < sigma_plus)) throw std::invalid_argument("tau must lie strictly between sigma- and sigma+");
}

std::vector<double> exact_q(const PointSet& X, double norm_p) {
  std::vector<double> q(X.size(), 0.0);
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = 0; b < X.size(); ++b) q[a] += lp_distance(X[a], X[b], norm_p);
  }
  return q;
}

double exact_Q(const PointSet& X, double norm_p) {
  double Q = 0.0;
  for (double v : exact_q(X, norm_p)) Q += v;
  return Q;
}

std::vector<std::int64_t> cell_of(const Point& x, std::uint32_t level, const ShiftVector& shift, const GridConfig& cfg) {
  const std::uint32_t leaf = cfg.depth() + 1;
  if (level < 1 || level > leaf) throw std::out_of_range("level outside [1, L+1]");
  if (x.coords.size() != cfg.dim() || shift.offsets.size() != cfg.dim()) throw std::invalid_argument("dimension mismatch");
  std::int64_t side = 2 * static_cast<std::int64_t>(cfg.delta());
  for (std::uint32_t i = 1; i < level; ++i) side /= 2;
  std::vector<std::int64_t> c(cfg.dim());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = (x.coords[j] + shift.offsets[j] - 2) / side;
  return c;
}

namespace {

double beta(std::uint32_t level, const GridConfig& cfg) {
  const std::uint32_t leaf = cfg.depth() + 1;
  return std::pow(static_cast<double>(cfg.dim()), 1.0 / cfg.norm_p()) * std::pow(2.0, static_cast<double>(leaf - level));
}

} // namespace

double tree_distance(const Point& x, const Point& y, const ShiftVector& shift, const GridConfig& cfg) {
  double d = 0.0;
  for (std::uint32_t i = cfg.depth() + 1; i >= 1; --i) {
    if (cell_of(x, i, shift, cfg) == cell_of(y, i, shift, cfg)) break;
    d += 2.0 * beta(i, cfg);
  }
  return d;
}

std::vector<double> exact_q_tree(const PointSet& X, const ShiftVector& shift, const GridConfig& cfg) {
  std::vector<double> q(X.size(), 0.0);
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b) {
      const double t = oracle::tree_distance(X[a], X[b], shift, cfg);
      q[a] += t;
      q[b] += t;
    }
  }
  return q;
}

ExactProfile exact_profile(const PointSet& X, const ShiftVector& shift, const GridConfig& cfg, const Thresholds& th) {
  th.validate();
  if (X.empty()) throw std::invalid_argument("exact_profile needs a nonempty set");
  for (const auto& x : X) validate_point(x, cfg);
  ExactProfile p;
  p.n = X.size();
  p.leaf_level = cfg.depth() + 1;
  const double n = static_cast<double>(p.n);

  p.q = exact_q(X, cfg.norm_p());
  for (double v : p.q) p.Q += v;
  p.q_tree = exact_q_tree(X, shift, cfg);
  for (double v : p.q_tree) p.Q_tree += v;

  p.heavy.assign(p.leaf_level + 1, {});
  p.heavy_count.assign(p.leaf_level + 1, 0);
  for (std::uint32_t i = 1; i <= p.leaf_level; ++i) {
    std::map<std::vector<std::int64_t>, std::size_t> counts;
    for (const auto& x : X) ++counts[cell_of(x, i, shift, cfg)];
    for (const auto& [cell, c] : counts) { // ordered: ties keep the smallest cell
      if (c > p.heavy_count[i]) {
        p.heavy_count[i] = c;
        p.heavy[i] = cell;
      }
    }
  }

  p.k = 1;
  for (std::uint32_t i = 1; i < p.leaf_level; ++i) {
    if (static_cast<double>(p.heavy_count[i]) >= th.tau * n) p.k = i;
  }

  p.q_tilde.assign(p.k + 1, 0.0);
  for (std::uint32_t i = 1; i <= p.k; ++i) {
    double s = n * beta(i, cfg);
    for (std::uint32_t j = 1; j <= i; ++j) s += beta(j, cfg) * (n - static_cast<double>(p.heavy_count[j]));
    p.q_tilde[i] = s;
  }

  p.ext_members.assign(p.k + 1, {});
  for (std::uint32_t i = 1; i <= p.k; ++i) {
    for (std::size_t a = 0; a < X.size(); ++a) {
      const bool member = i < p.k ? cell_of(X[a], i + 1, shift, cfg) != p.heavy[i + 1]
                                  : cell_of(X[a], p.k, shift, cfg) == p.heavy[p.k];
      if (member) p.ext_members[i].push_back(a);
    }
  }
  p.ext_size.assign(p.k + 1, 0);
  for (std::uint32_t i = 1; i <= p.k; ++i) p.ext_size[i] = p.ext_members[i].size();

  double denom = 0.0;
  for (std::uint32_t i = 1; i <= p.k; ++i) denom += static_cast<double>(p.ext_size[i]) * p.q_tilde[i];
  p.r.assign(p.k + 1, 0.0);
  for (std::uint32_t i = 1; i <= p.k; ++i) p.r[i] = static_cast<double>(p.ext_size[i]) * p.q_tilde[i] / denom;

  p.ell.assign(X.size(), 1);
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::uint32_t j = 1; j <= p.k; ++j) {
      if (cell_of(X[a], j, shift, cfg) == p.heavy[j]) p.ell[a] = j;
    }
  }

  // Law of total probability over the first stage; membership is checked directly.
  p.prob.assign(X.size(), 0.0);
  for (std::uint32_t i = 1; i <= p.k; ++i) {
    if (p.ext_size[i] == 0) continue;
    for (auto a : p.ext_members[i]) p.prob[a] += p.r[i] / static_cast<double>(p.ext_size[i]);
  }
  return p;
}

std::map<Point, double> exact_alg1_distribution(const PointSet& X, const ShiftVector& shift, const GridConfig& cfg,
                                                const Thresholds& th) {
  const auto prof = exact_profile(X, shift, cfg, th);
  std::map<Point, double> law;
  for (std::size_t a = 0; a < X.size(); ++a) law[X[a]] += prof.prob[a];
  return law;
}

std::size_t offline_alg1_draw(const ExactProfile& prof, SplitMix64& rng) {
  double u = rng.uniform();
  std::uint32_t i = prof.k;
  for (std::uint32_t j = 1; j <= prof.k; ++j) {
    if (u < prof.r[j]) {
      i = j;
      break;
    }
    u -= prof.r[j];
  }
  while (prof.ext_size[i] == 0) --i; // only reachable through rounding at the tail
  return prof.ext_members[i][rng.below(prof.ext_size[i])];
}

std::vector<std::uint32_t> critical_levels(const ExactProfile& prof, const Thresholds& th) {
  std::vector<std::uint32_t> out;
  const double n = static_cast<double>(prof.n);
  for (std::uint32_t i = 1; i < prof.leaf_level; ++i) {
    if (static_cast<double>(prof.heavy_count[i]) >= th.sigma_minus * n &&
        static_cast<double>(prof.heavy_count[i + 1]) <= th.sigma_plus * n) {
      out.push_back(i);
    }
  }
  return out;
}

double brute_force_max_cut(const PointSet& X, double norm_p) {
  const std::size_t n = X.size();
  if (n > 20) throw std::length_error("brute-force Max-Cut is limited to 20 points");
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double cut = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (((mask >> i) & 1U) && !((mask >> j) & 1U)) cut += lp_distance(X[i], X[j], norm_p);
      }
    }
    best = std::max(best, cut);
  }
  return best;
}

std::optional<double> separated_clusters_max_cut(const PointSet& A, const PointSet& B, double norm_p) {
  if (A.size() != B.size()) return std::nullopt;
  double intra = 0.0;
  for (const auto* C : {&A, &B}) {
    for (std::size_t i = 0; i < C->size(); ++i) {
      for (std::size_t j = i + 1; j < C->size(); ++j) intra = std::max(intra, lp_distance((*C)[i], (*C)[j], norm_p));
    }
  }
  double cross_min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& a : A) {
    for (const auto& b : B) {
      const double d = lp_distance(a, b, norm_p);
      cross_min = std::min(cross_min, d);
      total += d;
    }
  }
  if (!A.empty() && cross_min < intra) return std::nullopt;
  return total;
}

} // namespace geocut::oracle
