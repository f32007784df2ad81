#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "geocut/core.hpp"
#include "geocut/generate.hpp"
#include "geocut/importance_sampler.hpp"
#include "geocut/jl.hpp"
#include "geocut/maxcut.hpp"
#include "geocut/oracle.hpp"
#include "geocut/parallel.hpp"
#include "geocut/verify.hpp"

using json = nlohmann::ordered_json;
using namespace geocut;

namespace {

struct Options {
  double epsilon = 0.2;
  double p = 2.0;
  std::uint64_t delta_side = 64;
  std::uint32_t dim = 2;
  std::size_t samples = 16;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::string input;
  std::string output;
  std::string format = "json";
  // gen / verify
  std::size_t n = 60;
  std::size_t clusters = 2;
  bool gaussian = false;
  std::string suite = "alg1";
  // estimate
  bool local_search = false;
  // jl
  double jl_delta = 0.1;
  std::size_t target_dim = 0;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GridConfig grid_of(const Options& o) { return GridConfig(o.delta_side, o.dim, o.p); }

SamplerConfig sampler_of(const Options& o) {
  SamplerConfig cfg;
  cfg.grid = grid_of(o);
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;
  return cfg;
}

json point_json(const Point& x) { return json(x.coords); }

json config_json(const Options& o) {
  return json{{"epsilon", o.epsilon}, {"p", o.p},         {"delta_side", o.delta_side},
              {"dim", o.dim},         {"samples", o.samples}, {"seed", o.seed},
              {"trials", o.trials},   {"input", o.input}};
}

json outcome_json(std::size_t copy, const SampleOutcome& s) {
  return json{{"copy", copy},   {"z", s.z ? point_json(*s.z) : json(nullptr)},
              {"p", s.p},       {"level", s.level},
              {"k", s.k},       {"ell", s.ell},
              {"status", s.status}};
}

std::string outcomes_csv(const std::vector<SampleOutcome>& outs) {
  std::ostringstream os;
  os.precision(17);
  os << "copy,z,p,level,k,ell,status\n";
  for (std::size_t c = 0; c < outs.size(); ++c) {
    const auto& s = outs[c];
    os << c << ',';
    if (s.z) {
      for (std::size_t j = 0; j < s.z->coords.size(); ++j) os << (j ? " " : "") << s.z->coords[j];
    }
    os << ',' << s.p << ',' << s.level << ',' << s.k << ',' << s.ell << ',' << s.status << '\n';
  }
  return os.str();
}

std::vector<StreamUpdate> read_input_stream(const Options& o, const GridConfig& g) {
  if (o.input.empty() || o.input == "-") return parse_stream(std::cin, g);
  return read_stream_file(o.input, g);
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + o.output);
  out << text;
}

void emit(const Options& o, const json& report, const std::string& csv = {}) {
  if (o.format == "csv") {
    if (csv.empty()) throw UsageError("this subcommand has no CSV form");
    emit(o, csv);
  } else {
    emit(o, report.dump(2) + "\n");
  }
}

int run_gen(const Options& o) {
  std::ostringstream os;
  if (o.gaussian) {
    os.precision(17);
    for (const auto& row : gaussian_rows(o.n, o.dim, o.seed)) {
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << row[j];
      os << '\n';
    }
  } else {
    const GridConfig g = grid_of(o);
    const auto inst = clustered_instance(g, o.n, o.clusters, o.seed);
    os << "# geocut gen: n=" << o.n << " clusters=" << o.clusters << " delta=" << o.delta_side << " dim=" << o.dim
       << " seed=" << o.seed << '\n';
    write_stream(os, insert_stream(inst.points));
  }
  emit(o, os.str());
  return 0;
}

json lambda_json(const PointSet& X, const PointWeightedSet& S, double p) {
  json lam{{"available", false}};
  if (X.size() < 2 || X.size() > 5000 || S.empty()) return lam;
  const auto q = oracle::exact_q(X, p);
  const double Q = oracle::exact_Q(X, p);
  std::map<Point, double> share;
  for (std::size_t i = 0; i < X.size(); ++i) share[X[i]] = q[i] / Q;
  double worst = 0.0;
  double sum = 0.0;
  for (const auto& s : S) {
    const double l = share.at(s.point) / s.weight; // p* >= q/(λQ) needs λ >= this
    worst = std::max(worst, l);
    sum += l;
  }
  lam = json{{"available", true}, {"max", worst}, {"mean", sum / static_cast<double>(S.size())}, {"Q", Q}};
  return lam;
}

int run_estimate(const Options& o) {
  EstimateOptions eo;
  eo.sampler = sampler_of(o);
  eo.m = o.samples;
  eo.allow_local_search = o.local_search;
  const auto stream = read_input_stream(o, eo.sampler.grid);
  const PointSet X = materialize(stream, eo.sampler.grid);
  const auto res = estimate_max_cut(stream, eo);

  json copies = json::array();
  for (std::size_t c = 0; c < res.copies.size(); ++c) copies.push_back(outcome_json(c, res.copies[c]));
  json report{{"command", "estimate"},
              {"config", config_json(o)},
              {"stream_updates", stream.size()},
              {"points", X.size()},
              {"eta", res.eta},
              {"status", res.status},
              {"max_cut_of_samples_exact", res.exact},
              {"copies", copies},
              {"lambda", lambda_json(X, res.samples, o.p)},
              {"space",
               {{"counter_words_per_copy", res.counter_words},
                {"copies_run", res.copies.size()},
                {"total_counter_words", res.counter_words * res.copies.size()}}}};
  emit(o, report, outcomes_csv(res.copies));
  return res.status == "ok" ? 0 : 3;
}

int run_sample(const Options& o) {
  const SamplerConfig cfg = sampler_of(o);
  const auto stream = read_input_stream(o, cfg.grid);
  const ShiftVector shift = init_shift(cfg);
  std::vector<SampleOutcome> outs(o.trials);
  std::vector<LevelProfile> profiles(o.trials);
  std::uint64_t words = 0;
  parallel_for(o.trials, 0, [&](std::size_t c) {
    ImportanceSampler s(cfg, shift, run_seed(cfg, c));
    for (const auto& u : stream) s.update(u);
    outs[c] = s.finalize();
    if (c == 0) {
      profiles[0] = s.profile();
      words = s.counter_count();
    }
  });
  json copies = json::array();
  for (std::size_t c = 0; c < outs.size(); ++c) copies.push_back(outcome_json(c, outs[c]));
  json profile;
  if (!outs.empty()) {
    const auto& pr = profiles[0];
    profile = json{{"n_hat", pr.n_hat},       {"pool_samples", pr.samples}, {"k", pr.k},
                   {"fraction", pr.fraction}, {"heavy_size", pr.heavy_size}, {"q_tilde", pr.q_tilde},
                   {"ext_size", pr.ext_size}, {"r", pr.r}};
  }
  json report{{"command", "sample"},
              {"config", config_json(o)},
              {"shift", shift.offsets},
              {"stream_updates", stream.size()},
              {"copy0_profile", profile},
              {"copies", copies},
              {"space", {{"counter_words_per_copy", words}}}};
  emit(o, report, outcomes_csv(outs));
  return 0;
}

int run_verify(const Options& o) {
  json report{{"command", "verify"}, {"suite", o.suite}, {"config", config_json(o)}};
  if (o.suite == "alg1") {
    const SamplerConfig cfg = sampler_of(o);
    PointSet X;
    if (!o.input.empty()) {
      X = materialize(read_input_stream(o, cfg.grid), cfg.grid);
    } else {
      X = clustered_instance(cfg.grid, o.n, o.clusters, o.seed).points;
    }
    const ShiftVector shift = init_shift(cfg);
    const auto chk = check_alg1_law(X, cfg, shift, o.trials);
    json pts = json::array();
    for (const auto& pt : chk.points) {
      pts.push_back({{"x", point_json(pt.x)},
                     {"q", pt.q},
                     {"exact", pt.exact},
                     {"empirical", pt.empirical},
                     {"mean_p", pt.mean_p}});
    }
    report["shift"] = shift.offsets;
    report["k_exact"] = chk.k_exact;
    report["bottoms"] = chk.bottoms;
    report["statuses"] = chk.statuses;
    report["tv"] = chk.tv;
    report["calibration_error"] = chk.calibration_error;
    report["dampening"] = chk.dampening;
    report["dampening_exact"] = chk.dampening_exact;
    report["dampening_bound"] = chk.dampening_bound;
    report["points"] = pts;
  } else if (o.suite == "tree-cost") {
    const auto chk = check_tree_cost_formula(o.trials, o.seed);
    report["instances"] = chk.instances;
    report["max_relative_error"] = chk.max_relative_error;
  } else if (o.suite == "invariants") {
    const auto chk = check_metric_invariants(o.trials, o.seed);
    report["instances"] = chk.instances;
    report["pair_violations"] = chk.pair_violations;
    report["cut_violations"] = chk.cut_violations;
    report["min_pair_slack"] = chk.min_pair_slack;
    report["min_cut_ratio"] = chk.min_cut_ratio;
  } else {
    throw UsageError("unknown suite '" + o.suite + "' (alg1, tree-cost, invariants)");
  }
  emit(o, report);
  return 0;
}

int run_jl(const Options& o) {
  std::vector<std::vector<double>> X;
  if (!o.input.empty()) {
    std::ifstream in(o.input);
    if (!in) throw std::runtime_error("cannot open input file " + o.input);
    X = parse_real_points(in);
  } else {
    X = gaussian_rows(o.n, o.dim, o.seed);
  }
  const std::size_t target = o.target_dim ? o.target_dim : jl_dimension(o.epsilon, o.jl_delta);
  const auto rep = verify_maxcut_preservation(X, target, o.trials, o.epsilon, o.seed);
  json report{{"command", "jl"},
              {"config", config_json(o)},
              {"jl_delta", o.jl_delta},
              {"points", X.size()},
              {"target_dim", rep.out_dim},
              {"max_cut_original", rep.max_cut_original},
              {"preserved_fraction", rep.preserved_fraction},
              {"distortion_fraction", rep.distortion_fraction},
              {"ratios", rep.ratios},
              {"distortion", rep.distortion}};
  emit(o, report);
  return 0;
}

json error_json(const std::string& type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming Max-Cut estimation for geometric point streams"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--epsilon", o.epsilon, "accuracy parameter")->capture_default_str();
    sub->add_option("--p", o.p, "norm exponent (>= 1)")->capture_default_str();
    sub->add_option("--delta-side", o.delta_side, "grid side Δ (power of two)")->capture_default_str();
    sub->add_option("--dim", o.dim, "dimension d")->capture_default_str();
    sub->add_option("--samples,--m", o.samples, "importance samples m")->capture_default_str();
    sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
    sub->add_option("--trials", o.trials, "trials or sampler copies")->capture_default_str();
    sub->add_option("--input", o.input, "input file (stream, or real rows for jl); '-' or empty reads stdin");
    sub->add_option("--output", o.output, "output file; stdout when empty");
    sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "write a synthetic clustered stream (or Gaussian rows)");
  common(gen);
  gen->add_option("--n", o.n, "number of points")->capture_default_str();
  gen->add_option("--clusters", o.clusters, "number of clusters")->capture_default_str();
  gen->add_flag("--gaussian", o.gaussian, "emit real-valued N(0,1) rows of dimension --dim instead");

  auto* estimate = app.add_subcommand("estimate", "estimate Max-Cut of the streamed point set");
  common(estimate);
  estimate->add_flag("--local-search", o.local_search, "allow m above the exact cap (non-certified Max-Cut)");

  auto* sample = app.add_subcommand("sample", "run --trials sampler copies and report (z*, p*)");
  common(sample);

  auto* verify = app.add_subcommand("verify", "oracle checks: alg1, tree-cost, invariants");
  common(verify);
  verify->add_option("--suite", o.suite, "check to run")->capture_default_str();
  verify->add_option("--n", o.n, "generated instance size (alg1 without --input)")->capture_default_str();
  verify->add_option("--clusters", o.clusters, "generated instance clusters")->capture_default_str();

  auto* jl = app.add_subcommand("jl", "check Max-Cut preservation under a Gaussian JL map");
  common(jl);
  jl->add_option("--n", o.n, "generated rows when no --input")->capture_default_str();
  jl->add_option("--jl-delta", o.jl_delta, "failure probability for the target dimension")->capture_default_str();
  jl->add_option("--target-dim", o.target_dim, "override d' (0: ceil(8·ε⁻²·ln(1/(εδ))))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_json("usage", e.what()).dump(2) << '\n';
    return 2;
  }

  try {
    if (*gen) return run_gen(o);
    if (*estimate) return run_estimate(o);
    if (*sample) return run_sample(o);
    if (*verify) return run_verify(o);
    if (*jl) return run_jl(o);
  } catch (const UsageError& e) {
    std::cout << error_json("usage", e.what()).dump(2) << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cout << error_json("out_of_range", e.what()).dump(2) << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cout << error_json("invalid_argument", e.what()).dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cout << error_json("runtime_error", e.what()).dump(2) << '\n';
    return 1;
  }
  return 2;
}
