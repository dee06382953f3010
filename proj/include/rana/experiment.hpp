#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rana/alignment.hpp"
#include "rana/config.hpp"
#include "rana/denoising.hpp"
#include "rana/evaluation.hpp"
#include "rana/graph.hpp"
#include "rana/influence.hpp"
#include "rana/oracle.hpp"
#include "rana/random.hpp"
#include "rana/selection.hpp"

namespace rana {

struct DatasetConfig {
  enum class Kind { synthetic, files };
  Kind kind = Kind::synthetic;
  // synthetic
  NodeId nodes = 200;
  double density = 0.05;
  Eigen::Index attr_dim = 16;
  double smoothing = 1.0;
  // files
  std::string source_edges;
  std::string target_edges;
  std::string groundtruth;
  std::string source_attributes;
  std::string target_attributes;
};

struct ExperimentConfig {
  DatasetConfig dataset;

  ModelKind model = ModelKind::isorank;
  double damping = 0.85;
  int max_iters = 100;
  double tol = 1e-6;
  PriorBackground prior = PriorBackground::degree_similarity;
  double prior_weight = 3.0;
  bool prior_exclusive = true;

  double training_rate = 0.1;
  int budget = 100;
  int batch = 10;
  double alpha = 0.8;
  double theta = 0.05;
  double gamma = 0.01;
  int influence_k = 2;
  double influence_eps = 1e-4;
  int cand_k = 5;
  double edge_noise_ratio = 0.1;
  Strategy strategy = Strategy::rana;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output;
  /// Hard stop on selection rounds, for runs where model labels keep the
  /// budget from being spent.
  int max_rounds = 200;

  AlignerConfig aligner() const { return {damping, max_iters, tol, model}; }
  PriorConfig prior_config() const { return {prior, prior_weight, prior_exclusive}; }
  SelectionConfig selection() const { return {theta, gamma, budget, batch, cand_k, alpha}; }

  void validate() const {
    if (!(training_rate > 0.0 && training_rate < 1.0)) throw ConfigError("training_rate must lie in (0, 1)");
    if (!(edge_noise_ratio >= 0.0 && edge_noise_ratio <= 1.0)) throw ConfigError("edge_noise_ratio must lie in [0, 1]");
    if (influence_k < 0) throw ConfigError("influence_k must be >= 0");
    if (!(influence_eps >= 0.0)) throw ConfigError("influence_eps must be >= 0");
    if (!(prior_weight > 0.0)) throw ConfigError("prior_weight must be > 0");
    if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (dataset.kind == DatasetConfig::Kind::synthetic) {
      if (dataset.nodes < 2) throw ConfigError("dataset.nodes must be >= 2");
      if (!(dataset.density > 0.0 && dataset.density < 1.0)) throw ConfigError("dataset.density must lie in (0, 1)");
    } else if (dataset.source_edges.empty() || dataset.target_edges.empty() || dataset.groundtruth.empty()) {
      throw ConfigError("file datasets need source_edges, target_edges and groundtruth");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    try {
      aligner().validate();
      selection().validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
};

/// Cross-product axes for a sweep; an empty axis uses the base value.
struct SweepGrid {
  std::vector<double> training_rate;
  std::vector<int> budget;
  std::vector<double> alpha;
  std::vector<double> noise_ratio;
  std::vector<Strategy> strategy;
  std::vector<ModelKind> model;
};

namespace detail {

inline PriorBackground parse_prior(const std::string& s) {
  if (s == "uniform") return PriorBackground::uniform;
  if (s == "degree") return PriorBackground::degree_similarity;
  throw ConfigError("unknown prior '" + s + "' (expected uniform or degree)");
}

template <typename T>
T checked_int(long long v, const char* key) {
  if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
    throw ConfigError(std::string("value of '") + key + "' out of range");
  }
  return static_cast<T>(v);
}

}  // namespace detail

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "model", "damping", "max_iters", "tol", "prior", "prior_weight", "prior_exclusive", "training_rate", "budget",
      "batch", "alpha", "theta", "gamma", "influence_k", "influence_eps", "cand_k", "edge_noise_ratio", "strategy",
      "seeds", "output", "max_rounds", "dataset.kind", "dataset.nodes", "dataset.density", "dataset.attr_dim",
      "dataset.smoothing", "dataset.source_edges", "dataset.target_edges", "dataset.groundtruth",
      "dataset.source_attributes", "dataset.target_attributes", "sweep.training_rate", "sweep.budget", "sweep.alpha",
      "sweep.noise_ratio", "sweep.strategy", "sweep.model"};
  return keys;
}

/// Reads an experiment config; keys not present keep their defaults.
inline ExperimentConfig experiment_config_from(const ConfigFile& f) {
  f.require_known(known_config_keys());
  ExperimentConfig c;
  try {
    if (f.has("model")) c.model = parse_model_kind(f.get_string("model"));
    if (f.has("strategy")) c.strategy = parse_strategy(f.get_string("strategy"));
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (f.has("damping")) c.damping = f.get_double("damping");
  if (f.has("max_iters")) c.max_iters = detail::checked_int<int>(f.get_int("max_iters"), "max_iters");
  if (f.has("tol")) c.tol = f.get_double("tol");
  if (f.has("prior")) c.prior = detail::parse_prior(f.get_string("prior"));
  if (f.has("prior_weight")) c.prior_weight = f.get_double("prior_weight");
  if (f.has("prior_exclusive")) c.prior_exclusive = f.get_bool("prior_exclusive");
  if (f.has("training_rate")) c.training_rate = f.get_double("training_rate");
  if (f.has("budget")) c.budget = detail::checked_int<int>(f.get_int("budget"), "budget");
  if (f.has("batch")) c.batch = detail::checked_int<int>(f.get_int("batch"), "batch");
  if (f.has("alpha")) c.alpha = f.get_double("alpha");
  if (f.has("theta")) c.theta = f.get_double("theta");
  if (f.has("gamma")) c.gamma = f.get_double("gamma");
  if (f.has("influence_k")) c.influence_k = detail::checked_int<int>(f.get_int("influence_k"), "influence_k");
  if (f.has("influence_eps")) c.influence_eps = f.get_double("influence_eps");
  if (f.has("cand_k")) c.cand_k = detail::checked_int<int>(f.get_int("cand_k"), "cand_k");
  if (f.has("edge_noise_ratio")) c.edge_noise_ratio = f.get_double("edge_noise_ratio");
  if (f.has("output")) c.output = f.get_string("output");
  if (f.has("max_rounds")) c.max_rounds = detail::checked_int<int>(f.get_int("max_rounds"), "max_rounds");
  if (f.has("seeds")) {
    c.seeds.clear();
    for (auto s : f.get_ints("seeds")) {
      if (s < 0) throw ConfigError("seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (f.has("dataset.kind")) {
    const auto kind = f.get_string("dataset.kind");
    if (kind == "synthetic") {
      c.dataset.kind = DatasetConfig::Kind::synthetic;
    } else if (kind == "files") {
      c.dataset.kind = DatasetConfig::Kind::files;
    } else {
      throw ConfigError("dataset.kind must be synthetic or files");
    }
  }
  if (f.has("dataset.nodes")) c.dataset.nodes = detail::checked_int<NodeId>(f.get_int("dataset.nodes"), "dataset.nodes");
  if (f.has("dataset.density")) c.dataset.density = f.get_double("dataset.density");
  if (f.has("dataset.attr_dim")) {
    c.dataset.attr_dim = detail::checked_int<Eigen::Index>(f.get_int("dataset.attr_dim"), "dataset.attr_dim");
  }
  if (f.has("dataset.smoothing")) c.dataset.smoothing = f.get_double("dataset.smoothing");
  if (f.has("dataset.source_edges")) c.dataset.source_edges = f.get_string("dataset.source_edges");
  if (f.has("dataset.target_edges")) c.dataset.target_edges = f.get_string("dataset.target_edges");
  if (f.has("dataset.groundtruth")) c.dataset.groundtruth = f.get_string("dataset.groundtruth");
  if (f.has("dataset.source_attributes")) c.dataset.source_attributes = f.get_string("dataset.source_attributes");
  if (f.has("dataset.target_attributes")) c.dataset.target_attributes = f.get_string("dataset.target_attributes");
  return c;
}

inline SweepGrid sweep_grid_from(const ConfigFile& f) {
  SweepGrid g;
  if (f.has("sweep.training_rate")) g.training_rate = f.get_doubles("sweep.training_rate");
  if (f.has("sweep.alpha")) g.alpha = f.get_doubles("sweep.alpha");
  if (f.has("sweep.noise_ratio")) g.noise_ratio = f.get_doubles("sweep.noise_ratio");
  if (f.has("sweep.budget")) {
    for (auto b : f.get_ints("sweep.budget")) g.budget.push_back(detail::checked_int<int>(b, "sweep.budget"));
  }
  try {
    if (f.has("sweep.strategy")) {
      for (const auto& s : f.items("sweep.strategy")) g.strategy.push_back(parse_strategy(s));
    }
    if (f.has("sweep.model")) {
      for (const auto& s : f.items("sweep.model")) g.model.push_back(parse_model_kind(s));
    }
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return g;
}

/// Seed streams of one run. Graph structure, noise, anchor sampling, the
/// oracle and baseline randomness each get their own stream so that one axis
/// can change without reshuffling the others.
enum class SeedStream : std::uint64_t { graph = 1, noise = 2, anchors = 3, oracle = 4, baseline = 5 };

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

/// The network pair for one run, with a training_rate share of groundtruth
/// drawn as anchors.
inline NetworkPair prepare_pair(const ExperimentConfig& cfg, std::uint64_t seed) {
  const NoiseSpec noise(cfg.edge_noise_ratio, stream_seed(seed, SeedStream::noise));
  NetworkPair pair = [&] {
    if (cfg.dataset.kind == DatasetConfig::Kind::synthetic) {
      return synthesize_pair(cfg.dataset.nodes, cfg.dataset.density, stream_seed(seed, SeedStream::graph), noise,
                             {cfg.dataset.attr_dim, cfg.dataset.smoothing});
    }
    Graph source = load_edge_list(cfg.dataset.source_edges);
    Graph target = load_edge_list(cfg.dataset.target_edges);
    auto truth = load_pairs(cfg.dataset.groundtruth);
    NodeId ns = source.node_count(), nt = target.node_count();
    for (const auto& p : truth) {
      ns = std::max(ns, p.source + 1);
      nt = std::max(nt, p.target + 1);
    }
    auto pad = [](const Graph& g, NodeId n) {
      if (g.node_count() == n) return g;
      auto edges = g.edges();
      return Graph::from_edges(n, edges);
    };
    source = pad(source, ns);
    target = pad(target, nt);
    if (!cfg.dataset.source_attributes.empty()) source = load_attributes(cfg.dataset.source_attributes, source);
    if (!cfg.dataset.target_attributes.empty()) target = load_attributes(cfg.dataset.target_attributes, target);
    target = inject_structural_noise(target, noise);
    return NetworkPair(std::move(source), std::move(target), std::move(truth));
  }();

  const auto& truth = pair.groundtruth();
  const auto want = static_cast<std::uint64_t>(std::llround(cfg.training_rate * static_cast<double>(truth.size())));
  Rng rng(stream_seed(seed, SeedStream::anchors));
  std::vector<NodePair> anchors;
  for (auto k : rng.sample(truth.size(), std::max<std::uint64_t>(1, want))) anchors.push_back(truth[k]);
  std::sort(anchors.begin(), anchors.end());
  pair.set_anchors(std::move(anchors));
  return pair;
}

struct RunRow {
  int iteration = 0;
  int labeled_count = 0;
  int oracle_queries = 0;
  int model_labels = 0;
  int twin_queries = 0;
  double acc1 = 0.0;
  double acc5 = 0.0;
  double acc10 = 0.0;
  double map = 0.0;
};

/// Label quality of pairs fused in the moderate band.
struct FusionAudit {
  int moderate_fusions = 0;
  int moderate_errors = 0;      // fused label wrong
  int moderate_raw_errors = 0;  // oracle's own answer wrong
};

struct RunLog {
  std::vector<RunRow> rows;
  FusionAudit audit;
  std::vector<LabeledPair> labels;
  int unconverged_fits = 0;
  const RunRow& final_row() const { return rows.back(); }
};

/// Positives and negatives for refitting. Anchors come first; a later
/// positive for a source that already has one is left out.
inline Supervision run_supervision(const NetworkPair& pair, std::span<const LabeledPair> labels) {
  Supervision sup;
  std::map<NodeId, NodeId> claimed;
  for (const auto& a : pair.anchors()) {
    claimed.emplace(a.source, a.target);
    sup.positives.push_back(a);
  }
  for (const auto& l : labels) {
    if (l.positive()) {
      if (claimed.emplace(l.pair.source, l.pair.target).second) sup.positives.push_back(l.pair);
    } else {
      auto it = claimed.find(l.pair.source);
      if (it == claimed.end() || it->second != l.pair.target) sup.negatives.push_back(l.pair);
    }
  }
  std::sort(sup.positives.begin(), sup.positives.end());
  std::sort(sup.negatives.begin(), sup.negatives.end());
  sup.negatives.erase(std::unique(sup.negatives.begin(), sup.negatives.end()), sup.negatives.end());
  return sup;
}

/// Per open source, its cand_k best unlabeled targets by score (ties to the
/// lower index).
inline CandidateSets candidate_targets(const Eigen::MatrixXd& s, const std::set<NodeId>& closed_sources,
                                       const std::set<NodePair>& labeled, int cand_k) {
  CandidateSets out(static_cast<std::size_t>(s.rows()));
  std::vector<NodeId> cols;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (closed_sources.contains(i)) continue;
    cols.clear();
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (!labeled.contains({i, j})) cols.push_back(j);
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(cand_k), cols.size());
    std::partial_sort(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(k), cols.end(),
                      [&](NodeId a, NodeId b) { return s(i, a) > s(i, b) || (s(i, a) == s(i, b) && a < b); });
    cols.resize(k);
    std::sort(cols.begin(), cols.end());
    out[static_cast<std::size_t>(i)] = cols;
  }
  return out;
}

/// Active-learning loop: fit, select a batch, label it, refit, until the
/// budget is spent or nothing is left to select. Row 0 is the initial model.
inline RunLog run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const NetworkPair pair = prepare_pair(cfg, seed);
  const auto aligner = cfg.aligner();
  const auto prior_cfg = cfg.prior_config();
  const auto scfg = cfg.selection();

  Eigen::MatrixXd similarity;
  if (cfg.model == ModelKind::final_lite) similarity = attribute_similarity(pair.source(), pair.target());

  RunLog log;
  Oracle oracle(pair, cfg.alpha, stream_seed(seed, SeedStream::oracle), cfg.budget);
  std::vector<LabeledPair>& labels = log.labels;
  std::set<NodePair> labeled;
  std::set<NodeId> closed;
  for (const auto& a : pair.anchors()) closed.insert(a.source);
  int model_labels = 0;
  int twin_queries = 0;

  auto fit = [&] {
    const auto sup = run_supervision(pair, labels);
    const auto prior = build_prior(pair, sup, prior_cfg);
    ModelState st = cfg.model == ModelKind::final_lite ? final_lite_align(pair, prior, aligner, similarity, sup)
                                                       : isorank_align(pair, prior, aligner, sup);
    if (!st.converged) ++log.unconverged_fits;
    return st;
  };
  auto record = [&](int iteration, const ModelState& st) {
    std::vector<NodePair> exclude = pair.anchors();
    for (const auto& l : labels) {
      if (l.positive()) exclude.push_back(l.pair);
    }
    const auto m = evaluate(st.scores, pair.groundtruth(), exclude);
    log.rows.push_back({iteration, static_cast<int>(labels.size()), oracle.queries_used(), model_labels, twin_queries,
                        m.acc_at.at(1), m.acc_at.at(5), m.acc_at.at(10), m.map_score});
  };

  ModelState state = fit();
  record(0, state);

  const bool rana = cfg.strategy == Strategy::rana;
  std::optional<InfluenceField> source_field, target_field;
  std::optional<TwinFeatures> twin_feat;
  std::vector<double> source_clean, target_clean;
  ActivationSet covered;
  if (rana && cfg.budget > 0) {
    source_field = compute_influence(pair.source(), cfg.influence_k, cfg.influence_eps);
    target_field = compute_influence(pair.target(), cfg.influence_k, cfg.influence_eps);
    twin_feat = TwinFeatures::from(pair);
    source_clean = node_cleanliness(pair.source());
    target_clean = node_cleanliness(pair.target());
    covered = ActivationSet(pair.source().node_count(), pair.target().node_count());
  }

  for (int round = 1; round <= cfg.max_rounds && oracle.queries_used() < cfg.budget; ++round) {
    const auto cand = candidate_targets(state.scores, closed, labeled, cfg.cand_k);
    state.prob = row_probabilities(state.scores, cand);
    std::vector<NodePair> pool_pairs;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      for (NodeId j : cand[i]) pool_pairs.push_back({static_cast<NodeId>(i), j});
    }
    if (pool_pairs.empty()) break;

    std::vector<LabeledPair> fresh;
    if (rana) {
      CandidatePool pool(pool_pairs);
      std::vector<CandidatePair> cands;
      cands.reserve(pool_pairs.size());
      for (const auto& p : pool_pairs) {
        CandidatePair c;
        c.i = p.source;
        c.j = p.target;
        c.cs = cleanliness_score(p.source, p.target, source_clean, target_clean);
        c.cm = model_confidence(state.acc, state.prob(p.source, p.target));
        c.sel_conf = selection_confidence(c, scfg);
        cands.push_back(c);
      }
      auto sel = greedy_select(cands, *source_field, *target_field, scfg, covered);
      covered = std::move(sel.covered);
      auto got = label_batch(sel.batch, state, oracle, scfg, pool, *twin_feat);
      model_labels += got.model_labels;
      twin_queries += got.twin_queries;
      fresh = std::move(got.labels);
    } else {
      const auto bb = baseline_select(cfg.strategy, state, pool_pairs, cfg.batch,
                                      derive_seed(stream_seed(seed, SeedStream::baseline), static_cast<std::uint64_t>(round)));
      for (const auto& p : bb.batch) {
        int y = 0;
        try {
          y = oracle.query(p.source, p.target);
        } catch (const BudgetExhausted&) {
          break;
        }
        fresh.push_back({p, y, Provenance::oracle, cfg.alpha, std::nullopt, std::nullopt});
      }
    }
    if (fresh.empty()) break;

    for (const auto& l : fresh) {
      labeled.insert(l.pair);
      if (l.positive()) closed.insert(l.pair.source);
      if (l.region == Region::moderate) {
        const int truth = pair.is_anchor_link(l.pair.source, l.pair.target) ? 1 : 0;
        ++log.audit.moderate_fusions;
        log.audit.moderate_errors += l.label != truth;
        log.audit.moderate_raw_errors += oracle.peek(l.pair.source, l.pair.target) != truth;
      }
      labels.push_back(l);
    }
    state = fit();
    record(round, state);
  }
  return log;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kRunCsvHeader =
    "iteration,labeled_count,oracle_queries,model_labels,twin_queries,acc1,acc5,acc10,map";

inline void write_run_csv(std::ostream& out, const RunLog& log) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : log.rows) {
    out << r.iteration << ',' << r.labeled_count << ',' << r.oracle_queries << ',' << r.model_labels << ','
        << r.twin_queries << ',' << detail::fixed6(r.acc1) << ',' << detail::fixed6(r.acc5) << ','
        << detail::fixed6(r.acc10) << ',' << detail::fixed6(r.map) << '\n';
  }
}

/// Whitespace-separated copy of the run table for gnuplot.
inline void write_run_dat(std::ostream& out, const RunLog& log) {
  out << "# iteration labeled_count oracle_queries model_labels twin_queries acc1 acc5 acc10 map\n";
  for (const auto& r : log.rows) {
    out << r.iteration << ' ' << r.labeled_count << ' ' << r.oracle_queries << ' ' << r.model_labels << ' '
        << r.twin_queries << ' ' << detail::fixed6(r.acc1) << ' ' << detail::fixed6(r.acc5) << ' '
        << detail::fixed6(r.acc10) << ' ' << detail::fixed6(r.map) << '\n';
  }
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for fewer than 2 values
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct SweepCell {
  ExperimentConfig cfg;
  std::vector<std::uint64_t> seeds;  // seeds that completed
  std::vector<RunLog> runs;
  std::vector<std::string> failures;  // "seed: message"

  std::vector<double> finals(double RunRow::*field) const {
    std::vector<double> out;
    for (const auto& r : runs) out.push_back(r.final_row().*field);
    return out;
  }
  FusionAudit audit() const {
    FusionAudit a;
    for (const auto& r : runs) {
      a.moderate_fusions += r.audit.moderate_fusions;
      a.moderate_errors += r.audit.moderate_errors;
      a.moderate_raw_errors += r.audit.moderate_raw_errors;
    }
    return a;
  }
};

/// Runs every grid cell over every seed. A failing run is recorded on its
/// cell and the sweep moves on.
inline std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const SweepGrid& grid) {
  auto axis = [](const auto& values, auto fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<SweepCell> cells;
  for (double rate : axis(grid.training_rate, base.training_rate)) {
    for (int budget : axis(grid.budget, base.budget)) {
      for (double alpha : axis(grid.alpha, base.alpha)) {
        for (double noise : axis(grid.noise_ratio, base.edge_noise_ratio)) {
          for (Strategy strategy : axis(grid.strategy, base.strategy)) {
            for (ModelKind model : axis(grid.model, base.model)) {
              SweepCell cell;
              cell.cfg = base;
              cell.cfg.training_rate = rate;
              cell.cfg.budget = budget;
              cell.cfg.alpha = alpha;
              cell.cfg.edge_noise_ratio = noise;
              cell.cfg.strategy = strategy;
              cell.cfg.model = model;
              for (auto seed : base.seeds) {
                try {
                  cell.runs.push_back(run_experiment(cell.cfg, seed));
                  cell.seeds.push_back(seed);
                } catch (const std::exception& e) {
                  cell.failures.push_back(std::to_string(seed) + ": " + e.what());
                }
              }
              cells.push_back(std::move(cell));
            }
          }
        }
      }
    }
  }
  return cells;
}

inline constexpr const char* kSweepCsvHeader =
    "training_rate,budget,alpha,noise_ratio,strategy,model,runs,failures,acc1_mean,acc1_std,acc5_mean,acc5_std,"
    "acc10_mean,acc10_std,map_mean,map_std,oracle_queries_mean,moderate_fusions,moderate_errors";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "# metrics are final-iteration values over groundtruth anchors that are neither training anchors nor "
         "actively labeled positives\n";
  out << "# budget counts every distinct oracle query, twin queries included\n";
  out << kSweepCsvHeader << '\n';
  for (const auto& c : cells) {
    const auto a1 = summarize(c.finals(&RunRow::acc1));
    const auto a5 = summarize(c.finals(&RunRow::acc5));
    const auto a10 = summarize(c.finals(&RunRow::acc10));
    const auto mp = summarize(c.finals(&RunRow::map));
    std::vector<double> q;
    for (const auto& r : c.runs) q.push_back(r.final_row().oracle_queries);
    const auto audit = c.audit();
    out << detail::fixed6(c.cfg.training_rate) << ',' << c.cfg.budget << ',' << detail::fixed6(c.cfg.alpha) << ','
        << detail::fixed6(c.cfg.edge_noise_ratio) << ',' << to_string(c.cfg.strategy) << ','
        << to_string(c.cfg.model) << ',' << c.runs.size() << ',' << c.failures.size() << ','
        << detail::fixed6(a1.mean) << ',' << detail::fixed6(a1.stddev) << ',' << detail::fixed6(a5.mean) << ','
        << detail::fixed6(a5.stddev) << ',' << detail::fixed6(a10.mean) << ',' << detail::fixed6(a10.stddev) << ','
        << detail::fixed6(mp.mean) << ',' << detail::fixed6(mp.stddev) << ',' << detail::fixed6(summarize(q).mean)
        << ',' << audit.moderate_fusions << ',' << audit.moderate_errors << '\n';
  }
}

}  // namespace rana
