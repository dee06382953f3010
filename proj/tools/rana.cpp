// Command-line driver: single runs, sweeps, and synthetic dataset export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rana/rana.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<int> budget;
  std::optional<int> batch;
  std::optional<double> alpha;
  std::optional<double> theta;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> model;
  std::optional<double> training_rate;
  std::optional<double> noise_ratio;
  std::string output;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "Config file (key = value, TOML subset)")->check(CLI::ExistingFile);
  cmd.add_option("--budget", o.budget, "Oracle query budget");
  cmd.add_option("--batch", o.batch, "Pairs selected per round");
  cmd.add_option("--alpha", o.alpha, "Oracle accuracy");
  cmd.add_option("--theta", o.theta, "Activation threshold");
  cmd.add_option("--gamma", o.gamma, "Minimum acceptable model confidence");
  cmd.add_option("--seed", o.seed, "Run seed (replaces the seed list)");
  cmd.add_option("--strategy", o.strategy, "rana, random, entropy, margin or least_confident");
  cmd.add_option("--model", o.model, "isorank or final_lite");
  cmd.add_option("--training-rate", o.training_rate, "Share of groundtruth given as anchors");
  cmd.add_option("--noise-ratio", o.noise_ratio, "Edge noise added to the target graph");
  cmd.add_option("--output", o.output, "Output CSV path (stdout if omitted)");
}

rana::ConfigFile load_config(const Overrides& o) {
  return o.config.empty() ? rana::ConfigFile{} : rana::ConfigFile::load(o.config);
}

rana::ExperimentConfig build_config(const rana::ConfigFile& file, const Overrides& o) {
  auto cfg = rana::experiment_config_from(file);
  if (o.budget) cfg.budget = *o.budget;
  if (o.batch) cfg.batch = *o.batch;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.theta) cfg.theta = *o.theta;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.strategy) cfg.strategy = rana::parse_strategy(*o.strategy);
  if (o.model) cfg.model = rana::parse_model_kind(*o.model);
  if (o.training_rate) cfg.training_rate = *o.training_rate;
  if (o.noise_ratio) cfg.edge_noise_ratio = *o.noise_ratio;
  if (!o.output.empty()) cfg.output = o.output;
  cfg.validate();
  return cfg;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw rana::Error("cannot write " + path);
  write(out);
  if (!out) throw rana::Error("write to " + path + " failed");
}

int cmd_run(const Overrides& o, const std::string& gnuplot) {
  const auto cfg = build_config(load_config(o), o);
  const auto log = rana::run_experiment(cfg, cfg.seeds.front());
  with_output(cfg.output, [&](std::ostream& out) { rana::write_run_csv(out, log); });
  if (!gnuplot.empty()) with_output(gnuplot, [&](std::ostream& out) { rana::write_run_dat(out, log); });
  if (log.unconverged_fits > 0) {
    std::cerr << "note: " << log.unconverged_fits << " aligner fit(s) stopped at max_iters\n";
  }
  return 0;
}

int cmd_sweep(const Overrides& o) {
  const auto file = load_config(o);
  const auto cfg = build_config(file, o);
  const auto grid = rana::sweep_grid_from(file);
  const auto cells = rana::run_sweep(cfg, grid);
  with_output(cfg.output, [&](std::ostream& out) { rana::write_sweep_csv(out, cells); });
  int failed = 0;
  for (const auto& c : cells) {
    for (const auto& f : c.failures) {
      std::cerr << "cell " << rana::to_string(c.cfg.strategy) << " noise=" << c.cfg.edge_noise_ratio
                << " alpha=" << c.cfg.alpha << " seed " << f << '\n';
      ++failed;
    }
  }
  return failed == 0 ? 0 : 2;
}

void write_pairs(const std::string& path, const std::vector<std::pair<rana::NodeId, rana::NodeId>>& rows) {
  with_output(path, [&](std::ostream& out) {
    for (auto [a, b] : rows) out << a << ' ' << b << '\n';
  });
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& x) {
  with_output(path, [&](std::ostream& out) {
    out.precision(17);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << x(r, c);
      out << '\n';
    }
  });
}

int cmd_synth(rana::NodeId nodes, double density, double noise, std::uint64_t seed, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto pair = rana::synthesize_pair(nodes, density, seed, rana::NoiseSpec(noise, rana::derive_seed(seed, 2)));
  const std::filesystem::path d(dir);
  write_pairs((d / "source.edges").string(), pair.source().edges());
  write_pairs((d / "target.edges").string(), pair.target().edges());
  std::vector<std::pair<rana::NodeId, rana::NodeId>> truth;
  for (const auto& p : pair.groundtruth()) truth.emplace_back(p.source, p.target);
  write_pairs((d / "groundtruth.txt").string(), truth);
  write_matrix((d / "source.csv").string(), pair.source().attributes());
  write_matrix((d / "target.csv").string(), pair.target().attributes());
  std::cout << "wrote " << nodes << "-node pair to " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for network alignment under a noisy oracle"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string gnuplot;
  auto* run = app.add_subcommand("run", "Run one experiment and write its per-iteration CSV");
  add_common(*run, run_o);
  run->add_option("--gnuplot", gnuplot, "Also write a whitespace-separated .dat file");

  Overrides sweep_o;
  auto* sweep = app.add_subcommand("sweep", "Run the [sweep] grid over all seeds and write aggregated CSV");
  add_common(*sweep, sweep_o);

  rana::NodeId nodes = 200;
  double density = 0.05, noise = 0.0;
  std::uint64_t synth_seed = 1;
  std::string dir;
  auto* synth = app.add_subcommand("synth", "Write a synthetic network pair as edge lists and attribute CSVs");
  synth->add_option("--nodes", nodes, "Node count")->check(CLI::PositiveNumber);
  synth->add_option("--density", density, "Edge probability");
  synth->add_option("--noise-ratio", noise, "Edge noise added to the target");
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--dir", dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o, gnuplot);
    if (*sweep) return cmd_sweep(sweep_o);
    if (*synth) return cmd_synth(nodes, density, noise, synth_seed, dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
