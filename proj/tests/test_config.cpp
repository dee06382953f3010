#include <catch_amalgamated.hpp>

#include "rana/config.hpp"
#include "rana/experiment.hpp"
#include "support.hpp"

using namespace rana;

TEST_CASE("parses scalars, sections and lists", "[config]") {
  const auto f = ConfigFile::parse(R"(# experiment
budget = 50   # queries
alpha = 0.9
model = "final_lite"
prior_exclusive = false
seeds = [1, 2, 3]

[dataset]
nodes = 120

[sweep]
strategy = ["rana", "entropy"]
)");
  CHECK(f.get_int("budget") == 50);
  CHECK(f.get_double("alpha") == 0.9);
  CHECK(f.get_string("model") == "final_lite");
  CHECK_FALSE(f.get_bool("prior_exclusive"));
  CHECK(f.get_ints("seeds") == std::vector<long long>{1, 2, 3});
  CHECK(f.get_int("dataset.nodes") == 120);
  CHECK(f.items("sweep.strategy") == std::vector<std::string>{"rana", "entropy"});
  CHECK(f.has("dataset.nodes"));
  CHECK_FALSE(f.has("nodes"));
}

TEST_CASE("malformed configs are rejected", "[config]") {
  CHECK_THROWS_AS(ConfigFile::parse("budget"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[dataset\nnodes = 3"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("a = [1, 2"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("a = \"open"), ConfigError);
  const auto f = ConfigFile::parse("a = x\nb = 1.5\nc = maybe");
  CHECK_THROWS_AS(f.get_double("a"), ConfigError);
  CHECK_THROWS_AS(f.get_int("b"), ConfigError);
  CHECK_THROWS_AS(f.get_bool("c"), ConfigError);
  CHECK_THROWS_AS(f.get_string("missing"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::load("/nonexistent/rana.toml"), ConfigError);
}

TEST_CASE("experiment config reads known keys and keeps defaults", "[config]") {
  TempFile file("budget = 40\nbatch = 4\nstrategy = \"margin\"\nseeds = [7]\n[dataset]\nnodes = 80\n");
  const auto c = experiment_config_from(ConfigFile::load(file.path()));
  CHECK(c.budget == 40);
  CHECK(c.batch == 4);
  CHECK(c.strategy == Strategy::margin);
  CHECK(c.seeds == std::vector<std::uint64_t>{7});
  CHECK(c.dataset.nodes == 80);
  CHECK(c.alpha == 0.8);
  CHECK(c.theta == 0.05);
  CHECK(c.gamma == 0.01);
  CHECK(c.training_rate == 0.1);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("unknown keys and bad values name the problem", "[config]") {
  CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse("budgett = 3")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse("strategy = \"bald\"")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse("prior = \"flat\"")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse("seeds = [-1]")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from(ConfigFile::parse("budget = 99999999999")), ConfigError);
  try {
    experiment_config_from(ConfigFile::parse("budgett = 3"));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("budgett") != std::string::npos);
  }
}

TEST_CASE("validation catches out-of-range settings", "[config]") {
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](auto& c) { c.training_rate = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.alpha = 1.2; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.batch = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.gamma = 0.9; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.damping = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.seeds.clear(); }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& c) { c.dataset.kind = DatasetConfig::Kind::files; }).validate(), ConfigError);
  CHECK_NOTHROW(bad([](auto& c) { c.budget = 0; }).validate());
}

TEST_CASE("sweep axes parse", "[config]") {
  const auto g = sweep_grid_from(ConfigFile::parse(
      "[sweep]\nnoise_ratio = [0.0, 0.25]\nstrategy = [\"rana\", \"random\"]\nbudget = [10, 20]\nmodel = [\"isorank\"]"));
  CHECK(g.noise_ratio == std::vector<double>{0.0, 0.25});
  CHECK(g.strategy == std::vector<Strategy>{Strategy::rana, Strategy::random});
  CHECK(g.budget == std::vector<int>{10, 20});
  CHECK(g.model == std::vector<ModelKind>{ModelKind::isorank});
  CHECK(g.alpha.empty());
  CHECK_THROWS_AS(sweep_grid_from(ConfigFile::parse("[sweep]\nstrategy = [\"nope\"]")), ConfigError);
}
