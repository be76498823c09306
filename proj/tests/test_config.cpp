#include <doctest.h>

#include "bnopt/config_file.hpp"
#include <nlohmann/json.hpp>

#include "bnopt/serialization.hpp"

using namespace bnopt;

namespace {

const char* kTreeConfig = R"(
# synthetic benchmark
[space]
quant x1 -10 10
quant lr 0.001 1 log10
branch z 1 2
nested v z 1 qual 1 2 3
nested v z 2 qual 1 2

[objective]
builtin bn2d
noise_sd 0.2

[run]
mode batch 5
n_init 10
n_adaptive 50
seed 42
out out/demo

[fit]
restarts 6
learn_noise on
matern_nu 3/2
sigma2_mode conservative

[acquisition]
epsilon 0.25
n_raw 64

[benchmark]
methods bn_sequential bn_batch:5 random_search
replicates 20
)";

}  // namespace

TEST_CASE("tree config parses every section") {
  RunConfig cfg = parse_config_text(kTreeConfig);
  REQUIRE(cfg.space.has_value());
  CHECK(cfg.space->quant().size() == 2);
  CHECK(cfg.space->quant()[1].scale == Scale::log10);
  CHECK(cfg.space->branch()[0].levels.size() == 2);
  CHECK(cfg.space->nested().size() == 2);
  CHECK(cfg.objective.kind == ObjectiveSpec::Kind::builtin);
  CHECK(cfg.objective.name == "bn2d");
  CHECK(cfg.objective.noise_sd == 0.2);
  CHECK(cfg.mode == RunMode::batch);
  CHECK(cfg.batch_size == 5);
  CHECK(cfg.n_init == 10);
  CHECK(cfg.n_adaptive == 50);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out_dir == "out/demo");
  CHECK(cfg.options.fit.restarts == 6);
  CHECK(cfg.options.fit.matern_nu == MaternNu::three_halves);
  CHECK(cfg.options.fit.sigma2_mode == Sigma2Mode::conservative);
  CHECK(cfg.options.acq.epsilon == 0.25);
  CHECK(cfg.options.acq.n_raw == 64);
  REQUIRE(cfg.bench_methods.size() == 3);
  CHECK(cfg.bench_methods[1].batch_size == 5);
  CHECK(cfg.replicates == 20);
}

TEST_CASE("config errors carry line numbers and field names") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config_text(text);
      FAIL_CHECK("expected ConfigError for: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("[space]\nquant x 5 1\n", "lower must be < upper");
  expect_error("[space]\nquant x -1 1 log10\n", "log10");
  expect_error("[space]\nbranch z a\n", "at least 2 levels");
  expect_error("[space]\nnested v z 1 qual 1 2\n", "unknown parent");
  expect_error("[run]\nmode turbo\n", "mode must be");
  expect_error("[run]\nn_init 1\n", "n_init");
  expect_error("[fit]\nrestarts zero\n", "integer");
  expect_error("[acquisition]\nepsilon 1.5\n", "epsilon");
  expect_error("[weird]\n", "unknown section");
  expect_error("quant x 0 1\n", "outside any section");
  expect_error("[benchmark]\nmethods simplex\n", "unknown method");

  try {
    parse_config_text("[space]\nquant ok 0 1\nquant bad 2 1\n");
    FAIL_CHECK("expected a line number");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("JSON config is accepted interchangeably") {
  const char* json = R"({
    "space": {
      "quant": [{"name": "x1", "lower": -10, "upper": 10}],
      "branch": [{"name": "z", "levels": ["1", "2"]}],
      "nested": [
        {"name": "v", "parent": "z", "parent_level": "1", "kind": "qualitative",
         "levels": ["1", "2", "3"]},
        {"name": "v", "parent": "z", "parent_level": "2", "kind": "qualitative",
         "levels": ["1", "2"]}
      ]
    },
    "objective": {"kind": "builtin", "name": "bn2d", "noise_sd": 0.2},
    "run": {"mode": "sequential", "n_init": 8, "n_adaptive": 20, "seed": 3, "out": "out/j"},
    "fit": {"restarts": 4, "matern_nu": "1/2"},
    "acquisition": {"epsilon": 0.05}
  })";
  RunConfig cfg = parse_config_text(json);
  CHECK(cfg.space->nested().size() == 2);
  CHECK(cfg.objective.name == "bn2d");
  CHECK(cfg.n_init == 8);
  CHECK(cfg.options.fit.restarts == 4);
  CHECK(cfg.options.fit.matern_nu == MaternNu::half);
  CHECK(cfg.options.acq.epsilon == 0.05);

  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
}

TEST_CASE("builtin objectives provide a default space") {
  RunConfig cfg = parse_config_text("[objective]\nbuiltin bn2d\n");
  SearchSpace space = cfg.resolved_space();
  CHECK(space.quant().size() == 2);
  CHECK(space.nested().size() == 2);

  RunConfig ext = parse_config_text("[objective]\nexternal\n");
  CHECK_THROWS_AS(ext.resolved_space(), ConfigError);
}

TEST_CASE("study state round-trips through its JSON document") {
  RunConfig cfg = parse_config_text(kTreeConfig);
  StudyState st;
  st.space = *cfg.space;
  st.objective = cfg.objective;
  st.options = cfg.options;
  st.mode = cfg.mode;
  st.batch_size = cfg.batch_size;
  st.n_init = 4;
  st.n_adaptive = 6;
  st.seed = 42;
  st.event_counter = 3;
  st.generation = 1;
  Configuration c;
  c.quant_values = {{"x1", 1.5}, {"lr", 0.01}};
  c.branch_values = {{"z", "1"}};
  c.nested_values = {{"v", std::string("2")}};
  st.observations.push_back({c, 1.25, 0, "init", true});
  st.observations.push_back({c, std::numeric_limits<double>::quiet_NaN(), 0, "init", false});
  st.best_so_far = {1.25, 1.25};
  st.pending.push_back({"t1-2-abc", c, "ei", std::nullopt});

  Json j = study_to_json(st);
  StudyState back = study_from_json(j);
  CHECK(study_to_json(back) == j);
  CHECK(back.observations.size() == 2);
  CHECK(back.observations[0].config == c);
  CHECK(!back.observations[1].ok);
  CHECK(std::isnan(back.observations[1].y));
  CHECK(back.pending[0].token == "t1-2-abc");

  Json bad = j;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(study_from_json(bad), std::invalid_argument);
}
