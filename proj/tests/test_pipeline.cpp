#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "statetrails/pipeline.hpp"
#include "statetrails/simgen.hpp"

using namespace statetrails;
namespace fs = std::filesystem;

namespace {

// a small planted corpus shared by the pipeline tests
struct SimFixture {
  testutil::TempDir dir{"pipefix"};
  SimConfig config;

  SimFixture() {
    config.n_users = 36;
    config.n_months = 6;
    config.k_states = 4;
    config.seed = 77;
    config.exposure_rules.push_back(
        {0, ExposureKind::kSingleInteraction, 2, 1, 0.8});
    config.finalize();
    write_sim_corpus(simulate(config), config, dir.str());
  }

  PipelineConfig pipeline(const std::string& out_dir, int n_replicates = 12) const {
    PipelineConfig cfg = PipelineConfig::from_json_file(
        dir.str("pipeline_config.json"));
    cfg.out_dir = out_dir;
    cfg.n_replicates = n_replicates;
    cfg.jobs = 2;
    return cfg;
  }
};

}  // namespace

TEST_CASE("full pipeline writes a manifest with all seven stage outputs") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out("piperun");
  const PipelineOutcome outcome = run_pipeline(fx.pipeline(out.str()));
  CHECK(fs::exists(outcome.manifest_path));
  REQUIRE(outcome.artifacts.size() == 7);
  for (const std::string stage :
       {"ingest", "features", "cluster", "networks", "transitions",
        "nullcheck", "report"}) {
    REQUIRE(outcome.artifacts.count(stage));
    CHECK(!outcome.artifacts.at(stage).empty());
  }
  CHECK(fs::exists(out.str() + "/ingest/documents.ndjson"));
  CHECK(fs::exists(out.str() + "/cluster/assignments.csv"));
  CHECK(fs::exists(out.str() + "/transitions/tp.csv"));
  CHECK(fs::exists(out.str() + "/nullcheck/verdicts.csv"));
  CHECK(fs::exists(out.str() + "/report/kept_transitions.csv"));
}

TEST_CASE("rerun with identical inputs and seed is byte-identical") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out_a("pipe_a");
  testutil::TempDir out_b("pipe_b");
  run_pipeline(fx.pipeline(out_a.str()));
  run_pipeline(fx.pipeline(out_b.str()));
  const std::string manifest_a = testutil::read_file(out_a.str() + "/manifest.json");
  const std::string manifest_b = testutil::read_file(out_b.str() + "/manifest.json");
  CHECK(manifest_a == manifest_b);
  CHECK(!manifest_a.empty());
}

TEST_CASE("a different master seed changes the manifest") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out_a("pipe_s1");
  testutil::TempDir out_b("pipe_s2");
  PipelineConfig cfg_a = fx.pipeline(out_a.str());
  PipelineConfig cfg_b = fx.pipeline(out_b.str());
  cfg_b.master_seed = cfg_a.master_seed + 1;
  run_pipeline(cfg_a);
  run_pipeline(cfg_b);
  CHECK(testutil::read_file(out_a.str() + "/manifest.json") !=
        testutil::read_file(out_b.str() + "/manifest.json"));
}

TEST_CASE("a missing lexicon directory fails naming the features stage") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out("pipelex");
  PipelineConfig cfg = fx.pipeline(out.str());
  cfg.lexicons = out.str() + "/no_such_dir";
  try {
    run_pipeline(cfg);
    FAIL("expected a stage failure");
  } catch (const StageError& e) {
    CHECK(e.stage_name == "features");
  }
}

TEST_CASE("a missing salt variable is a config error") {
  SimFixture fx;
  testutil::TempDir out("pipesalt");
  PipelineConfig cfg = fx.pipeline(out.str());
  cfg.salt_env = "STATETRAILS_UNSET_SALT_VAR";
  unsetenv("STATETRAILS_UNSET_SALT_VAR");
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
}

TEST_CASE("stages can be rerun in isolation with identical artifacts") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out("pipestage");
  const PipelineConfig cfg = fx.pipeline(out.str());
  run_pipeline(cfg);
  const std::string before =
      testutil::read_file(out.str() + "/cluster/assignments.csv");
  run_stage_cluster(cfg);
  CHECK(testutil::read_file(out.str() + "/cluster/assignments.csv") == before);
}

TEST_CASE("evaluate_recovery sees the planted effect end to end") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out("pipeeval");
  // more replicates here so the verdict on the planted cell is stable
  run_pipeline(fx.pipeline(out.str(), 60));
  const RecoveryReport report = evaluate_recovery(
      fx.dir.str("ground_truth"), out.str(), fx.config, "pipeline-test-salt");
  CHECK(report.rand_index >= 0.95);
  REQUIRE(report.rules.size() == 1);
  CHECK(report.rules[0].verdict_found);
  CHECK(report.rules[0].planted == 0.8);
  // 36 users x 6 months is small; allow generous sampling error
  CHECK(report.rules[0].abs_error < 0.15);
  testutil::TempDir rep("pipereport");
  write_recovery_report(report, rep.str("recovery.json"));
  CHECK(!testutil::read_file(rep.str("recovery.json")).empty());
}

TEST_CASE("evaluate_recovery rejects a mismatched user universe") {
  setenv("SALT", "pipeline-test-salt", 1);
  SimFixture fx;
  testutil::TempDir out("pipewrongsalt");
  run_pipeline(fx.pipeline(out.str()));
  // a different salt maps ground users to unknown pseudonyms
  CHECK_THROWS_WITH_AS(
      evaluate_recovery(fx.dir.str("ground_truth"), out.str(), fx.config,
                        "some-other-salt"),
      doctest::Contains("universe"), std::runtime_error);
}

TEST_CASE("pipeline config validation catches missing inputs") {
  SimFixture fx;
  PipelineConfig cfg = PipelineConfig::from_json_file(
      fx.dir.str("pipeline_config.json"));
  cfg.out_dir = fx.dir.str("out");
  cfg.posts = fx.dir.str("missing.ndjson");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config parsing resolves paths against the config directory") {
  SimFixture fx;
  const PipelineConfig cfg = PipelineConfig::from_json_file(
      fx.dir.str("pipeline_config.json"));
  CHECK(fs::path(cfg.posts).is_absolute());
  CHECK(fs::exists(cfg.posts));
  CHECK(fs::exists(cfg.comments));
  CHECK(fs::exists(cfg.lexicons));
  CHECK(cfg.k == 4);
  CHECK(cfg.master_seed == 77);
}
