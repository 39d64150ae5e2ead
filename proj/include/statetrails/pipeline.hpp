#ifndef STATETRAILS_PIPELINE_HPP
#define STATETRAILS_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "statetrails/ingest.hpp"
#include "statetrails/significance.hpp"
#include "statetrails/transitions.hpp"

namespace statetrails {

// configuration problems exit with code 2, stage failures with code 3
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
  explicit StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_name(stage) {}
  std::string stage_name;
};

struct PipelineConfig {
  std::string posts;
  std::string comments;
  std::string lexicons;
  std::string out_dir;
  CleaningConfig cleaning;

  int k = 4;
  bool auto_k = false;
  std::vector<int> ks = {2, 3, 4, 5, 6, 7, 8, 9, 10};

  std::vector<ExposureKind> exposure_kinds{kAllExposureKinds.begin(),
                                           kAllExposureKinds.end()};

  int n_replicates = 100;
  double alpha = 0.01;
  bool run_cluster_null = true;
  bool run_temporal_null = true;
  ZVariant z_variant = ZVariant::kPaper;
  ClusterShuffleScope cluster_shuffle = ClusterShuffleScope::kWithinMonth;

  bool persistence_filter_enabled = true;
  bool include_parent_in_context = true;
  double screen_p_threshold = 0.001;
  double screen_var_threshold = 1e-9;

  std::uint64_t master_seed = 0;
  std::string salt_env = "SALT";
  int jobs = 1;

  // relative paths resolve against the config file's directory
  static PipelineConfig from_json_file(const std::string& path);
  void validate() const;
  std::string salt() const;  // reads the configured environment variable
};

struct PipelineOutcome {
  std::string manifest_path;
  // stage -> artifact relative path -> sha256
  std::map<std::string, std::map<std::string, std::string>> artifacts;
};

// Individual stages; each reads its inputs from upstream artifacts in
// config.out_dir, so any stage can be rerun in isolation.
void run_stage_ingest(const PipelineConfig& config);
void run_stage_features(const PipelineConfig& config);
void run_stage_cluster(const PipelineConfig& config);
void run_stage_networks(const PipelineConfig& config);
void run_stage_transitions(const PipelineConfig& config);
void run_stage_nullcheck(const PipelineConfig& config);
void run_stage_report(const PipelineConfig& config);

// ingest -> features -> cluster -> networks -> transitions -> nullcheck ->
// report, then a manifest of every artifact with its content hash.
PipelineOutcome run_pipeline(const PipelineConfig& config);

}  // namespace statetrails

#endif
