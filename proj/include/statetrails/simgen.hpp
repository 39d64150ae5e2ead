#ifndef STATETRAILS_SIMGEN_HPP
#define STATETRAILS_SIMGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "statetrails/ingest.hpp"
#include "statetrails/textprep.hpp"
#include "statetrails/transitions.hpp"
#include "statetrails/types.hpp"

namespace statetrails {

struct ExposureRule {
  int conditioning = 0;
  ExposureKind kind = ExposureKind::kSingleInteraction;
  int from_state = 0;
  int to_state = 0;
  double probability = 0.0;  // boosted P(from -> to | exposed)
};

struct ThreadModel {
  int threads_per_month = 8;    // minimum filler thread count
  int comments_per_thread = 6;  // filler thread size cap (plus the post)
  double reply_depth_geom_p = 0.5;  // chance a filler comment nests deeper
};

struct SimConfig {
  int n_users = 100;
  int n_months = 12;
  int k_states = 4;
  std::uint64_t seed = 1;
  std::vector<FeatureVector> archetypes;  // defaults chosen when empty
  std::vector<std::vector<double>> baseline_transition;  // default: sticky
  std::vector<ExposureRule> exposure_rules;
  ThreadModel thread_model;
  double min_separation = 0.5;  // pairwise Euclidean distance of archetypes
  int tokens_per_doc = 30;
  std::int64_t corpus_start_utc = 1525132800;  // 2018-05-01T00:00:00Z

  static SimConfig from_json_file(const std::string& path);
  // Fills defaulted archetypes/baseline, then checks row-stochasticity,
  // archetype separation/representability and rule feasibility.
  void finalize();
};

struct GroundTruth {
  std::map<UserMonth, int> states;
  // (user, month, conditioning, kind): every realized exposure event
  std::vector<std::tuple<std::string, int, int, ExposureKind>> exposures;
  // (user, t, from, to, rule index or -1)
  std::vector<std::tuple<std::string, int, int, int, int>> transitions;
};

struct SimCorpus {
  std::vector<RawPost> posts;
  std::vector<RawComment> comments;
  GroundTruth truth;
};

// State vocabularies derived from the archetypes; every pool word carries
// all five lexicon annotations so documents recover the archetype in
// expectation. Emitted by `simulate` as the fixture lexicon TSVs.
LexiconStore build_sim_lexicons(const SimConfig& config);

// Byte-deterministic per seed. Thread wiring realizes rule exposures
// deterministically; next states follow the baseline row unless a matching
// rule fired for the user's realized exposure.
SimCorpus simulate(const SimConfig& config);

// Writes posts.ndjson, comments.ndjson, lexicons/, ground_truth/ and
// ready-to-run cleaning/pipeline config files under out_dir.
void write_sim_corpus(const SimCorpus& corpus, const SimConfig& config,
                      const std::string& out_dir);

GroundTruth read_ground_truth(const std::string& ground_dir);

struct RuleRecovery {
  std::size_t rule_index = 0;
  double planted = 0.0;
  double estimated = 0.0;
  double abs_error = 0.0;
  long long support = 0;
  bool keep_combined = false;
  bool verdict_found = false;
};

struct RecoveryReport {
  double rand_index = 0.0;
  std::size_t matched_pairs = 0;
  std::vector<int> label_to_state;  // pipeline label -> true state
  std::vector<RuleRecovery> rules;
  std::size_t nonplanted_cells = 0;
  std::size_t nonplanted_kept = 0;
  double false_positive_fraction = 0.0;
};

// Compares a pipeline run against the generator's ground truth: cluster
// recovery (Rand index under the best label matching), per-rule CTP error
// and null verdicts for planted vs non-planted cells. Throws when the user
// universes disagree.
RecoveryReport evaluate_recovery(const std::string& ground_dir,
                                 const std::string& run_dir,
                                 const SimConfig& config,
                                 const std::string& salt);

void write_recovery_report(const RecoveryReport& report,
                           const std::string& path);

}  // namespace statetrails

#endif
