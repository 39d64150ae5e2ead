#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "statetrails/clustering.hpp"
#include "statetrails/ingest.hpp"
#include "statetrails/networks.hpp"
#include "statetrails/pipeline.hpp"
#include "statetrails/profiling.hpp"
#include "statetrails/random.hpp"
#include "statetrails/report.hpp"
#include "statetrails/significance.hpp"
#include "statetrails/simgen.hpp"
#include "statetrails/textprep.hpp"
#include "statetrails/transitions.hpp"

namespace fs = std::filesystem;
using namespace statetrails;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

std::string salt_from_env(const std::string& var) {
  const char* value = std::getenv(var.c_str());
  if (!value || !*value) {
    throw ConfigError("salt environment variable is empty or unset: " + var);
  }
  return value;
}

std::vector<ExposureKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ExposureKind> kinds;
  if (names.empty()) {
    kinds.assign(kAllExposureKinds.begin(), kAllExposureKinds.end());
  } else {
    for (const auto& name : names) kinds.push_back(exposure_kind_from_name(name));
  }
  return kinds;
}

int infer_k(const LabelMap& labels) {
  int k = 0;
  for (const auto& [key, label] : labels.entries()) k = std::max(k, label + 1);
  return k;
}

struct IngestArgs {
  std::string posts, comments, salt_env = "SALT", config, out_dir = ".";
};

struct FeaturesArgs {
  std::string docs, lexicons, out = ".";
};

struct ClusterArgs {
  std::string profiles, out_dir = ".", docs;
  int k = 4;
  bool auto_k = false;
  std::vector<int> ks = {2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 0;
};

struct NetworksArgs {
  std::string docs, forest, out_dir = ".";
  bool exclude_parent = false;
};

struct TransitionsArgs {
  std::string assignments, networks_dir, out_dir = ".";
  std::vector<std::string> kinds;
  int k = 0;  // 0: inferred from assignments
  bool no_persistence = false;
};

struct NullcheckArgs {
  TransitionsArgs base;
  int n = 100;
  double alpha = 0.01;
  std::vector<std::string> models = {"cluster", "temporal"};
  std::string z_variant = "paper";
  std::string cluster_shuffle = "within_month";
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

struct ReportArgs {
  std::string validation, out_dir = ".";
};

struct SimulateArgs {
  std::string config, out_dir = ".";
};

struct EvaluateArgs {
  std::string ground, run, sim_config, salt_env = "SALT", out;
};

struct RunArgs {
  std::string config, out_dir;
  int jobs = 0;
  bool has_master_seed = false;
  std::uint64_t master_seed = 0;
};

void cmd_ingest(const IngestArgs& args) {
  CleaningConfig config = args.config.empty()
                              ? CleaningConfig{}
                              : CleaningConfig::from_json_file(args.config);
  if (args.config.empty()) {
    throw ConfigError("ingest requires --config with a date_range");
  }
  const std::string salt = salt_from_env(args.salt_env);
  fs::create_directories(args.out_dir);
  IngestResult result = load_corpus(args.posts, args.comments, config, salt);
  write_documents(result.documents,
                  (fs::path(args.out_dir) / "documents.ndjson").string());
  write_forest(result.forest, (fs::path(args.out_dir) / "forest.csv").string());
  write_ingest_report(result.report,
                      (fs::path(args.out_dir) / "report.json").string());
  std::cout << "ingest: " << result.report.documents_out << " documents from "
            << result.report.users_out << " users\n";
}

void cmd_features(const FeaturesArgs& args) {
  LexiconLoadReport lex_report;
  const LexiconStore lexicons = load_lexicons(args.lexicons, &lex_report);
  for (const auto& warning : lex_report.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
  const auto docs = read_documents(args.docs);
  const auto profiles = aggregate_monthly(score_corpus(docs, lexicons));
  fs::create_directories(args.out);
  write_profiles(profiles, (fs::path(args.out) / "profiles.csv").string());
  if (profiles.size() >= 3) {
    write_screen_report(screen_features(profiles, 0.001, 1e-9),
                        (fs::path(args.out) / "screen_report.json").string());
  }
  std::cout << "features: " << profiles.size() << " user-month profiles\n";
}

void cmd_cluster(const ClusterArgs& args) {
  const auto profiles = read_profiles(args.profiles);
  fs::create_directories(args.out_dir);
  int k = args.k;
  if (args.auto_k) {
    const ElbowCurve curve = elbow(profiles, args.ks, derive_seed(args.seed, "elbow"));
    write_elbow(curve, (fs::path(args.out_dir) / "elbow.csv").string());
    k = curve.chosen_k;
    std::cout << "elbow chose k=" << k << '\n';
  }
  const ClusterModel model = kmeans(profiles, k, derive_seed(args.seed, "kmeans"));
  write_cluster_model(model, (fs::path(args.out_dir) / "model.json").string());
  write_assignments(model.assignments,
                    (fs::path(args.out_dir) / "assignments.csv").string());
  if (!args.docs.empty()) {
    const auto docs = read_documents(args.docs);
    std::map<int, std::vector<std::string>> texts_by_label;
    for (const auto& doc : docs) {
      if (auto label = model.assignments.label(doc.author_id, doc.month)) {
        texts_by_label[*label].push_back(doc.text);
      }
    }
    write_term_summaries(
        ctfidf_terms(texts_by_label),
        (fs::path(args.out_dir) / "term_summaries.json").string());
  }
  std::cout << "cluster: k=" << model.k << " inertia=" << model.inertia << '\n';
}

void cmd_networks(const NetworksArgs& args) {
  const auto docs = read_documents(args.docs);
  const auto forest = read_forest(args.forest);
  const SnapshotSequence seq =
      build_snapshots(docs, forest, !args.exclude_parent);
  write_snapshots(seq, args.out_dir);
  std::cout << "networks: " << seq.months() << " monthly snapshots\n";
}

struct LoadedTransitions {
  LabelMap labels;
  SnapshotSequence seq;
  PersistenceResult persistence;
  int k = 0;
  std::vector<std::pair<int, ExposureKind>> targets;
};

LoadedTransitions load_transitions(const TransitionsArgs& args) {
  LoadedTransitions loaded;
  loaded.labels = read_assignments(args.assignments);
  loaded.seq = read_snapshots(args.networks_dir);
  loaded.persistence = persistence_filter_labels(loaded.labels);
  if (args.no_persistence) {
    loaded.persistence.persistent_users = loaded.persistence.total_users;
  }
  loaded.k = args.k > 0 ? args.k : infer_k(loaded.labels);
  for (int c = 0; c < loaded.k; ++c) {
    for (ExposureKind kind : parse_kinds(args.kinds)) {
      loaded.targets.emplace_back(c, kind);
    }
  }
  return loaded;
}

void cmd_transitions(const TransitionsArgs& args) {
  LoadedTransitions loaded = load_transitions(args);
  fs::create_directories(args.out_dir);
  const auto results = estimate_ctp_batch(loaded.seq, loaded.labels,
                                          loaded.persistence, loaded.targets,
                                          loaded.k);
  for (const auto& result : results) {
    const std::string name = "ctp_c" + std::to_string(result.conditioning) +
                             "_" + exposure_kind_name(result.kind) + ".csv";
    write_transition_matrix(result.matrix,
                            (fs::path(args.out_dir) / name).string());
  }
  write_transition_matrix(
      estimate_tp(loaded.labels, loaded.persistence, loaded.k),
      (fs::path(args.out_dir) / "tp.csv").string());
  write_ctp_summary(results, loaded.persistence,
                    (fs::path(args.out_dir) / "summary.json").string());
  std::cout << "transitions: " << results.size() << " conditioned matrices, "
            << loaded.persistence.eligible.size() << " eligible pairs\n";
}

void cmd_nullcheck(const NullcheckArgs& args) {
  LoadedTransitions loaded = load_transitions(args.base);
  fs::create_directories(args.base.out_dir);
  const auto observed = estimate_ctp_batch(loaded.seq, loaded.labels,
                                           loaded.persistence, loaded.targets,
                                           loaded.k);
  const TransitionMatrix tp =
      estimate_tp(loaded.labels, loaded.persistence, loaded.k);
  ValidationOptions options;
  options.n_replicates = args.n;
  options.alpha = args.alpha;
  options.run_cluster = false;
  options.run_temporal = false;
  for (const auto& model : args.models) {
    if (model == "cluster") {
      options.run_cluster = true;
    } else if (model == "temporal") {
      options.run_temporal = true;
    } else {
      throw ConfigError("unknown null model: " + model);
    }
  }
  if (args.z_variant == "paper") {
    options.z_variant = ZVariant::kPaper;
  } else if (args.z_variant == "plain") {
    options.z_variant = ZVariant::kPlain;
  } else {
    throw ConfigError("unknown z variant: " + args.z_variant);
  }
  if (args.cluster_shuffle == "within_month") {
    options.cluster_shuffle = ClusterShuffleScope::kWithinMonth;
  } else if (args.cluster_shuffle == "global") {
    options.cluster_shuffle = ClusterShuffleScope::kGlobal;
  } else {
    throw ConfigError("unknown cluster shuffle scope: " + args.cluster_shuffle);
  }
  options.master_seed = args.master_seed;
  options.jobs = args.jobs;
  const ValidationResult result =
      validate_transitions(loaded.seq, loaded.labels, loaded.persistence,
                           observed, tp, loaded.k, options);
  if (result.low_replicate_warning) {
    std::cerr << "warning: fewer than 30 replicates\n";
  }
  write_verdicts(result,
                 (fs::path(args.base.out_dir) / "verdicts.csv").string());
  write_validation_json(
      result, (fs::path(args.base.out_dir) / "validation.json").string());
  std::cout << "nullcheck: " << result.ctp.size() << " matrices validated\n";
}

void cmd_report(const ReportArgs& args) {
  const ValidationResult result = read_validation_json(args.validation);
  write_report(result, args.out_dir);
  std::cout << "report: DOT graphs written to " << args.out_dir << '\n';
}

void cmd_simulate(const SimulateArgs& args) {
  SimConfig config = args.config.empty()
                         ? SimConfig{}
                         : SimConfig::from_json_file(args.config);
  if (args.config.empty()) config.finalize();
  const SimCorpus corpus = simulate(config);
  write_sim_corpus(corpus, config, args.out_dir);
  std::cout << "simulate: " << corpus.posts.size() << " posts, "
            << corpus.comments.size() << " comments -> " << args.out_dir
            << '\n';
}

void cmd_evaluate(const EvaluateArgs& args) {
  const SimConfig config = SimConfig::from_json_file(args.sim_config);
  const std::string salt = salt_from_env(args.salt_env);
  const RecoveryReport report =
      evaluate_recovery(args.ground, args.run, config, salt);
  const std::string out =
      args.out.empty() ? (fs::path(args.run) / "recovery.json").string()
                       : args.out;
  write_recovery_report(report, out);
  std::cout << "evaluate: rand_index=" << report.rand_index << " -> " << out
            << '\n';
}

void cmd_run(const RunArgs& args) {
  PipelineConfig config = PipelineConfig::from_json_file(args.config);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.jobs > 0) config.jobs = args.jobs;
  if (args.has_master_seed) config.master_seed = args.master_seed;
  const PipelineOutcome outcome = run_pipeline(config);
  std::cout << "pipeline complete: " << outcome.manifest_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statetrails: reconstructs users' state journeys over temporal "
               "interaction graphs"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "Clean and pseudonymize an archived discussion dump");
  ingest_cmd->add_option("--posts", ingest_args.posts)->required();
  ingest_cmd->add_option("--comments", ingest_args.comments)->required();
  ingest_cmd->add_option("--salt-env", ingest_args.salt_env);
  ingest_cmd->add_option("--config", ingest_args.config)->required();
  ingest_cmd->add_option("--out-dir", ingest_args.out_dir);

  FeaturesArgs features_args;
  auto* features_cmd = app.add_subcommand(
      "features", "Score documents and aggregate user-month profiles");
  features_cmd->add_option("--docs", features_args.docs)->required();
  features_cmd->add_option("--lexicons", features_args.lexicons)->required();
  features_cmd->add_option("--out", features_args.out);

  ClusterArgs cluster_args;
  auto* cluster_cmd =
      app.add_subcommand("cluster", "K-Means state discovery over profiles");
  cluster_cmd->add_option("--profiles", cluster_args.profiles)->required();
  cluster_cmd->add_option("--k", cluster_args.k);
  cluster_cmd->add_flag("--auto-k", cluster_args.auto_k);
  cluster_cmd->add_option("--ks", cluster_args.ks);
  cluster_cmd->add_option("--seed", cluster_args.seed);
  cluster_cmd->add_option("--docs", cluster_args.docs);
  cluster_cmd->add_option("--out-dir", cluster_args.out_dir);

  NetworksArgs networks_args;
  auto* networks_cmd = app.add_subcommand(
      "networks", "Monthly reply graphs and context hypergraphs");
  networks_cmd->add_option("--docs", networks_args.docs)->required();
  networks_cmd->add_option("--forest", networks_args.forest)->required();
  networks_cmd->add_option("--out-dir", networks_args.out_dir);
  networks_cmd->add_flag("--exclude-parent", networks_args.exclude_parent);

  TransitionsArgs transitions_args;
  auto* transitions_cmd = app.add_subcommand(
      "transitions", "Exposure-conditioned Markov transition estimation");
  transitions_cmd->add_option("--assignments", transitions_args.assignments)
      ->required();
  transitions_cmd->add_option("--networks-dir", transitions_args.networks_dir)
      ->required();
  transitions_cmd->add_option("--kinds", transitions_args.kinds);
  transitions_cmd->add_option("--k", transitions_args.k);
  transitions_cmd->add_flag("--no-persistence-filter",
                            transitions_args.no_persistence);
  transitions_cmd->add_option("--out-dir", transitions_args.out_dir);

  NullcheckArgs nullcheck_args;
  auto* nullcheck_cmd = app.add_subcommand(
      "nullcheck", "Permutation null models and significance verdicts");
  nullcheck_cmd->add_option("--assignments", nullcheck_args.base.assignments)
      ->required();
  nullcheck_cmd->add_option("--networks-dir", nullcheck_args.base.networks_dir)
      ->required();
  nullcheck_cmd->add_option("--kinds", nullcheck_args.base.kinds);
  nullcheck_cmd->add_option("--k", nullcheck_args.base.k);
  nullcheck_cmd->add_flag("--no-persistence-filter",
                          nullcheck_args.base.no_persistence);
  nullcheck_cmd->add_option("--out-dir", nullcheck_args.base.out_dir);
  nullcheck_cmd->add_option("--n", nullcheck_args.n);
  nullcheck_cmd->add_option("--alpha", nullcheck_args.alpha);
  nullcheck_cmd->add_option("--models", nullcheck_args.models);
  nullcheck_cmd->add_option("--z-variant", nullcheck_args.z_variant);
  nullcheck_cmd->add_option("--cluster-shuffle", nullcheck_args.cluster_shuffle);
  nullcheck_cmd->add_option("--master-seed", nullcheck_args.master_seed);
  nullcheck_cmd->add_option("--jobs", nullcheck_args.jobs);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand(
      "report", "Render pruned Markov chains as DOT figure data");
  report_cmd->add_option("--validation", report_args.validation)->required();
  report_cmd->add_option("--out-dir", report_args.out_dir);

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic corpus with planted dynamics");
  simulate_cmd->add_option("--config", simulate_args.config);
  simulate_cmd->add_option("--out-dir", simulate_args.out_dir)->required();

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Compare a pipeline run against simulation ground truth");
  evaluate_cmd->add_option("--ground", evaluate_args.ground)->required();
  evaluate_cmd->add_option("--run", evaluate_args.run)->required();
  evaluate_cmd->add_option("--sim-config", evaluate_args.sim_config)->required();
  evaluate_cmd->add_option("--salt-env", evaluate_args.salt_env);
  evaluate_cmd->add_option("--out", evaluate_args.out);

  RunArgs run_args;
  auto* run_cmd =
      app.add_subcommand("run", "Execute the full pipeline from a config");
  run_cmd->add_option("--config", run_args.config)->required();
  run_cmd->add_option("--out-dir", run_args.out_dir);
  run_cmd->add_option("--jobs", run_args.jobs);
  auto* seed_opt = run_cmd->add_option("--master-seed", run_args.master_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  run_args.has_master_seed = seed_opt->count() > 0;

  try {
    if (ingest_cmd->parsed()) cmd_ingest(ingest_args);
    if (features_cmd->parsed()) cmd_features(features_args);
    if (cluster_cmd->parsed()) cmd_cluster(cluster_args);
    if (networks_cmd->parsed()) cmd_networks(networks_args);
    if (transitions_cmd->parsed()) cmd_transitions(transitions_args);
    if (nullcheck_cmd->parsed()) cmd_nullcheck(nullcheck_args);
    if (report_cmd->parsed()) cmd_report(report_args);
    if (simulate_cmd->parsed()) cmd_simulate(simulate_args);
    if (evaluate_cmd->parsed()) cmd_evaluate(evaluate_args);
    if (run_cmd->parsed()) cmd_run(run_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}
