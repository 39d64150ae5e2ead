#include "statetrails/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"
#include "statetrails/clustering.hpp"
#include "statetrails/digest.hpp"
#include "statetrails/networks.hpp"
#include "statetrails/profiling.hpp"
#include "statetrails/random.hpp"
#include "statetrails/report.hpp"
#include "statetrails/textprep.hpp"

namespace statetrails {

namespace fs = std::filesystem;

namespace {

std::string resolve(const fs::path& base, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pipeline config: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("pipeline config is not valid JSON");
  const fs::path base = fs::absolute(fs::path(path)).parent_path();

  PipelineConfig cfg;
  try {
    cfg.posts = resolve(base, j.at("posts").get<std::string>());
    cfg.comments = resolve(base, j.at("comments").get<std::string>());
    cfg.lexicons = resolve(base, j.at("lexicons").get<std::string>());
    if (j.contains("out_dir")) {
      cfg.out_dir = resolve(base, j["out_dir"].get<std::string>());
    }
    const auto& cleaning = j.at("cleaning");
    for (const auto& name :
         cleaning.value("bot_list", std::vector<std::string>{})) {
      cfg.cleaning.bot_list.insert(name);
    }
    for (const auto& name :
         cleaning.value("moderator_list", std::vector<std::string>{})) {
      cfg.cleaning.moderator_list.insert(name);
    }
    cfg.cleaning.language_filter_enabled =
        cleaning.value("language_filter_enabled", true);
    cfg.cleaning.min_interaction_partners =
        cleaning.value("min_interaction_partners", 1);
    cfg.cleaning.start_utc =
        cleaning.at("date_range").at("start_utc").get<std::int64_t>();
    cfg.cleaning.end_utc =
        cleaning.at("date_range").at("end_utc").get<std::int64_t>();

    if (j.contains("clustering")) {
      const auto& c = j["clustering"];
      cfg.k = c.value("k", cfg.k);
      cfg.auto_k = c.value("auto_k", cfg.auto_k);
      if (c.contains("ks")) cfg.ks = c["ks"].get<std::vector<int>>();
    }
    if (j.contains("exposure_kinds")) {
      cfg.exposure_kinds.clear();
      for (const auto& name : j["exposure_kinds"]) {
        cfg.exposure_kinds.push_back(
            exposure_kind_from_name(name.get<std::string>()));
      }
    }
    if (j.contains("significance")) {
      const auto& s = j["significance"];
      cfg.n_replicates = s.value("n_replicates", cfg.n_replicates);
      cfg.alpha = s.value("alpha", cfg.alpha);
      if (s.contains("models")) {
        cfg.run_cluster_null = false;
        cfg.run_temporal_null = false;
        for (const auto& model : s["models"]) {
          const std::string name = model.get<std::string>();
          if (name == "cluster") {
            cfg.run_cluster_null = true;
          } else if (name == "temporal") {
            cfg.run_temporal_null = true;
          } else {
            throw ConfigError("unknown null model: " + name);
          }
        }
      }
      const std::string variant = s.value("z_variant", "paper");
      if (variant == "paper") {
        cfg.z_variant = ZVariant::kPaper;
      } else if (variant == "plain") {
        cfg.z_variant = ZVariant::kPlain;
      } else {
        throw ConfigError("unknown z variant: " + variant);
      }
      const std::string shuffle = s.value("cluster_shuffle", "within_month");
      if (shuffle == "within_month") {
        cfg.cluster_shuffle = ClusterShuffleScope::kWithinMonth;
      } else if (shuffle == "global") {
        cfg.cluster_shuffle = ClusterShuffleScope::kGlobal;
      } else {
        throw ConfigError("unknown cluster shuffle scope: " + shuffle);
      }
    }
    cfg.persistence_filter_enabled =
        j.value("persistence_filter", cfg.persistence_filter_enabled);
    cfg.include_parent_in_context =
        j.value("include_parent_in_context", cfg.include_parent_in_context);
    cfg.screen_p_threshold = j.value("screen_p_threshold", cfg.screen_p_threshold);
    cfg.screen_var_threshold =
        j.value("screen_var_threshold", cfg.screen_var_threshold);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.salt_env = j.value("salt_env", cfg.salt_env);
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  return cfg;
}

void PipelineConfig::validate() const {
  if (posts.empty() || comments.empty() || lexicons.empty()) {
    throw ConfigError("pipeline config: posts, comments, lexicons required");
  }
  if (out_dir.empty()) throw ConfigError("pipeline config: out_dir required");
  if (!fs::exists(posts)) throw ConfigError("posts file missing: " + posts);
  if (!fs::exists(comments)) {
    throw ConfigError("comments file missing: " + comments);
  }
  // the lexicon directory is the features stage's input; a missing one
  // surfaces as a features-stage failure
  if (k < 1) throw ConfigError("clustering k must be >= 1");
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in (0,1)");
  if (n_replicates < 2) throw ConfigError("n_replicates must be >= 2");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (exposure_kinds.empty()) throw ConfigError("no exposure kinds selected");
  try {
    cleaning.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::string PipelineConfig::salt() const {
  const char* value = std::getenv(salt_env.c_str());
  if (!value || !*value) {
    throw ConfigError("salt environment variable is empty or unset: " +
                      salt_env);
  }
  return value;
}

namespace {

fs::path stage_dir(const PipelineConfig& config, const std::string& stage) {
  fs::path dir = fs::path(config.out_dir) / stage;
  fs::create_directories(dir);
  return dir;
}

int read_model_k(const PipelineConfig& config) {
  std::ifstream in(fs::path(config.out_dir) / "cluster" / "model.json");
  if (!in) throw std::runtime_error("cluster model not found; run cluster first");
  nlohmann::json j = nlohmann::json::parse(in);
  return j.at("k").get<int>();
}

PersistenceResult load_persistence(const PipelineConfig& config,
                                   const LabelMap& labels) {
  PersistenceResult persistence = persistence_filter_labels(labels);
  if (!config.persistence_filter_enabled) {
    // denominator falls back to the whole profiled population
    persistence.persistent_users = persistence.total_users;
  }
  return persistence;
}

struct TransitionInputs {
  LabelMap labels;
  SnapshotSequence seq;
  PersistenceResult persistence;
  int k = 0;
  std::vector<std::pair<int, ExposureKind>> targets;
};

TransitionInputs load_transition_inputs(const PipelineConfig& config) {
  TransitionInputs inputs;
  inputs.labels = read_assignments(
      (fs::path(config.out_dir) / "cluster" / "assignments.csv").string());
  inputs.seq =
      read_snapshots((fs::path(config.out_dir) / "networks").string());
  inputs.persistence = load_persistence(config, inputs.labels);
  inputs.k = read_model_k(config);
  for (int c = 0; c < inputs.k; ++c) {
    for (ExposureKind kind : config.exposure_kinds) {
      inputs.targets.emplace_back(c, kind);
    }
  }
  return inputs;
}

}  // namespace

void run_stage_ingest(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "ingest");
  IngestResult result =
      load_corpus(config.posts, config.comments, config.cleaning, config.salt());
  write_documents(result.documents, (dir / "documents.ndjson").string());
  write_forest(result.forest, (dir / "forest.csv").string());
  write_ingest_report(result.report, (dir / "report.json").string());
}

void run_stage_features(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "features");
  LexiconLoadReport lex_report;
  const LexiconStore lexicons = load_lexicons(config.lexicons, &lex_report);
  const auto docs = read_documents(
      (fs::path(config.out_dir) / "ingest" / "documents.ndjson").string());
  const auto scored = score_corpus(docs, lexicons);
  const auto profiles = aggregate_monthly(scored);
  write_profiles(profiles, (dir / "profiles.csv").string());
  if (profiles.size() >= 3) {
    const auto screen = screen_features(profiles, config.screen_p_threshold,
                                        config.screen_var_threshold);
    write_screen_report(screen, (dir / "screen_report.json").string());
  }
}

void run_stage_cluster(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "cluster");
  const auto profiles = read_profiles(
      (fs::path(config.out_dir) / "features" / "profiles.csv").string());
  int k = config.k;
  if (config.auto_k) {
    const ElbowCurve curve =
        elbow(profiles, config.ks, derive_seed(config.master_seed, "elbow"));
    write_elbow(curve, (dir / "elbow.csv").string());
    k = curve.chosen_k;
  }
  const ClusterModel model =
      kmeans(profiles, k, derive_seed(config.master_seed, "kmeans"));
  write_cluster_model(model, (dir / "model.json").string());
  write_assignments(model.assignments, (dir / "assignments.csv").string());

  const auto docs = read_documents(
      (fs::path(config.out_dir) / "ingest" / "documents.ndjson").string());
  std::map<int, std::vector<std::string>> texts_by_label;
  for (const auto& doc : docs) {
    if (auto label = model.assignments.label(doc.author_id, doc.month)) {
      texts_by_label[*label].push_back(doc.text);
    }
  }
  write_term_summaries(ctfidf_terms(texts_by_label),
                       (dir / "term_summaries.json").string());
}

void run_stage_networks(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "networks");
  const auto docs = read_documents(
      (fs::path(config.out_dir) / "ingest" / "documents.ndjson").string());
  const auto forest = read_forest(
      (fs::path(config.out_dir) / "ingest" / "forest.csv").string());
  const SnapshotSequence seq =
      build_snapshots(docs, forest, config.include_parent_in_context);
  write_snapshots(seq, dir.string());
}

void run_stage_transitions(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "transitions");
  TransitionInputs inputs = load_transition_inputs(config);
  const auto results = estimate_ctp_batch(inputs.seq, inputs.labels,
                                          inputs.persistence, inputs.targets,
                                          inputs.k);
  for (const auto& result : results) {
    const std::string name = "ctp_c" + std::to_string(result.conditioning) +
                             "_" + exposure_kind_name(result.kind) + ".csv";
    write_transition_matrix(result.matrix, (dir / name).string());
  }
  const TransitionMatrix tp =
      estimate_tp(inputs.labels, inputs.persistence, inputs.k);
  write_transition_matrix(tp, (dir / "tp.csv").string());
  write_ctp_summary(results, inputs.persistence, (dir / "summary.json").string());
}

void run_stage_nullcheck(const PipelineConfig& config) {
  const fs::path dir = stage_dir(config, "nullcheck");
  TransitionInputs inputs = load_transition_inputs(config);
  const auto observed = estimate_ctp_batch(inputs.seq, inputs.labels,
                                           inputs.persistence, inputs.targets,
                                           inputs.k);
  const TransitionMatrix tp =
      estimate_tp(inputs.labels, inputs.persistence, inputs.k);
  ValidationOptions options;
  options.n_replicates = config.n_replicates;
  options.alpha = config.alpha;
  options.run_cluster = config.run_cluster_null;
  options.run_temporal = config.run_temporal_null;
  options.z_variant = config.z_variant;
  options.cluster_shuffle = config.cluster_shuffle;
  options.master_seed = derive_seed(config.master_seed, "nullcheck");
  options.jobs = config.jobs;
  const ValidationResult result = validate_transitions(
      inputs.seq, inputs.labels, inputs.persistence, observed, tp, inputs.k,
      options);
  write_verdicts(result, (dir / "verdicts.csv").string());
  write_validation_json(result, (dir / "validation.json").string());
}

void run_stage_report(const PipelineConfig& config) {
  const ValidationResult result = read_validation_json(
      (fs::path(config.out_dir) / "nullcheck" / "validation.json").string());
  write_report(result, (fs::path(config.out_dir) / "report").string());
}

PipelineOutcome run_pipeline(const PipelineConfig& config) {
  config.validate();
  config.salt();  // fail before any work when the salt is missing
  fs::create_directories(config.out_dir);

  const std::vector<std::pair<std::string, void (*)(const PipelineConfig&)>>
      stages = {
          {"ingest", run_stage_ingest},
          {"features", run_stage_features},
          {"cluster", run_stage_cluster},
          {"networks", run_stage_networks},
          {"transitions", run_stage_transitions},
          {"nullcheck", run_stage_nullcheck},
          {"report", run_stage_report},
      };
  for (const auto& [name, stage] : stages) {
    try {
      stage(config);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  PipelineOutcome outcome;
  for (const auto& [name, stage] : stages) {
    const fs::path dir = fs::path(config.out_dir) / name;
    if (!fs::exists(dir)) continue;
    std::map<std::string, std::string>& hashes = outcome.artifacts[name];
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string rel =
          fs::relative(file, fs::path(config.out_dir)).generic_string();
      hashes[rel] = sha256_file_hex(file.string());
    }
  }

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["master_seed"] = config.master_seed;
  nlohmann::json stages_json;
  for (const auto& [stage, hashes] : outcome.artifacts) {
    nlohmann::json entry;
    for (const auto& [rel, hash] : hashes) entry[rel] = hash;
    stages_json[stage] = entry;
  }
  manifest["stages"] = stages_json;
  outcome.manifest_path =
      (fs::path(config.out_dir) / "manifest.json").string();
  std::ofstream out(outcome.manifest_path);
  if (!out) throw StageError("manifest", "cannot write manifest");
  out << manifest.dump(2) << '\n';
  return outcome;
}

}  // namespace statetrails
