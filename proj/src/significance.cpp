#include "statetrails/significance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "statetrails/random.hpp"

namespace statetrails {

LabelMap cluster_null_replicate(const LabelMap& labels, std::uint64_t seed,
                                ClusterShuffleScope scope) {
  Rng rng(seed);
  LabelMap out;
  if (scope == ClusterShuffleScope::kGlobal) {
    std::vector<const UserMonth*> slots;
    std::vector<int> pool;
    for (const auto& [key, label] : labels.entries()) {
      slots.push_back(&key);
      pool.push_back(label);
    }
    rng.shuffle(pool);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      out.set(slots[i]->first, slots[i]->second, pool[i]);
    }
    return out;
  }
  std::map<int, std::vector<const UserMonth*>> slots_by_month;
  for (const auto& [key, label] : labels.entries()) {
    slots_by_month[key.second].push_back(&key);
  }
  for (const auto& [month, slots] : slots_by_month) {
    std::vector<int> pool;
    pool.reserve(slots.size());
    for (const auto* key : slots) pool.push_back(*labels.label(key->first, month));
    rng.shuffle(pool);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      out.set(slots[i]->first, month, pool[i]);
    }
  }
  return out;
}

SnapshotSequence temporal_null_replicate(const SnapshotSequence& seq,
                                         std::uint64_t seed) {
  const std::size_t months = seq.months();
  if (months < 2) {
    throw std::runtime_error("temporal null requires at least 2 months");
  }
  std::vector<std::size_t> perm(months);
  for (std::size_t i = 0; i < months; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  SnapshotSequence out;
  out.graphs.reserve(months);
  out.hypergraphs.reserve(months);
  for (std::size_t pos = 0; pos < months; ++pos) {
    SnapshotGraph g = seq.graphs[perm[pos]];
    SnapshotHypergraph h = seq.hypergraphs[perm[pos]];
    g.month = static_cast<int>(pos);
    h.month = static_cast<int>(pos);
    out.graphs.push_back(std::move(g));
    out.hypergraphs.push_back(std::move(h));
  }
  return out;
}

double zscore(double x, double mu, double sigma, int n) {
  if (n < 1) throw std::runtime_error("zscore: n must be >= 1");
  if (sigma < 0.0) throw std::runtime_error("zscore: sigma must be >= 0");
  if (sigma == 0.0) {
    if (x == mu) return 0.0;
    return x > mu ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
  }
  return (x - mu) / (sigma / std::sqrt(static_cast<double>(n)));
}

namespace {

double two_sided_p(double z) {
  if (std::isinf(z)) return 0.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

struct CellStats {
  double mu = 0.0;
  double sigma = 0.0;
};

CellStats ensemble_stats(const std::vector<double>& values) {
  CellStats stats;
  const std::size_t n = values.size();
  if (n == 0) return stats;
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mu = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double d = v - stats.mu;
      ss += d * d;
    }
    stats.sigma = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

// replicate probability matrices per observed target, indexed [target][rep]
using ReplicateProbs = std::vector<std::vector<std::vector<std::vector<double>>>>;

void run_indexed(int n, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::size_t stride = static_cast<std::size_t>(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w]() {
      for (int i = w; i < n; i += static_cast<int>(stride)) body(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

}  // namespace

ValidationResult validate_transitions(const SnapshotSequence& seq,
                                      const LabelMap& labels,
                                      const PersistenceResult& persistence,
                                      const std::vector<CtpResult>& observed,
                                      const TransitionMatrix& observed_tp,
                                      int k, const ValidationOptions& options) {
  if (options.n_replicates < 2) {
    throw std::runtime_error("validate_transitions: need >= 2 replicates");
  }
  if (options.alpha <= 0.0 || options.alpha >= 1.0) {
    throw std::runtime_error("validate_transitions: alpha must be in (0,1)");
  }
  ValidationResult result;
  result.options = options;
  result.low_replicate_warning = options.n_replicates < 30;

  const std::size_t targets = observed.size();
  const int n = options.n_replicates;
  const auto dims = static_cast<std::size_t>(k);

  // rep -> target -> k x k probs
  auto make_store = [&](std::size_t count) {
    return std::vector<std::vector<std::vector<std::vector<double>>>>(
        static_cast<std::size_t>(n),
        std::vector<std::vector<std::vector<double>>>(
            count, std::vector<std::vector<double>>(
                       dims, std::vector<double>(dims, 0.0))));
  };
  ReplicateProbs cluster_probs;
  ReplicateProbs temporal_probs;
  std::vector<std::vector<std::vector<double>>> cluster_tp_probs;

  std::vector<std::pair<int, ExposureKind>> target_keys;
  target_keys.reserve(targets);
  for (const auto& o : observed) target_keys.emplace_back(o.conditioning, o.kind);

  if (options.run_cluster) {
    cluster_probs = make_store(targets);
    cluster_tp_probs.assign(static_cast<std::size_t>(n),
                            std::vector<std::vector<double>>(
                                dims, std::vector<double>(dims, 0.0)));
    run_indexed(n, options.jobs, [&](int rep) {
      const LabelMap shuffled = cluster_null_replicate(
          labels,
          derive_seed(options.master_seed, "cluster-null",
                      static_cast<std::uint64_t>(rep)),
          options.cluster_shuffle);
      const auto estimates =
          estimate_ctp_batch(seq, shuffled, persistence, target_keys, k);
      for (std::size_t t = 0; t < targets; ++t) {
        cluster_probs[static_cast<std::size_t>(rep)][t] =
            estimates[t].matrix.probs;
      }
      cluster_tp_probs[static_cast<std::size_t>(rep)] =
          estimate_tp(shuffled, persistence, k).probs;
    });
  }
  if (options.run_temporal) {
    temporal_probs = make_store(targets);
    run_indexed(n, options.jobs, [&](int rep) {
      const SnapshotSequence shuffled = temporal_null_replicate(
          seq, derive_seed(options.master_seed, "temporal-null",
                           static_cast<std::uint64_t>(rep)));
      const auto estimates =
          estimate_ctp_batch(shuffled, labels, persistence, target_keys, k);
      for (std::size_t t = 0; t < targets; ++t) {
        temporal_probs[static_cast<std::size_t>(rep)][t] =
            estimates[t].matrix.probs;
      }
    });
  }

  const int z_n = options.z_variant == ZVariant::kPaper ? n : 1;

  auto score_cell = [&](CellVerdict& cell, double x,
                        const std::vector<double>& cluster_values,
                        const std::vector<double>& temporal_values) {
    cell.x = x;
    bool keep_all = cell.applicable;
    if (options.run_cluster) {
      const CellStats stats = ensemble_stats(cluster_values);
      cell.mu_cluster = stats.mu;
      cell.sigma_cluster = stats.sigma;
      cell.z_cluster = zscore(x, stats.mu, stats.sigma, z_n);
      cell.p_cluster = two_sided_p(cell.z_cluster);
      if (std::isinf(cell.z_cluster)) cell.sigma_zero = true;
      cell.keep_cluster = cell.applicable && cell.p_cluster < options.alpha;
      keep_all = keep_all && cell.keep_cluster;
    }
    if (options.run_temporal) {
      const CellStats stats = ensemble_stats(temporal_values);
      cell.mu_temporal = stats.mu;
      cell.sigma_temporal = stats.sigma;
      cell.z_temporal = zscore(x, stats.mu, stats.sigma, z_n);
      cell.p_temporal = two_sided_p(cell.z_temporal);
      if (std::isinf(cell.z_temporal)) cell.sigma_zero = true;
      cell.keep_temporal = cell.applicable && cell.p_temporal < options.alpha;
      keep_all = keep_all && cell.keep_temporal;
    }
    cell.keep_combined = keep_all && (options.run_cluster || options.run_temporal);
  };

  for (std::size_t t = 0; t < targets; ++t) {
    MatrixVerdicts verdicts;
    verdicts.conditioning = observed[t].conditioning;
    verdicts.kind = observed[t].kind;
    verdicts.users_affected = observed[t].users_affected;
    verdicts.cells.assign(dims, std::vector<CellVerdict>(dims));
    for (std::size_t i = 0; i < dims; ++i) {
      const bool row_supported = observed[t].matrix.support[i] > 0;
      for (std::size_t j = 0; j < dims; ++j) {
        CellVerdict& cell = verdicts.cells[i][j];
        cell.applicable = !observed[t].degenerate && row_supported;
        std::vector<double> cluster_values;
        std::vector<double> temporal_values;
        if (options.run_cluster) {
          cluster_values.reserve(static_cast<std::size_t>(n));
          for (int rep = 0; rep < n; ++rep) {
            cluster_values.push_back(
                cluster_probs[static_cast<std::size_t>(rep)][t][i][j]);
          }
        }
        if (options.run_temporal) {
          temporal_values.reserve(static_cast<std::size_t>(n));
          for (int rep = 0; rep < n; ++rep) {
            temporal_values.push_back(
                temporal_probs[static_cast<std::size_t>(rep)][t][i][j]);
          }
        }
        score_cell(cell, observed[t].matrix.probs[i][j], cluster_values,
                   temporal_values);
      }
    }
    result.ctp.push_back(std::move(verdicts));
  }

  // metapopulation TP: cluster null only
  result.tp.conditioning = -1;
  result.tp.is_metapopulation = true;
  if (options.run_cluster) {
    result.tp.cells.assign(dims, std::vector<CellVerdict>(dims));
    for (std::size_t i = 0; i < dims; ++i) {
      const bool row_supported = observed_tp.support[i] > 0;
      for (std::size_t j = 0; j < dims; ++j) {
        CellVerdict& cell = result.tp.cells[i][j];
        cell.applicable = row_supported;
        cell.x = observed_tp.probs[i][j];
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(n));
        for (int rep = 0; rep < n; ++rep) {
          values.push_back(cluster_tp_probs[static_cast<std::size_t>(rep)][i][j]);
        }
        const CellStats stats = ensemble_stats(values);
        cell.mu_cluster = stats.mu;
        cell.sigma_cluster = stats.sigma;
        cell.z_cluster = zscore(cell.x, stats.mu, stats.sigma, z_n);
        cell.p_cluster = two_sided_p(cell.z_cluster);
        if (std::isinf(cell.z_cluster)) cell.sigma_zero = true;
        cell.keep_cluster = cell.applicable && cell.p_cluster < options.alpha;
        cell.keep_combined = cell.keep_cluster;
      }
    }
  }
  return result;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_rows(std::ofstream& out, const MatrixVerdicts& m,
                       bool cluster_ran, bool temporal_ran) {
  const std::string kind_name =
      m.is_metapopulation ? "metapopulation" : exposure_kind_name(m.kind);
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
      const CellVerdict& c = m.cells[i][j];
      out << m.conditioning << ',' << kind_name << ',' << i << ',' << j << ','
          << fmt(c.x) << ',';
      if (cluster_ran) {
        out << fmt(c.mu_cluster) << ',' << fmt(c.sigma_cluster) << ','
            << fmt(c.z_cluster) << ',' << fmt(c.p_cluster) << ',';
      } else {
        out << ",,,,";
      }
      if (temporal_ran && !m.is_metapopulation) {
        out << fmt(c.mu_temporal) << ',' << fmt(c.sigma_temporal) << ','
            << fmt(c.z_temporal) << ',' << fmt(c.p_temporal) << ',';
      } else {
        out << ",,,,";
      }
      if (!c.applicable) {
        out << "na";
      } else {
        out << (c.keep_combined ? 1 : 0);
      }
      out << '\n';
    }
  }
}

}  // namespace

void write_verdicts(const ValidationResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write verdicts: " + path);
  out << "conditioning,kind,from,to,x,mu_cluster,sigma_cluster,z_cluster,"
         "p_cluster,mu_temporal,sigma_temporal,z_temporal,p_temporal,"
         "keep_combined\n";
  const bool cluster_ran = result.options.run_cluster;
  const bool temporal_ran = result.options.run_temporal;
  for (const auto& m : result.ctp) {
    write_matrix_rows(out, m, cluster_ran, temporal_ran);
  }
  if (!result.tp.cells.empty()) {
    write_matrix_rows(out, result.tp, cluster_ran, temporal_ran);
  }
}

namespace {

nlohmann::json cell_to_json(const CellVerdict& c) {
  return {{"x", c.x},
          {"mu_cluster", c.mu_cluster},
          {"sigma_cluster", c.sigma_cluster},
          {"z_cluster", std::isinf(c.z_cluster) ? (c.z_cluster > 0 ? 1e308 : -1e308)
                                                : c.z_cluster},
          {"p_cluster", c.p_cluster},
          {"mu_temporal", c.mu_temporal},
          {"sigma_temporal", c.sigma_temporal},
          {"z_temporal", std::isinf(c.z_temporal)
                             ? (c.z_temporal > 0 ? 1e308 : -1e308)
                             : c.z_temporal},
          {"p_temporal", c.p_temporal},
          {"keep_cluster", c.keep_cluster},
          {"keep_temporal", c.keep_temporal},
          {"keep_combined", c.keep_combined},
          {"applicable", c.applicable},
          {"sigma_zero", c.sigma_zero}};
}

CellVerdict cell_from_json(const nlohmann::json& j) {
  CellVerdict c;
  c.x = j.at("x").get<double>();
  c.mu_cluster = j.at("mu_cluster").get<double>();
  c.sigma_cluster = j.at("sigma_cluster").get<double>();
  c.z_cluster = j.at("z_cluster").get<double>();
  c.p_cluster = j.at("p_cluster").get<double>();
  c.mu_temporal = j.at("mu_temporal").get<double>();
  c.sigma_temporal = j.at("sigma_temporal").get<double>();
  c.z_temporal = j.at("z_temporal").get<double>();
  c.p_temporal = j.at("p_temporal").get<double>();
  c.keep_cluster = j.at("keep_cluster").get<bool>();
  c.keep_temporal = j.at("keep_temporal").get<bool>();
  c.keep_combined = j.at("keep_combined").get<bool>();
  c.applicable = j.at("applicable").get<bool>();
  c.sigma_zero = j.at("sigma_zero").get<bool>();
  return c;
}

nlohmann::json matrix_to_json(const MatrixVerdicts& m) {
  nlohmann::json j;
  j["conditioning"] = m.conditioning;
  j["kind"] = m.is_metapopulation ? "metapopulation" : exposure_kind_name(m.kind);
  j["is_metapopulation"] = m.is_metapopulation;
  j["users_affected"] = m.users_affected;
  auto rows = nlohmann::json::array();
  for (const auto& row : m.cells) {
    auto cells = nlohmann::json::array();
    for (const auto& c : row) cells.push_back(cell_to_json(c));
    rows.push_back(cells);
  }
  j["cells"] = rows;
  return j;
}

MatrixVerdicts matrix_from_json(const nlohmann::json& j) {
  MatrixVerdicts m;
  m.conditioning = j.at("conditioning").get<int>();
  m.is_metapopulation = j.at("is_metapopulation").get<bool>();
  if (!m.is_metapopulation) {
    m.kind = exposure_kind_from_name(j.at("kind").get<std::string>());
  }
  m.users_affected = j.at("users_affected").get<double>();
  for (const auto& row : j.at("cells")) {
    std::vector<CellVerdict> cells;
    for (const auto& c : row) cells.push_back(cell_from_json(c));
    m.cells.push_back(std::move(cells));
  }
  return m;
}

}  // namespace

void write_validation_json(const ValidationResult& result,
                           const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n_replicates"] = result.options.n_replicates;
  j["alpha"] = result.options.alpha;
  j["run_cluster"] = result.options.run_cluster;
  j["run_temporal"] = result.options.run_temporal;
  j["z_variant"] =
      result.options.z_variant == ZVariant::kPaper ? "paper" : "plain";
  j["low_replicate_warning"] = result.low_replicate_warning;
  auto ctp = nlohmann::json::array();
  for (const auto& m : result.ctp) ctp.push_back(matrix_to_json(m));
  j["ctp"] = ctp;
  j["tp"] = matrix_to_json(result.tp);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write validation result: " + path);
  out << j.dump(2) << '\n';
}

ValidationResult read_validation_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open validation result: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  ValidationResult result;
  result.options.n_replicates = j.at("n_replicates").get<int>();
  result.options.alpha = j.at("alpha").get<double>();
  result.options.run_cluster = j.at("run_cluster").get<bool>();
  result.options.run_temporal = j.at("run_temporal").get<bool>();
  result.options.z_variant = j.at("z_variant").get<std::string>() == "plain"
                                 ? ZVariant::kPlain
                                 : ZVariant::kPaper;
  result.low_replicate_warning = j.at("low_replicate_warning").get<bool>();
  for (const auto& m : j.at("ctp")) result.ctp.push_back(matrix_from_json(m));
  result.tp = matrix_from_json(j.at("tp"));
  return result;
}

}  // namespace statetrails
