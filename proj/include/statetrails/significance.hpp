#ifndef STATETRAILS_SIGNIFICANCE_HPP
#define STATETRAILS_SIGNIFICANCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "statetrails/networks.hpp"
#include "statetrails/transitions.hpp"
#include "statetrails/types.hpp"

namespace statetrails {

enum class ClusterShuffleScope {
  kWithinMonth,  // preserves every monthly label multiset
  kGlobal,       // preserves only the corpus-wide multiset
};

// Shuffles cluster labels across user-month slots, within each month by
// default.
LabelMap cluster_null_replicate(
    const LabelMap& labels, std::uint64_t seed,
    ClusterShuffleScope scope = ClusterShuffleScope::kWithinMonth);

// Permutes snapshot order; each month's graph and hypergraph move together
// and keep their topology bit-identical. Requires at least 2 months.
SnapshotSequence temporal_null_replicate(const SnapshotSequence& seq,
                                         std::uint64_t seed);

// z = (x - mu) / (sigma / sqrt(n)). sigma = 0 yields 0 when x == mu and an
// infinite sentinel otherwise.
double zscore(double x, double mu, double sigma, int n);

enum class ZVariant {
  kPaper,  // (x - mu) / (sigma / sqrt(n))
  kPlain,  // (x - mu) / sigma, for sensitivity analysis
};

struct CellVerdict {
  double x = 0.0;
  double mu_cluster = 0.0, sigma_cluster = 0.0, z_cluster = 0.0, p_cluster = 1.0;
  double mu_temporal = 0.0, sigma_temporal = 0.0, z_temporal = 0.0, p_temporal = 1.0;
  bool keep_cluster = false;
  bool keep_temporal = false;
  bool keep_combined = false;
  bool applicable = true;  // false for degenerate matrices / unsupported rows
  bool sigma_zero = false; // infinite-z sentinel fired
};

struct MatrixVerdicts {
  int conditioning = 0;  // -1 for the metapopulation TP
  ExposureKind kind = ExposureKind::kSingleInteraction;
  bool is_metapopulation = false;
  double users_affected = 0.0;
  std::vector<std::vector<CellVerdict>> cells;  // k x k
};

struct ValidationOptions {
  int n_replicates = 100;
  double alpha = 0.01;
  bool run_cluster = true;
  bool run_temporal = true;
  ZVariant z_variant = ZVariant::kPaper;
  ClusterShuffleScope cluster_shuffle = ClusterShuffleScope::kWithinMonth;
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

struct ValidationResult {
  std::vector<MatrixVerdicts> ctp;
  MatrixVerdicts tp;  // validated against the cluster null only
  ValidationOptions options;
  bool low_replicate_warning = false;
};

// Re-estimates the full CTP set per replicate under each requested null
// model, then scores every observed cell against the replicate ensemble.
// keep_combined requires every model that ran to keep the cell.
ValidationResult validate_transitions(const SnapshotSequence& seq,
                                      const LabelMap& labels,
                                      const PersistenceResult& persistence,
                                      const std::vector<CtpResult>& observed,
                                      const TransitionMatrix& observed_tp,
                                      int k, const ValidationOptions& options);

void write_verdicts(const ValidationResult& result, const std::string& path);

// full round-trippable form, so reporting can run without re-validating
void write_validation_json(const ValidationResult& result,
                           const std::string& path);
ValidationResult read_validation_json(const std::string& path);

}  // namespace statetrails

#endif
