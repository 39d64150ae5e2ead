#ifndef STATETRAILS_TRANSITIONS_HPP
#define STATETRAILS_TRANSITIONS_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "statetrails/networks.hpp"
#include "statetrails/types.hpp"

namespace statetrails {

enum class ExposureKind {
  kSingleInteraction,
  kSingleHomogeneousContext,
  kMajorityInteractions,
  kMajorityHomogeneousContexts,
};

inline constexpr std::array<ExposureKind, 4> kAllExposureKinds = {
    ExposureKind::kSingleInteraction,
    ExposureKind::kSingleHomogeneousContext,
    ExposureKind::kMajorityInteractions,
    ExposureKind::kMajorityHomogeneousContexts,
};

std::string exposure_kind_name(ExposureKind kind);
ExposureKind exposure_kind_from_name(const std::string& name);

struct PersistenceResult {
  std::set<UserMonth> eligible;  // (u, t) with profiles at both t and t+1
  std::size_t total_users = 0;
  std::size_t persistent_users = 0;  // users with >= 1 eligible pair
  double dropped_fraction = 0.0;
};

PersistenceResult persistence_filter(
    const std::vector<UserMonthProfile>& profiles);
PersistenceResult persistence_filter_labels(const LabelMap& labels);

// Exposure of u to conditioning cluster C at month t. Users without a
// snapshot presence or with empty neighborhoods are never exposed.
bool exposed(const std::string& u, int t, int conditioning, ExposureKind kind,
             const SnapshotSequence& seq, const LabelMap& labels);

struct TransitionMatrix {
  int k = 0;
  std::vector<std::vector<long long>> counts;
  std::vector<std::vector<double>> probs;  // row-stochastic or all-zero rows
  std::vector<long long> support;          // per-row event totals

  static TransitionMatrix zeros(int k);
  void normalize();  // fills probs from counts
};

struct CtpResult {
  int conditioning = 0;
  ExposureKind kind = ExposureKind::kSingleInteraction;
  TransitionMatrix matrix;
  double users_affected = 0.0;
  bool degenerate = false;  // no exposed eligible pair at all
};

// Exposure-conditioned transition counts over eligible (u, t) pairs.
CtpResult estimate_ctp(const SnapshotSequence& seq, const LabelMap& labels,
                       const PersistenceResult& persistence, int conditioning,
                       ExposureKind kind, int k);

// Same estimate for many (conditioning, kind) targets in one pass; the
// pairwise and context neighborhoods are computed once per eligible pair.
std::vector<CtpResult> estimate_ctp_batch(
    const SnapshotSequence& seq, const LabelMap& labels,
    const PersistenceResult& persistence,
    const std::vector<std::pair<int, ExposureKind>>& targets, int k);

// Metapopulation transitions: every eligible pair counts.
TransitionMatrix estimate_tp(const LabelMap& labels,
                             const PersistenceResult& persistence, int k);

void write_transition_matrix(const TransitionMatrix& matrix,
                             const std::string& path);
TransitionMatrix read_transition_matrix(const std::string& path);
void write_ctp_summary(const std::vector<CtpResult>& results,
                       const PersistenceResult& persistence,
                       const std::string& path);

}  // namespace statetrails

#endif
