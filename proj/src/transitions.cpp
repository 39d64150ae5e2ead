#include "statetrails/transitions.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace statetrails {

std::string exposure_kind_name(ExposureKind kind) {
  switch (kind) {
    case ExposureKind::kSingleInteraction:
      return "single_interaction";
    case ExposureKind::kSingleHomogeneousContext:
      return "single_homogeneous_context";
    case ExposureKind::kMajorityInteractions:
      return "majority_interactions";
    case ExposureKind::kMajorityHomogeneousContexts:
      return "majority_homogeneous_contexts";
  }
  throw std::runtime_error("unreachable exposure kind");
}

ExposureKind exposure_kind_from_name(const std::string& name) {
  for (ExposureKind kind : kAllExposureKinds) {
    if (exposure_kind_name(kind) == name) return kind;
  }
  throw std::runtime_error("unknown exposure kind: " + name);
}

namespace {

PersistenceResult persistence_from_months(
    const std::map<std::string, std::set<int>>& months_by_user) {
  PersistenceResult result;
  result.total_users = months_by_user.size();
  for (const auto& [user, months] : months_by_user) {
    bool persistent = false;
    for (int t : months) {
      if (months.count(t + 1)) {
        result.eligible.insert({user, t});
        persistent = true;
      }
    }
    if (persistent) ++result.persistent_users;
  }
  result.dropped_fraction =
      result.total_users == 0
          ? 0.0
          : static_cast<double>(result.total_users - result.persistent_users) /
                static_cast<double>(result.total_users);
  return result;
}

}  // namespace

PersistenceResult persistence_filter(
    const std::vector<UserMonthProfile>& profiles) {
  std::map<std::string, std::set<int>> months_by_user;
  for (const auto& p : profiles) months_by_user[p.author_id].insert(p.month);
  return persistence_from_months(months_by_user);
}

PersistenceResult persistence_filter_labels(const LabelMap& labels) {
  std::map<std::string, std::set<int>> months_by_user;
  for (const auto& [key, label] : labels.entries()) {
    months_by_user[key.first].insert(key.second);
  }
  return persistence_from_months(months_by_user);
}

bool exposed(const std::string& u, int t, int conditioning, ExposureKind kind,
             const SnapshotSequence& seq, const LabelMap& labels) {
  if (t < 0 || static_cast<std::size_t>(t) >= seq.months()) return false;
  switch (kind) {
    case ExposureKind::kSingleInteraction:
    case ExposureKind::kMajorityInteractions: {
      const auto& g = seq.graphs[static_cast<std::size_t>(t)];
      if (!g.nodes.count(u)) return false;
      const auto multiset = graph_neighborhood_labels(g, labels, u);
      if (multiset.empty()) return false;
      if (kind == ExposureKind::kSingleInteraction) {
        return multiset.count(conditioning) > 0;
      }
      return most_frequent_label(multiset) == conditioning;
    }
    case ExposureKind::kSingleHomogeneousContext:
    case ExposureKind::kMajorityHomogeneousContexts: {
      const auto& h = seq.hypergraphs[static_cast<std::size_t>(t)];
      if (!h.nodes.count(u)) return false;
      const auto multiset = hyper_neighborhood_characteristic_labels(h, labels, u);
      if (multiset.empty()) return false;
      if (kind == ExposureKind::kSingleHomogeneousContext) {
        return multiset.count(conditioning) > 0;
      }
      return most_frequent_label(multiset) == conditioning;
    }
  }
  return false;
}

TransitionMatrix TransitionMatrix::zeros(int k_) {
  TransitionMatrix m;
  m.k = k_;
  m.counts.assign(static_cast<std::size_t>(k_),
                  std::vector<long long>(static_cast<std::size_t>(k_), 0));
  m.probs.assign(static_cast<std::size_t>(k_),
                 std::vector<double>(static_cast<std::size_t>(k_), 0.0));
  m.support.assign(static_cast<std::size_t>(k_), 0);
  return m;
}

void TransitionMatrix::normalize() {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long long row_total = 0;
    for (long long c : counts[i]) row_total += c;
    support[i] = row_total;
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      probs[i][j] = row_total == 0 ? 0.0
                                   : static_cast<double>(counts[i][j]) /
                                         static_cast<double>(row_total);
    }
  }
}

namespace {

int require_label(const LabelMap& labels, const std::string& user, int month) {
  auto label = labels.label(user, month);
  if (!label) {
    throw std::runtime_error("label map is not total on eligible pairs: " +
                             user + " @ " + std::to_string(month));
  }
  return *label;
}

}  // namespace

CtpResult estimate_ctp(const SnapshotSequence& seq, const LabelMap& labels,
                       const PersistenceResult& persistence, int conditioning,
                       ExposureKind kind, int k) {
  return estimate_ctp_batch(seq, labels, persistence, {{conditioning, kind}},
                            k)[0];
}

std::vector<CtpResult> estimate_ctp_batch(
    const SnapshotSequence& seq, const LabelMap& labels,
    const PersistenceResult& persistence,
    const std::vector<std::pair<int, ExposureKind>>& targets, int k) {
  std::vector<CtpResult> results(targets.size());
  std::vector<std::unordered_set<std::string>> affected(targets.size());
  for (std::size_t t_idx = 0; t_idx < targets.size(); ++t_idx) {
    results[t_idx].conditioning = targets[t_idx].first;
    results[t_idx].kind = targets[t_idx].second;
    results[t_idx].matrix = TransitionMatrix::zeros(k);
  }
  for (const auto& [user, t] : persistence.eligible) {
    if (t < 0 || static_cast<std::size_t>(t) >= seq.months()) continue;
    const auto& g = seq.graphs[static_cast<std::size_t>(t)];
    const auto& h = seq.hypergraphs[static_cast<std::size_t>(t)];
    LabelMultiset pairwise;
    if (g.nodes.count(user)) pairwise = graph_neighborhood_labels(g, labels, user);
    LabelMultiset contexts;
    if (h.nodes.count(user)) {
      contexts = hyper_neighborhood_characteristic_labels(h, labels, user);
    }
    if (pairwise.empty() && contexts.empty()) continue;
    const int pairwise_majority = most_frequent_label(pairwise);
    const int context_majority = most_frequent_label(contexts);
    int from = -1;
    int to = -1;
    for (std::size_t t_idx = 0; t_idx < targets.size(); ++t_idx) {
      const auto& [conditioning, kind] = targets[t_idx];
      bool hit = false;
      switch (kind) {
        case ExposureKind::kSingleInteraction:
          hit = pairwise.count(conditioning) > 0;
          break;
        case ExposureKind::kMajorityInteractions:
          hit = !pairwise.empty() && pairwise_majority == conditioning;
          break;
        case ExposureKind::kSingleHomogeneousContext:
          hit = contexts.count(conditioning) > 0;
          break;
        case ExposureKind::kMajorityHomogeneousContexts:
          hit = !contexts.empty() && context_majority == conditioning;
          break;
      }
      if (!hit) continue;
      if (from < 0) {
        from = require_label(labels, user, t);
        to = require_label(labels, user, t + 1);
      }
      ++results[t_idx].matrix.counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
      affected[t_idx].insert(user);
    }
  }
  for (std::size_t t_idx = 0; t_idx < targets.size(); ++t_idx) {
    results[t_idx].matrix.normalize();
    results[t_idx].degenerate = affected[t_idx].empty();
    results[t_idx].users_affected =
        persistence.persistent_users == 0
            ? 0.0
            : static_cast<double>(affected[t_idx].size()) /
                  static_cast<double>(persistence.persistent_users);
  }
  return results;
}

TransitionMatrix estimate_tp(const LabelMap& labels,
                             const PersistenceResult& persistence, int k) {
  TransitionMatrix matrix = TransitionMatrix::zeros(k);
  for (const auto& [user, t] : persistence.eligible) {
    const int from = require_label(labels, user, t);
    const int to = require_label(labels, user, t + 1);
    ++matrix.counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  }
  matrix.normalize();
  return matrix;
}

void write_transition_matrix(const TransitionMatrix& matrix,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write transition matrix: " + path);
  out << "from,to,count,prob\n";
  char buf[32];
  for (int i = 0; i < matrix.k; ++i) {
    for (int j = 0; j < matrix.k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    matrix.probs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      out << i << ',' << j << ','
          << matrix.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] << ','
          << buf << '\n';
    }
  }
}

TransitionMatrix read_transition_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transition matrix: " + path);
  std::vector<std::tuple<int, int, long long>> cells;
  int k = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string from, to, count, prob;
    std::getline(ss, from, ',');
    std::getline(ss, to, ',');
    std::getline(ss, count, ',');
    std::getline(ss, prob, ',');
    cells.emplace_back(std::stoi(from), std::stoi(to), std::stoll(count));
    k = std::max({k, std::stoi(from) + 1, std::stoi(to) + 1});
  }
  TransitionMatrix matrix = TransitionMatrix::zeros(k);
  for (const auto& [i, j, c] : cells) {
    matrix.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
  }
  matrix.normalize();
  return matrix;
}

void write_ctp_summary(const std::vector<CtpResult>& results,
                       const PersistenceResult& persistence,
                       const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["total_users"] = persistence.total_users;
  j["persistent_users"] = persistence.persistent_users;
  j["dropped_fraction"] = persistence.dropped_fraction;
  j["eligible_pairs"] = persistence.eligible.size();
  auto arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"conditioning", r.conditioning},
                   {"kind", exposure_kind_name(r.kind)},
                   {"users_affected", r.users_affected},
                   {"degenerate", r.degenerate}});
  }
  j["ctp"] = arr;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ctp summary: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace statetrails
