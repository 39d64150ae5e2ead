#ifndef STATETRAILS_CLUSTERING_HPP
#define STATETRAILS_CLUSTERING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "statetrails/types.hpp"

namespace statetrails {

struct ClusterModel {
  int k = 0;
  std::vector<FeatureVector> centroids;
  LabelMap assignments;
  double inertia = 0.0;
  std::vector<int> sizes;             // per canonical label
  std::vector<double> inertia_trace;  // after each assignment step
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for fixed
// (profiles, k, seed): inputs are canonically sorted before seeding. Labels
// are canonicalized by descending cluster size. Empty clusters are reseeded
// at the point farthest from its assigned centroid.
ClusterModel kmeans(const std::vector<UserMonthProfile>& profiles, int k,
                    std::uint64_t seed, int max_iter = 100, double tol = 1e-9);

struct ElbowCurve {
  std::vector<int> ks;
  std::vector<double> inertias;
  int chosen_k = 0;
};

// Inertia across ks (ascending, at least 3 values); chosen_k maximizes the
// discrete second difference of the inertia curve over interior ks.
ElbowCurve elbow(const std::vector<UserMonthProfile>& profiles,
                 const std::vector<int>& ks, std::uint64_t seed);

struct ClusterTermSummary {
  int label = 0;
  std::vector<std::pair<std::string, double>> top_terms;  // score descending
  bool empty_class = false;
};

// Class-based TF-IDF: score(t,c) = tf(t,c) * ln(1 + A / f(t)) over
// suffix-stripped tokens, with the corpus-wide top-50 document-frequency
// terms excluded as stopwords.
std::vector<ClusterTermSummary> ctfidf_terms(
    const std::map<int, std::vector<std::string>>& texts_by_label,
    int n_terms = 8);

void write_cluster_model(const ClusterModel& model, const std::string& path);
void write_assignments(const LabelMap& labels, const std::string& path);
LabelMap read_assignments(const std::string& path);
void write_elbow(const ElbowCurve& curve, const std::string& path);
void write_term_summaries(const std::vector<ClusterTermSummary>& summaries,
                          const std::string& path);

}  // namespace statetrails

#endif
