#include "statetrails/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "statetrails/random.hpp"
#include "statetrails/textprep.hpp"

namespace statetrails {

namespace {

double sq_dist(const FeatureVector& a, const FeatureVector& b) {
  double d2 = 0.0;
  for (int f = 0; f < kFeatureCount; ++f) {
    const double d = a[static_cast<std::size_t>(f)] - b[static_cast<std::size_t>(f)];
    d2 += d * d;
  }
  return d2;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

namespace {

struct LloydFit {
  std::vector<FeatureVector> centroids;
  std::vector<int> assign;
  std::vector<int> counts;
  std::vector<double> trace;  // inertia after each assignment step
  int iterations = 0;
  double inertia() const { return trace.empty() ? 0.0 : trace.back(); }
};

LloydFit lloyd_run(const std::vector<const FeatureVector*>& points, int k,
                   std::uint64_t seed, int max_iter, double tol) {
  const std::size_t n = points.size();
  Rng rng(seed);
  std::vector<FeatureVector> centroids;
  centroids.reserve(static_cast<std::size_t>(k));

  // k-means++ seeding
  centroids.push_back(*points[rng.next_below(n)]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& centroid : centroids) {
        best = std::min(best, sq_dist(*points[i], centroid));
      }
      d2[i] = best;
    }
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick;
    if (total > 0.0) {
      pick = rng.next_weighted(d2);
    } else {
      pick = rng.next_below(n);  // all points coincide with a centroid
    }
    centroids.push_back(*points[pick]);
  }

  LloydFit model;
  std::vector<int>& assign = model.assign;
  assign.assign(n, -1);
  std::vector<int>& counts = model.counts;
  counts.assign(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment
    bool changed = false;
    double inertia = 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = sq_dist(*points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(*points[i], centroids[static_cast<std::size_t>(c)]);
        if (d < best_d2) {
          best_d2 = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
      ++counts[static_cast<std::size_t>(best)];
      inertia += best_d2;
    }
    model.trace.push_back(inertia);
    model.iterations = iter + 1;
    if (!changed && iter > 0) break;

    // update
    std::vector<FeatureVector> next(static_cast<std::size_t>(k), FeatureVector{});
    for (std::size_t i = 0; i < n; ++i) {
      for (int f = 0; f < kFeatureCount; ++f) {
        next[static_cast<std::size_t>(assign[i])][static_cast<std::size_t>(f)] +=
            (*points[i])[static_cast<std::size_t>(f)];
      }
    }
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      for (auto& value : next[static_cast<std::size_t>(c)]) {
        value /= counts[static_cast<std::size_t>(c)];
      }
      max_shift = std::max(max_shift, sq_dist(next[static_cast<std::size_t>(c)],
                                              centroids[static_cast<std::size_t>(c)]));
    }

    // empty-cluster repair: reseed at the point farthest from its centroid
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t farthest = 0;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = sq_dist(*points[i], next[static_cast<std::size_t>(assign[i])]);
        if (d > far_d2) {
          far_d2 = d;
          farthest = i;
        }
      }
      next[static_cast<std::size_t>(c)] = *points[farthest];
      taken[farthest] = true;
      max_shift = std::numeric_limits<double>::max();  // force another pass
    }

    centroids = std::move(next);
    if (max_shift < tol) {
      // one final assignment against the settled centroids
      std::fill(counts.begin(), counts.end(), 0);
      double final_inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d2 = sq_dist(*points[i], centroids[0]);
        for (int c = 1; c < k; ++c) {
          const double d = sq_dist(*points[i], centroids[static_cast<std::size_t>(c)]);
          if (d < best_d2) {
            best_d2 = d;
            best = c;
          }
        }
        assign[i] = best;
        ++counts[static_cast<std::size_t>(best)];
        final_inertia += best_d2;
      }
      model.trace.push_back(final_inertia);
      break;
    }
  }
  return model;
}

constexpr int kRestarts = 8;

}  // namespace

ClusterModel kmeans(const std::vector<UserMonthProfile>& profiles, int k,
                    std::uint64_t seed, int max_iter, double tol) {
  const std::size_t n = profiles.size();
  if (k < 1) throw std::runtime_error("kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > n) {
    throw std::runtime_error("kmeans: k exceeds the number of profiles");
  }
  if (max_iter < 1) throw std::runtime_error("kmeans: max_iter must be >= 1");

  // canonical input order, independent of caller ordering
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(profiles[a].author_id, profiles[a].month) <
           std::tie(profiles[b].author_id, profiles[b].month);
  });
  std::vector<const FeatureVector*> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = &profiles[order[i]].features;

  // restarts guard against poor local optima from a single seeding
  LloydFit fit = lloyd_run(points, k, derive_seed(seed, "restart", 0), max_iter, tol);
  for (int r = 1; r < kRestarts; ++r) {
    LloydFit candidate = lloyd_run(
        points, k, derive_seed(seed, "restart", static_cast<std::uint64_t>(r)),
        max_iter, tol);
    if (candidate.inertia() < fit.inertia()) fit = std::move(candidate);
  }
  const std::vector<int>& assign = fit.assign;
  std::vector<int>& counts = fit.counts;

  // recompute exact means and inertia for the final assignment
  std::vector<FeatureVector> means(static_cast<std::size_t>(k), FeatureVector{});
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(assign[i])];
    for (int f = 0; f < kFeatureCount; ++f) {
      means[static_cast<std::size_t>(assign[i])][static_cast<std::size_t>(f)] +=
          (*points[i])[static_cast<std::size_t>(f)];
    }
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      for (auto& value : means[static_cast<std::size_t>(c)]) {
        value /= counts[static_cast<std::size_t>(c)];
      }
    }
  }

  // canonical labels: descending size, ties by original index
  std::vector<int> label_order(static_cast<std::size_t>(k));
  std::iota(label_order.begin(), label_order.end(), 0);
  std::sort(label_order.begin(), label_order.end(), [&](int a, int b) {
    if (counts[static_cast<std::size_t>(a)] != counts[static_cast<std::size_t>(b)]) {
      return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  std::vector<int> relabel(static_cast<std::size_t>(k));
  for (int pos = 0; pos < k; ++pos) {
    relabel[static_cast<std::size_t>(label_order[static_cast<std::size_t>(pos)])] = pos;
  }

  ClusterModel model;
  model.inertia_trace = fit.trace;
  model.iterations = fit.iterations;
  model.k = k;
  model.centroids.resize(static_cast<std::size_t>(k));
  model.sizes.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    model.centroids[static_cast<std::size_t>(relabel[static_cast<std::size_t>(c)])] =
        means[static_cast<std::size_t>(c)];
    model.sizes[static_cast<std::size_t>(relabel[static_cast<std::size_t>(c)])] =
        counts[static_cast<std::size_t>(c)];
  }
  model.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = relabel[static_cast<std::size_t>(assign[i])];
    const auto& profile = profiles[order[i]];
    model.assignments.set(profile.author_id, profile.month, label);
    model.inertia += sq_dist(*points[i], model.centroids[static_cast<std::size_t>(label)]);
  }
  return model;
}

ElbowCurve elbow(const std::vector<UserMonthProfile>& profiles,
                 const std::vector<int>& ks, std::uint64_t seed) {
  if (ks.size() < 3) {
    throw std::runtime_error("elbow: need at least 3 k values");
  }
  if (!std::is_sorted(ks.begin(), ks.end()) || ks.front() < 1) {
    throw std::runtime_error("elbow: ks must be ascending and >= 1");
  }
  ElbowCurve curve;
  curve.ks = ks;
  for (int k : ks) {
    auto model = kmeans(profiles, k, derive_seed(seed, "elbow", static_cast<std::uint64_t>(k)));
    curve.inertias.push_back(model.inertia);
  }
  // maximum-curvature knee over interior points
  double best = -std::numeric_limits<double>::max();
  std::size_t best_i = 1;
  for (std::size_t i = 1; i + 1 < curve.inertias.size(); ++i) {
    const double curvature =
        curve.inertias[i - 1] - 2.0 * curve.inertias[i] + curve.inertias[i + 1];
    if (curvature > best) {
      best = curvature;
      best_i = i;
    }
  }
  curve.chosen_k = curve.ks[best_i];
  return curve;
}

std::vector<ClusterTermSummary> ctfidf_terms(
    const std::map<int, std::vector<std::string>>& texts_by_label,
    int n_terms) {
  // lemmatized token counts per class, plus document frequency for stopwords
  std::map<int, std::map<std::string, std::size_t>> class_counts;
  std::map<int, std::size_t> class_tokens;
  std::map<std::string, std::size_t> corpus_counts;
  std::map<std::string, std::size_t> doc_frequency;

  for (const auto& [label, texts] : texts_by_label) {
    auto& counts = class_counts[label];
    auto& total = class_tokens[label];
    for (const auto& text : texts) {
      std::set<std::string> seen_in_doc;
      for (const auto& token : tokenize(text)) {
        const std::string lemma = strip_suffix(token);
        ++counts[lemma];
        ++corpus_counts[lemma];
        ++total;
        seen_in_doc.insert(lemma);
      }
      for (const auto& lemma : seen_in_doc) ++doc_frequency[lemma];
    }
  }

  // corpus-wide stopwords: top 50 by document frequency
  std::vector<std::pair<std::string, std::size_t>> by_df(doc_frequency.begin(),
                                                         doc_frequency.end());
  std::sort(by_df.begin(), by_df.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<std::string> stopwords;
  for (std::size_t i = 0; i < by_df.size() && i < 50; ++i) {
    stopwords.insert(by_df[i].first);
  }

  std::size_t total_tokens = 0;
  for (const auto& [label, count] : class_tokens) total_tokens += count;
  const double mean_class_tokens =
      texts_by_label.empty()
          ? 0.0
          : static_cast<double>(total_tokens) /
                static_cast<double>(texts_by_label.size());

  std::vector<ClusterTermSummary> summaries;
  for (const auto& [label, counts] : class_counts) {
    ClusterTermSummary summary;
    summary.label = label;
    if (class_tokens[label] == 0) {
      summary.empty_class = true;
      summaries.push_back(std::move(summary));
      continue;
    }
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [term, count] : counts) {
      if (stopwords.count(term)) continue;
      const double tf = static_cast<double>(count) /
                        static_cast<double>(class_tokens[label]);
      const double idf = std::log(
          1.0 + mean_class_tokens / static_cast<double>(corpus_counts[term]));
      scored.emplace_back(term, tf * idf);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(n_terms)) {
      scored.resize(static_cast<std::size_t>(n_terms));
    }
    summary.top_terms = std::move(scored);
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

void write_cluster_model(const ClusterModel& model, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["k"] = model.k;
  j["inertia"] = model.inertia;
  j["sizes"] = model.sizes;
  j["iterations"] = model.iterations;
  auto centroids = nlohmann::json::array();
  for (const auto& c : model.centroids) {
    nlohmann::json row;
    for (int f = 0; f < kFeatureCount; ++f) {
      row[kFeatureNames[static_cast<std::size_t>(f)]] = c[static_cast<std::size_t>(f)];
    }
    centroids.push_back(row);
  }
  j["centroids"] = centroids;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cluster model: " + path);
  out << j.dump(2) << '\n';
}

void write_assignments(const LabelMap& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write assignments: " + path);
  out << "author_id,month,label\n";
  for (const auto& [key, label] : labels.entries()) {
    out << key.first << ',' << key.second << ',' << label << '\n';
  }
}

LabelMap read_assignments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open assignments: " + path);
  LabelMap labels;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string author, month, label;
    if (!std::getline(ss, author, ',') || !std::getline(ss, month, ',') ||
        !std::getline(ss, label, ',')) {
      throw std::runtime_error(path + ": bad assignment row: " + line);
    }
    labels.set(author, std::stoi(month), std::stoi(label));
  }
  return labels;
}

void write_elbow(const ElbowCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write elbow curve: " + path);
  out << "k,inertia,chosen\n";
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    out << curve.ks[i] << ',' << format_double(curve.inertias[i]) << ','
        << (curve.ks[i] == curve.chosen_k ? 1 : 0) << '\n';
  }
}

void write_term_summaries(const std::vector<ClusterTermSummary>& summaries,
                          const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  auto arr = nlohmann::json::array();
  for (const auto& s : summaries) {
    nlohmann::json entry;
    entry["label"] = s.label;
    entry["empty_class"] = s.empty_class;
    auto terms = nlohmann::json::array();
    for (const auto& [term, score] : s.top_terms) {
      terms.push_back({{"term", term}, {"score", score}});
    }
    entry["top_terms"] = terms;
    arr.push_back(entry);
  }
  j["clusters"] = arr;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write term summaries: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace statetrails
