#include "statetrails/profiling.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace statetrails {

namespace {

const std::set<std::string>& negators() {
  static const std::set<std::string> words = {"not",  "no",   "never", "nt",
                                              "dont", "cant", "wont"};
  return words;
}

const std::set<std::string>& boosters() {
  static const std::set<std::string> words = {"very", "really", "extremely",
                                              "so"};
  return words;
}

constexpr double kBoosterFactor = 1.25;
constexpr int kNegationWindow = 3;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::pair<double, double> score_sentiment(
    const std::vector<std::string>& tokens, const LexiconStore& lex) {
  if (tokens.empty()) return {0.0, 0.0};
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto intensity = lex.sentiment_of(tokens[i]);
    if (!intensity) continue;
    double s = *intensity;
    if (i >= 1 && boosters().count(tokens[i - 1])) {
      s = std::copysign(std::min(1.0, std::abs(s) * kBoosterFactor), s);
    }
    for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
      if (negators().count(tokens[i - back])) {
        s = -s;
        break;
      }
    }
    if (s > 0.0) {
      pos_sum += s;
    } else {
      neg_sum += -s;
    }
  }
  const double denom = static_cast<double>(tokens.size());
  return {pos_sum / denom, neg_sum / denom};
}

FeatureVector score_text(const std::string& normalized_text,
                         const LexiconStore& lex) {
  const auto tokens = tokenize(normalized_text);
  FeatureVector out = default_feature_vector();
  out[kValence] = 0.5;
  out[kArousal] = 0.5;
  out[kDominance] = 0.5;
  if (tokens.empty()) return out;

  std::array<int, kEmotionCount> emotion_counts{};
  int emotional_tokens = 0;
  double vad_sums[3] = {0.0, 0.0, 0.0};
  int vad_matches = 0;
  double taboo_sum = 0.0;
  double subj_sum = 0.0;
  int subj_matches = 0;

  for (const auto& token : tokens) {
    if (auto mask = lex.emotions_of(token)) {
      if (*mask) {
        ++emotional_tokens;
        for (int e = 0; e < kEmotionCount; ++e) {
          if (*mask & (1u << e)) ++emotion_counts[static_cast<std::size_t>(e)];
        }
      }
    }
    if (auto vad = lex.vad_of(token)) {
      ++vad_matches;
      for (int i = 0; i < 3; ++i) vad_sums[i] += (*vad)[static_cast<std::size_t>(i)];
    }
    if (auto tab = lex.taboo_of(token)) taboo_sum += *tab;
    if (auto subj = lex.subjectivity_of(token)) {
      ++subj_matches;
      subj_sum += *subj;
    }
  }

  if (emotional_tokens > 0) {
    for (int e = 0; e < kEmotionCount; ++e) {
      out[static_cast<std::size_t>(e)] =
          static_cast<double>(emotion_counts[static_cast<std::size_t>(e)]) /
          emotional_tokens;
    }
  }
  if (vad_matches > 0) {
    out[kValence] = vad_sums[0] / vad_matches;
    out[kArousal] = vad_sums[1] / vad_matches;
    out[kDominance] = vad_sums[2] / vad_matches;
  }
  auto [pos, neg] = score_sentiment(tokens, lex);
  out[kSentPositive] = pos;
  out[kSentNegative] = neg;
  out[kTabooRate] = taboo_sum / static_cast<double>(tokens.size());
  out[kSubjectivity] = subj_matches > 0 ? subj_sum / subj_matches : 0.0;
  return out;
}

std::vector<ScoredDocument> score_corpus(const std::vector<Document>& docs,
                                         const LexiconStore& lex) {
  std::vector<ScoredDocument> scored;
  scored.reserve(docs.size());
  for (const auto& doc : docs) scored.push_back(score_document(doc, lex));
  return scored;
}

std::vector<UserMonthProfile> aggregate_monthly(
    const std::vector<ScoredDocument>& docs) {
  std::map<UserMonth, UserMonthProfile> acc;
  for (const auto& doc : docs) {
    auto& profile = acc[{doc.author_id, doc.month}];
    if (profile.n_docs == 0) {
      profile.author_id = doc.author_id;
      profile.month = doc.month;
      profile.features = FeatureVector{};
    }
    for (int f = 0; f < kFeatureCount; ++f) {
      profile.features[static_cast<std::size_t>(f)] += doc.features[static_cast<std::size_t>(f)];
    }
    ++profile.n_docs;
  }
  std::vector<UserMonthProfile> out;
  out.reserve(acc.size());
  for (auto& [key, profile] : acc) {
    for (auto& value : profile.features) value /= profile.n_docs;
    out.push_back(std::move(profile));
  }
  return out;
}

FeatureScreenReport screen_features(
    const std::vector<UserMonthProfile>& profiles, double p_threshold,
    double var_threshold) {
  const std::size_t n = profiles.size();
  if (n < 3) {
    throw std::runtime_error("screen_features requires at least 3 profiles");
  }
  FeatureScreenReport report;
  report.p_threshold = p_threshold;
  report.var_threshold = var_threshold;
  report.n_profiles = n;

  std::array<double, kFeatureCount> means{};
  for (const auto& p : profiles) {
    for (int f = 0; f < kFeatureCount; ++f) means[static_cast<std::size_t>(f)] += p.features[static_cast<std::size_t>(f)];
  }
  for (auto& m : means) m /= static_cast<double>(n);

  std::array<std::array<double, kFeatureCount>, kFeatureCount> cov{};
  for (const auto& p : profiles) {
    for (int a = 0; a < kFeatureCount; ++a) {
      const double da = p.features[static_cast<std::size_t>(a)] - means[static_cast<std::size_t>(a)];
      for (int b = a; b < kFeatureCount; ++b) {
        const double db = p.features[static_cast<std::size_t>(b)] - means[static_cast<std::size_t>(b)];
        cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += da * db;
      }
    }
  }

  for (int f = 0; f < kFeatureCount; ++f) {
    // sample variance
    report.variances[static_cast<std::size_t>(f)] =
        cov[static_cast<std::size_t>(f)][static_cast<std::size_t>(f)] / static_cast<double>(n - 1);
    if (report.variances[static_cast<std::size_t>(f)] < var_threshold) {
      report.dropped.emplace_back(kFeatureNames[static_cast<std::size_t>(f)]);
    }
  }

  const boost::math::students_t t_dist(static_cast<double>(n - 2));
  for (int a = 0; a < kFeatureCount; ++a) {
    for (int b = a; b < kFeatureCount; ++b) {
      double r;
      double p_value;
      if (a == b) {
        r = 1.0;
        p_value = 0.0;
      } else {
        const double denom = std::sqrt(cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] *
                                       cov[static_cast<std::size_t>(b)][static_cast<std::size_t>(b)]);
        if (denom == 0.0) {
          // constant column: correlation undefined, reported as null effect
          r = 0.0;
          p_value = 1.0;
        } else {
          r = cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] / denom;
          r = std::clamp(r, -1.0, 1.0);
          if (std::abs(r) >= 1.0) {
            p_value = 0.0;
          } else {
            const double t = r * std::sqrt((static_cast<double>(n) - 2.0) /
                                           (1.0 - r * r));
            p_value = 2.0 * boost::math::cdf(
                                boost::math::complement(t_dist, std::abs(t)));
          }
        }
      }
      report.pearson[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = r;
      report.pearson[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = r;
      report.pvalues[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = p_value;
      report.pvalues[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = p_value;
    }
  }
  return report;
}

void write_profiles(const std::vector<UserMonthProfile>& profiles,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profiles: " + path);
  out << "author_id,month";
  for (const auto* name : kFeatureNames) out << ',' << name;
  out << ",n_docs\n";
  for (const auto& p : profiles) {
    out << p.author_id << ',' << p.month;
    for (double v : p.features) out << ',' << format_double(v);
    out << ',' << p.n_docs << '\n';
  }
}

std::vector<UserMonthProfile> read_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profiles: " + path);
  std::vector<UserMonthProfile> profiles;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 2 + kFeatureCount + 1) {
      throw std::runtime_error(path + ": bad profile row: " + line);
    }
    UserMonthProfile p;
    p.author_id = fields[0];
    p.month = std::stoi(fields[1]);
    for (int f = 0; f < kFeatureCount; ++f) {
      p.features[static_cast<std::size_t>(f)] = std::stod(fields[static_cast<std::size_t>(f) + 2]);
    }
    p.n_docs = std::stoi(fields[2 + kFeatureCount]);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void write_screen_report(const FeatureScreenReport& report,
                         const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n_profiles"] = report.n_profiles;
  j["p_threshold"] = report.p_threshold;
  j["var_threshold"] = report.var_threshold;
  j["features"] = kFeatureNames;
  j["pearson"] = report.pearson;
  j["pvalues"] = report.pvalues;
  j["variances"] = report.variances;
  j["dropped"] = report.dropped;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write screen report: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace statetrails
