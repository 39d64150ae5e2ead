#ifndef STATETRAILS_PROFILING_HPP
#define STATETRAILS_PROFILING_HPP

#include <string>
#include <vector>

#include "statetrails/textprep.hpp"
#include "statetrails/types.hpp"

namespace statetrails {

struct ScoredDocument {
  std::string author_id;
  int month = 0;
  FeatureVector features{};
};

// Rule-lite sentiment: negation window of 3 preceding tokens, 1.25x booster
// on the immediately preceding token, both components normalized by the
// total token count.
std::pair<double, double> score_sentiment(
    const std::vector<std::string>& tokens, const LexiconStore& lex);

FeatureVector score_text(const std::string& normalized_text,
                         const LexiconStore& lex);

inline ScoredDocument score_document(const Document& doc,
                                     const LexiconStore& lex) {
  return {doc.author_id, doc.month, score_text(doc.text, lex)};
}

std::vector<ScoredDocument> score_corpus(const std::vector<Document>& docs,
                                         const LexiconStore& lex);

// Unweighted per-document mean for every (author, month); output sorted by
// (author_id, month).
std::vector<UserMonthProfile> aggregate_monthly(
    const std::vector<ScoredDocument>& docs);

struct FeatureScreenReport {
  // symmetric, unit diagonal
  std::array<std::array<double, kFeatureCount>, kFeatureCount> pearson{};
  std::array<std::array<double, kFeatureCount>, kFeatureCount> pvalues{};
  std::array<double, kFeatureCount> variances{};
  std::vector<std::string> dropped;  // variance below threshold; report only
  double p_threshold = 0.001;
  double var_threshold = 0.0;
  std::size_t n_profiles = 0;
};

// Pearson r with two-sided p-values from the t distribution (n-2 dof).
// Requires at least 3 profiles.
FeatureScreenReport screen_features(
    const std::vector<UserMonthProfile>& profiles, double p_threshold,
    double var_threshold);

void write_profiles(const std::vector<UserMonthProfile>& profiles,
                    const std::string& path);
std::vector<UserMonthProfile> read_profiles(const std::string& path);
void write_screen_report(const FeatureScreenReport& report,
                         const std::string& path);

}  // namespace statetrails

#endif
