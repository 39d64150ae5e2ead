#ifndef STATETRAILS_TEXTPREP_HPP
#define STATETRAILS_TEXTPREP_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statetrails/types.hpp"

namespace statetrails {

// Lowercase; strip URLs, markup tags, control characters and punctuation;
// collapse whitespace. Idempotent.
std::string normalize(std::string_view raw);

// Whitespace split of an already-normalized string.
std::vector<std::string> tokenize(std::string_view cleaned);

// Crude s/es/ed/ing stemmer. Used as the lemma for term summaries and as the
// lookup fallback for lexicon scoring. Returns the word itself when no
// suffix applies or the stem would drop below two characters.
std::string strip_suffix(const std::string& word);

struct LexiconLoadReport {
  std::size_t emotion_entries = 0;
  std::size_t vad_entries = 0;
  std::size_t sentiment_entries = 0;
  std::size_t taboo_entries = 0;
  std::size_t subjectivity_entries = 0;
  std::vector<std::string> warnings;
};

class LexiconStore {
 public:
  // bit i of an emotion mask corresponds to Feature i, i in [0, 8)
  std::map<std::string, std::uint8_t> emotion;
  std::map<std::string, std::array<double, 3>> vad;  // valence, arousal, dominance
  std::map<std::string, double> sentiment;           // signed intensity in [-1, 1]
  std::map<std::string, double> taboo;               // [0, 1]
  std::map<std::string, double> subjectivity;        // [0, 1]

  // Lookups try the surface form first, then the s/es/ed/ing fallbacks.
  std::optional<std::uint8_t> emotions_of(const std::string& word) const;
  std::optional<std::array<double, 3>> vad_of(const std::string& word) const;
  std::optional<double> sentiment_of(const std::string& word) const;
  std::optional<double> taboo_of(const std::string& word) const;
  std::optional<double> subjectivity_of(const std::string& word) const;
};

int emotion_index(std::string_view name);  // -1 when unknown

// Loads the five TSV lexicons from `dir` (emotion.tsv, vad.tsv,
// sentiment.tsv, taboo.tsv, subjectivity.tsv). Throws std::runtime_error
// naming file and line on malformed rows, out-of-range values or duplicates.
LexiconStore load_lexicons(const std::string& dir,
                           LexiconLoadReport* report = nullptr);

}  // namespace statetrails

#endif
