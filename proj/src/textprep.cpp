#include "statetrails/textprep.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace statetrails {

namespace {

bool is_space_like(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool starts_url(const std::string& s, std::size_t i) {
  if (s.compare(i, 7, "http://") == 0) return true;
  if (s.compare(i, 8, "https://") == 0) return true;
  if (s.compare(i, 4, "www.") == 0) {
    // only at token start, so "awww.cool" survives
    return i == 0 || is_space_like(s[i - 1]);
  }
  return false;
}

}  // namespace

std::string normalize(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (char c : raw) {
    unsigned char uc = static_cast<unsigned char>(c);
    s.push_back(uc < 128 ? static_cast<char>(std::tolower(uc)) : c);
  }

  // drop URLs and <...> tags
  std::string stripped;
  stripped.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (starts_url(s, i)) {
      while (i < s.size() && !is_space_like(s[i])) ++i;
      continue;
    }
    if (s[i] == '<') {
      std::size_t close = s.find('>', i + 1);
      if (close != std::string::npos && close - i <= 256) {
        i = close + 1;
        continue;
      }
    }
    stripped.push_back(s[i]);
    ++i;
  }

  // control chars out, punctuation to spaces, collapse runs
  std::string out;
  out.reserve(stripped.size());
  bool pending_space = false;
  for (char c : stripped) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (is_space_like(c)) {
      pending_space = true;
      continue;
    }
    if (uc < 0x20 || uc == 0x7f) continue;  // non-printable
    if (uc < 128 && std::ispunct(uc)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(' ', start);
    if (end == std::string_view::npos) end = cleaned.size();
    if (end > start) tokens.emplace_back(cleaned.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

namespace {

constexpr std::array<std::string_view, 4> kSuffixes = {"s", "es", "ed", "ing"};

std::vector<std::string> fallback_stems(const std::string& word) {
  std::vector<std::string> stems;
  for (auto suf : kSuffixes) {
    if (word.size() > suf.size() && word.ends_with(suf) &&
        word.size() - suf.size() >= 2) {
      stems.push_back(word.substr(0, word.size() - suf.size()));
    }
  }
  return stems;
}

template <class Map>
auto lookup(const Map& map, const std::string& word)
    -> std::optional<typename Map::mapped_type> {
  auto it = map.find(word);
  if (it != map.end()) return it->second;
  for (const auto& stem : fallback_stems(word)) {
    it = map.find(stem);
    if (it != map.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace

std::string strip_suffix(const std::string& word) {
  for (auto suf : kSuffixes) {
    if (word.size() > suf.size() && word.ends_with(suf) &&
        word.size() - suf.size() >= 2) {
      return word.substr(0, word.size() - suf.size());
    }
  }
  return word;
}

std::optional<std::uint8_t> LexiconStore::emotions_of(
    const std::string& word) const {
  return lookup(emotion, word);
}
std::optional<std::array<double, 3>> LexiconStore::vad_of(
    const std::string& word) const {
  return lookup(vad, word);
}
std::optional<double> LexiconStore::sentiment_of(const std::string& word) const {
  return lookup(sentiment, word);
}
std::optional<double> LexiconStore::taboo_of(const std::string& word) const {
  return lookup(taboo, word);
}
std::optional<double> LexiconStore::subjectivity_of(
    const std::string& word) const {
  return lookup(subjectivity, word);
}

int emotion_index(std::string_view name) {
  for (int i = 0; i < kEmotionCount; ++i) {
    if (name == kFeatureNames[static_cast<std::size_t>(i)]) return i;
  }
  return -1;
}

namespace {

struct TsvRow {
  std::vector<std::string> fields;
  std::size_t line_no = 0;
};

[[noreturn]] void load_fail(const std::string& file, std::size_t line,
                            const std::string& msg) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + msg);
}

std::vector<TsvRow> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  std::vector<TsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    TsvRow row;
    row.line_no = line_no;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        row.fields.push_back(line.substr(start));
        break;
      }
      row.fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string check_word(const std::string& file, const TsvRow& row) {
  std::string word = row.fields[0];
  if (word.empty()) load_fail(file, row.line_no, "empty word");
  if (word.find(' ') != std::string::npos) {
    load_fail(file, row.line_no, "multiword entries are not supported: '" +
                                     word + "'");
  }
  for (char& c : word) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc < 128) c = static_cast<char>(std::tolower(uc));
  }
  return word;
}

double parse_value(const std::string& file, const TsvRow& row,
                   const std::string& field, double lo, double hi) {
  double v = 0.0;
  std::size_t pos = 0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    load_fail(file, row.line_no, "not a number: '" + field + "'");
  }
  if (pos != field.size()) {
    load_fail(file, row.line_no, "not a number: '" + field + "'");
  }
  if (v < lo || v > hi) {
    load_fail(file, row.line_no,
              "value " + field + " outside [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "]");
  }
  return v;
}

void want_fields(const std::string& file, const TsvRow& row, std::size_t n) {
  if (row.fields.size() != n) {
    load_fail(file, row.line_no,
              "expected " + std::to_string(n) + " tab-separated fields, got " +
                  std::to_string(row.fields.size()));
  }
}

template <class Map, class Value>
void insert_unique(const std::string& file, const TsvRow& row, Map& map,
                   const std::string& word, Value value) {
  if (!map.emplace(word, value).second) {
    load_fail(file, row.line_no, "duplicate key '" + word + "'");
  }
}

}  // namespace

LexiconStore load_lexicons(const std::string& dir, LexiconLoadReport* report) {
  namespace fs = std::filesystem;
  LexiconStore store;
  LexiconLoadReport local;
  LexiconLoadReport& rep = report ? *report : local;

  const std::string emotion_path = (fs::path(dir) / "emotion.tsv").string();
  for (const auto& row : read_tsv(emotion_path)) {
    want_fields(emotion_path, row, 2);
    std::string word = check_word(emotion_path, row);
    int idx = emotion_index(row.fields[1]);
    if (idx < 0) {
      load_fail(emotion_path, row.line_no,
                "unknown emotion '" + row.fields[1] + "'");
    }
    std::uint8_t bit = static_cast<std::uint8_t>(1u << idx);
    auto [it, inserted] = store.emotion.emplace(word, bit);
    if (!inserted) {
      if (it->second & bit) {
        load_fail(emotion_path, row.line_no,
                  "duplicate key '" + word + "\t" + row.fields[1] + "'");
      }
      it->second |= bit;
    }
    ++rep.emotion_entries;
  }

  const std::string vad_path = (fs::path(dir) / "vad.tsv").string();
  for (const auto& row : read_tsv(vad_path)) {
    want_fields(vad_path, row, 4);
    std::string word = check_word(vad_path, row);
    std::array<double, 3> v{};
    for (int i = 0; i < 3; ++i) {
      v[static_cast<std::size_t>(i)] =
          parse_value(vad_path, row, row.fields[static_cast<std::size_t>(i + 1)], 0.0, 1.0);
    }
    insert_unique(vad_path, row, store.vad, word, v);
    ++rep.vad_entries;
  }

  const std::string sent_path = (fs::path(dir) / "sentiment.tsv").string();
  for (const auto& row : read_tsv(sent_path)) {
    want_fields(sent_path, row, 2);
    std::string word = check_word(sent_path, row);
    double v = parse_value(sent_path, row, row.fields[1], -1.0, 1.0);
    insert_unique(sent_path, row, store.sentiment, word, v);
    ++rep.sentiment_entries;
  }

  const std::string taboo_path = (fs::path(dir) / "taboo.tsv").string();
  for (const auto& row : read_tsv(taboo_path)) {
    want_fields(taboo_path, row, 2);
    std::string word = check_word(taboo_path, row);
    double v = parse_value(taboo_path, row, row.fields[1], 0.0, 1.0);
    insert_unique(taboo_path, row, store.taboo, word, v);
    ++rep.taboo_entries;
  }

  const std::string subj_path = (fs::path(dir) / "subjectivity.tsv").string();
  for (const auto& row : read_tsv(subj_path)) {
    want_fields(subj_path, row, 2);
    std::string word = check_word(subj_path, row);
    double v = parse_value(subj_path, row, row.fields[1], 0.0, 1.0);
    insert_unique(subj_path, row, store.subjectivity, word, v);
    ++rep.subjectivity_entries;
  }

  auto warn_if_empty = [&rep](std::size_t n, const char* name) {
    if (n == 0) {
      rep.warnings.push_back(std::string("lexicon '") + name + "' is empty");
    }
  };
  warn_if_empty(rep.emotion_entries, "emotion");
  warn_if_empty(rep.vad_entries, "vad");
  warn_if_empty(rep.sentiment_entries, "sentiment");
  warn_if_empty(rep.taboo_entries, "taboo");
  warn_if_empty(rep.subjectivity_entries, "subjectivity");
  return store;
}

}  // namespace statetrails
