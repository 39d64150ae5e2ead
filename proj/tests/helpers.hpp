#ifndef STATETRAILS_TESTS_HELPERS_HPP
#define STATETRAILS_TESTS_HELPERS_HPP

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "statetrails/ingest.hpp"
#include "statetrails/textprep.hpp"
#include "statetrails/types.hpp"

namespace testutil {

// unique scratch dir, removed on destruction
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("statetrails_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 2018-05-01T00:00:00Z, the default corpus start used by fixtures
inline constexpr std::int64_t kStart = 1525132800;
// 2020-05-01T00:00:00Z
inline constexpr std::int64_t kEnd = 1588291200;

inline statetrails::CleaningConfig fixture_config() {
  statetrails::CleaningConfig cfg;
  cfg.language_filter_enabled = false;
  cfg.min_interaction_partners = 0;
  cfg.start_utc = kStart;
  cfg.end_utc = kEnd;
  return cfg;
}

inline statetrails::RawPost make_post(const std::string& id,
                                      const std::string& author,
                                      const std::string& text,
                                      std::int64_t ts = kStart + 1000) {
  statetrails::RawPost p;
  p.id = id;
  p.author = author;
  p.selftext = text;
  p.title = "";
  p.created_utc = ts;
  return p;
}

inline statetrails::RawComment make_comment(const std::string& id,
                                            const std::string& author,
                                            const std::string& text,
                                            const std::string& link_id,
                                            const std::string& parent_id,
                                            std::int64_t ts = kStart + 2000) {
  statetrails::RawComment c;
  c.id = id;
  c.author = author;
  c.body = text;
  c.link_id = link_id;
  c.parent_id = parent_id;
  c.created_utc = ts;
  return c;
}

// minimal in-memory lexicon used across scoring fixtures
inline statetrails::LexiconStore fixture_lexicons() {
  using statetrails::emotion_index;
  statetrails::LexiconStore lex;
  lex.emotion["happy"] = 1u << emotion_index("joy");
  lex.emotion["sad"] = 1u << emotion_index("sadness");
  lex.emotion["angry"] = 1u << emotion_index("anger");
  lex.emotion["scared"] = 1u << emotion_index("fear");
  lex.vad["calm"] = {0.7, 0.2, 0.6};
  lex.vad["tense"] = {0.3, 0.9, 0.4};
  lex.sentiment["good"] = 0.6;
  lex.sentiment["bad"] = -0.5;
  lex.taboo["damn"] = 0.8;
  lex.subjectivity["feel"] = 0.9;
  lex.subjectivity["fact"] = 0.1;
  return lex;
}

}  // namespace testutil

#endif
