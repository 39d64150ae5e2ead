#ifndef STATETRAILS_INGEST_HPP
#define STATETRAILS_INGEST_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "statetrails/types.hpp"

namespace statetrails {

struct RawPost {
  std::string id;
  std::string author;
  std::string selftext;
  std::string title;
  std::int64_t created_utc = 0;
};

struct RawComment {
  std::string id;
  std::string author;
  std::string body;
  std::string link_id;    // thread root post id
  std::string parent_id;  // parent post or comment id
  std::int64_t created_utc = 0;
};

struct CleaningConfig {
  std::set<std::string> bot_list;
  std::set<std::string> moderator_list;
  bool language_filter_enabled = true;
  int min_interaction_partners = 1;
  std::int64_t start_utc = 0;
  std::int64_t end_utc = 0;

  static CleaningConfig from_json_file(const std::string& path);
  void validate() const;  // throws on violated invariants
};

struct IngestReport {
  std::size_t posts_read = 0;
  std::size_t comments_read = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t out_of_range = 0;
  std::size_t excluded_author = 0;  // bot or moderator list
  std::size_t deleted_author = 0;
  std::size_t empty_text = 0;
  std::size_t non_english = 0;
  std::size_t orphan_comments = 0;  // parent_id unresolved, re-attached to root
  std::size_t users_dropped_few_partners = 0;
  std::size_t docs_dropped_few_partners = 0;
  std::size_t documents_out = 0;
  std::size_t users_out = 0;
};

struct IngestResult {
  std::vector<Document> documents;  // sorted by (month, doc_id)
  ThreadForest forest;
  IngestReport report;
};

// Irreversible keyed pseudonym: sha256(salt || 0x00 || name), hex.
std::string pseudonymize(const std::string& name, const std::string& salt);

// Whole calendar months elapsed (UTC) between the start month and the
// timestamp's month. Throws when created_utc < corpus_start_utc.
int month_index(std::int64_t created_utc, std::int64_t corpus_start_utc);

// English heuristic: keep when function-word occurrences reach 2 per 50
// tokens (25 * count >= token_count).
bool looks_english(const std::vector<std::string>& tokens);

// Core cleaning pass over in-memory records.
IngestResult clean_corpus(const std::vector<RawPost>& posts,
                          const std::vector<RawComment>& comments,
                          const CleaningConfig& config,
                          const std::string& salt);

// NDJSON front end; malformed lines are counted, not fatal.
IngestResult load_corpus(const std::string& posts_path,
                         const std::string& comments_path,
                         const CleaningConfig& config, const std::string& salt);

void write_documents(const std::vector<Document>& docs,
                     const std::string& path);
std::vector<Document> read_documents(const std::string& path);
void write_forest(const ThreadForest& forest, const std::string& path);
ThreadForest read_forest(const std::string& path);
void write_ingest_report(const IngestReport& report, const std::string& path);

}  // namespace statetrails

#endif
