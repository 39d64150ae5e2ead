#include "statetrails/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "statetrails/digest.hpp"
#include "statetrails/textprep.hpp"

namespace statetrails {

namespace {

using nlohmann::json;

// 25 most frequent English function words; the retention heuristic needs
// 2 hits per 50 tokens.
const std::set<std::string>& function_words() {
  static const std::set<std::string> words = {
      "the", "be",  "to",  "of",  "and", "a",   "in",   "that", "have",
      "i",   "it",  "for", "not", "on",  "with", "he",  "as",   "you",
      "do",  "at",  "this", "but", "his", "by",  "from"};
  return words;
}

// pushshift link_id/parent_id carry a "tN_" kind prefix; record ids do not
std::string strip_kind_prefix(const std::string& id) {
  if (id.size() > 3 && id[0] == 't' && id[2] == '_' && id[1] >= '0' &&
      id[1] <= '9') {
    return id.substr(3);
  }
  return id;
}

struct WorkDoc {
  std::string raw_id;
  std::string raw_author;
  std::string raw_thread;  // root post id
  std::string raw_parent;  // empty for posts
  std::int64_t created_utc = 0;
  int month = 0;
  DocKind kind = DocKind::kPost;
  std::string text;  // normalized
};

}  // namespace

std::string pseudonymize(const std::string& name, const std::string& salt) {
  if (salt.empty()) throw std::runtime_error("pseudonymize: empty salt");
  std::string keyed;
  keyed.reserve(salt.size() + 1 + name.size());
  keyed.append(salt);
  keyed.push_back('\0');
  keyed.append(name);
  return sha256_hex(keyed);
}

int month_index(std::int64_t created_utc, std::int64_t corpus_start_utc) {
  if (created_utc < corpus_start_utc) {
    throw std::runtime_error("timestamp precedes corpus start");
  }
  using namespace std::chrono;
  auto ymd_of = [](std::int64_t utc) {
    sys_seconds ts{seconds{utc}};
    return year_month_day{floor<days>(ts)};
  };
  const year_month_day a = ymd_of(corpus_start_utc);
  const year_month_day b = ymd_of(created_utc);
  const int months_a = int(a.year()) * 12 + int(unsigned(a.month()));
  const int months_b = int(b.year()) * 12 + int(unsigned(b.month()));
  return months_b - months_a;
}

bool looks_english(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return false;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (function_words().count(t)) ++hits;
  }
  return 25 * hits >= tokens.size();
}

CleaningConfig CleaningConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cleaning config: " + path);
  json j = json::parse(in);
  CleaningConfig cfg;
  for (const auto& name : j.value("bot_list", std::vector<std::string>{})) {
    cfg.bot_list.insert(name);
  }
  for (const auto& name :
       j.value("moderator_list", std::vector<std::string>{})) {
    cfg.moderator_list.insert(name);
  }
  cfg.language_filter_enabled = j.value("language_filter_enabled", true);
  cfg.min_interaction_partners = j.value("min_interaction_partners", 1);
  if (!j.contains("date_range")) {
    throw std::runtime_error(path + ": missing date_range");
  }
  cfg.start_utc = j["date_range"].at("start_utc").get<std::int64_t>();
  cfg.end_utc = j["date_range"].at("end_utc").get<std::int64_t>();
  cfg.validate();
  return cfg;
}

void CleaningConfig::validate() const {
  if (min_interaction_partners < 0) {
    throw std::runtime_error("min_interaction_partners must be >= 0");
  }
  if (start_utc >= end_utc) {
    throw std::runtime_error("date_range start must precede end");
  }
}

namespace {

bool author_excluded(const std::string& author, const CleaningConfig& cfg,
                     IngestReport& report) {
  if (author == "[deleted]") {
    ++report.deleted_author;
    return true;
  }
  if (cfg.bot_list.count(author) || cfg.moderator_list.count(author)) {
    ++report.excluded_author;
    return true;
  }
  return false;
}

// text/date/author gate shared by posts and comments; returns false when the
// record is dropped (report already updated)
bool admit(WorkDoc& doc, const std::string& raw_text,
           const CleaningConfig& cfg, IngestReport& report) {
  if (doc.created_utc < cfg.start_utc || doc.created_utc >= cfg.end_utc) {
    ++report.out_of_range;
    return false;
  }
  if (author_excluded(doc.raw_author, cfg, report)) return false;
  doc.text = normalize(raw_text);
  if (doc.text.empty()) {
    ++report.empty_text;
    return false;
  }
  if (cfg.language_filter_enabled && !looks_english(tokenize(doc.text))) {
    ++report.non_english;
    return false;
  }
  doc.month = month_index(doc.created_utc, cfg.start_utc);
  return true;
}

}  // namespace

IngestResult clean_corpus(const std::vector<RawPost>& posts,
                          const std::vector<RawComment>& comments,
                          const CleaningConfig& config,
                          const std::string& salt) {
  config.validate();
  IngestResult result;
  IngestReport& report = result.report;
  report.posts_read = posts.size();
  report.comments_read = comments.size();

  std::unordered_set<std::string> seen_ids;
  std::vector<WorkDoc> docs;
  docs.reserve(posts.size() + comments.size());
  std::unordered_map<std::string, std::size_t> by_raw_id;

  for (const auto& p : posts) {
    if (p.id.empty() || p.author.empty() || p.created_utc < 0) {
      ++report.malformed;
      continue;
    }
    if (!seen_ids.insert(p.id).second) {
      ++report.duplicates;
      continue;
    }
    WorkDoc doc;
    doc.raw_id = p.id;
    doc.raw_author = p.author;
    doc.raw_thread = p.id;
    doc.created_utc = p.created_utc;
    doc.kind = DocKind::kPost;
    if (!admit(doc, p.title + " " + p.selftext, config, report)) continue;
    by_raw_id[doc.raw_id] = docs.size();
    docs.push_back(std::move(doc));
  }

  std::vector<WorkDoc> comment_docs;
  for (const auto& c : comments) {
    if (c.id.empty() || c.author.empty() || c.link_id.empty() ||
        c.parent_id.empty() || c.created_utc < 0) {
      ++report.malformed;
      continue;
    }
    if (!seen_ids.insert(c.id).second) {
      ++report.duplicates;
      continue;
    }
    WorkDoc doc;
    doc.raw_id = c.id;
    doc.raw_author = c.author;
    doc.raw_thread = strip_kind_prefix(c.link_id);
    doc.raw_parent = strip_kind_prefix(c.parent_id);
    doc.created_utc = c.created_utc;
    doc.kind = DocKind::kComment;
    if (!admit(doc, c.body, config, report)) continue;
    comment_docs.push_back(std::move(doc));
  }
  for (auto& doc : comment_docs) {
    by_raw_id[doc.raw_id] = docs.size();
    docs.push_back(std::move(doc));
  }

  // Parent resolution. A direct reply to the thread root always resolves;
  // anything else must name a retained record or is re-attached to the root.
  for (auto& doc : docs) {
    if (doc.kind != DocKind::kComment) continue;
    if (doc.raw_parent == doc.raw_thread) continue;
    if (by_raw_id.count(doc.raw_parent)) continue;
    doc.raw_parent = doc.raw_thread;
    ++report.orphan_comments;
  }

  // Distinct reply partners over the cleaned corpus; one pass, no cascade.
  if (config.min_interaction_partners > 0) {
    std::unordered_map<std::string, std::set<std::string>> partners;
    for (const auto& doc : docs) {
      if (doc.kind != DocKind::kComment) continue;
      auto it = by_raw_id.find(doc.raw_parent);
      if (it == by_raw_id.end()) continue;
      const WorkDoc& parent = docs[it->second];
      if (parent.raw_author == doc.raw_author) continue;
      partners[doc.raw_author].insert(parent.raw_author);
      partners[parent.raw_author].insert(doc.raw_author);
    }
    std::unordered_set<std::string> dropped_users;
    for (const auto& doc : docs) {
      auto it = partners.find(doc.raw_author);
      const int count = it == partners.end()
                            ? 0
                            : static_cast<int>(it->second.size());
      if (count < config.min_interaction_partners) {
        dropped_users.insert(doc.raw_author);
      }
    }
    if (!dropped_users.empty()) {
      report.users_dropped_few_partners = dropped_users.size();
      std::vector<WorkDoc> kept;
      kept.reserve(docs.size());
      for (auto& doc : docs) {
        if (dropped_users.count(doc.raw_author)) {
          ++report.docs_dropped_few_partners;
        } else {
          kept.push_back(std::move(doc));
        }
      }
      docs = std::move(kept);
    }
  }

  std::set<std::string> users;
  result.documents.reserve(docs.size());
  for (const auto& doc : docs) {
    Document out;
    out.doc_id = pseudonymize(doc.raw_id, salt);
    out.author_id = pseudonymize(doc.raw_author, salt);
    out.thread_id = pseudonymize(doc.raw_thread, salt);
    out.month = doc.month;
    out.kind = doc.kind;
    out.text = doc.text;
    if (doc.kind == DocKind::kComment) {
      out.parent_doc_id = pseudonymize(doc.raw_parent, salt);
      result.forest.parent_of[out.doc_id] = out.parent_doc_id;
    }
    users.insert(out.author_id);
    result.documents.push_back(std::move(out));
  }
  std::sort(result.documents.begin(), result.documents.end(),
            [](const Document& a, const Document& b) {
              return std::tie(a.month, a.doc_id) < std::tie(b.month, b.doc_id);
            });
  report.documents_out = result.documents.size();
  report.users_out = users.size();
  return result;
}

namespace {

template <class Record, class FieldParser>
std::vector<Record> parse_ndjson(const std::string& path, FieldParser parse,
                                 IngestReport& report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<Record> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++report.malformed;
      continue;
    }
    try {
      records.push_back(parse(j));
    } catch (const std::exception&) {
      ++report.malformed;
    }
  }
  return records;
}

}  // namespace

IngestResult load_corpus(const std::string& posts_path,
                         const std::string& comments_path,
                         const CleaningConfig& config,
                         const std::string& salt) {
  IngestReport parse_report;
  auto posts = parse_ndjson<RawPost>(
      posts_path,
      [](const json& j) {
        RawPost p;
        p.id = j.at("id").get<std::string>();
        p.author = j.at("author").get<std::string>();
        p.selftext = j.value("selftext", "");
        p.title = j.value("title", "");
        p.created_utc = j.at("created_utc").get<std::int64_t>();
        return p;
      },
      parse_report);
  auto comments = parse_ndjson<RawComment>(
      comments_path,
      [](const json& j) {
        RawComment c;
        c.id = j.at("id").get<std::string>();
        c.author = j.at("author").get<std::string>();
        c.body = j.at("body").get<std::string>();
        c.link_id = j.at("link_id").get<std::string>();
        c.parent_id = j.at("parent_id").get<std::string>();
        c.created_utc = j.at("created_utc").get<std::int64_t>();
        return c;
      },
      parse_report);
  IngestResult result = clean_corpus(posts, comments, config, salt);
  result.report.malformed += parse_report.malformed;
  return result;
}

void write_documents(const std::vector<Document>& docs,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write documents: " + path);
  for (const auto& d : docs) {
    json j;
    j["doc_id"] = d.doc_id;
    j["author_id"] = d.author_id;
    j["thread_id"] = d.thread_id;
    if (d.kind == DocKind::kComment) j["parent_doc_id"] = d.parent_doc_id;
    j["month"] = d.month;
    j["kind"] = d.kind == DocKind::kPost ? "post" : "comment";
    j["text"] = d.text;
    out << j.dump() << '\n';
  }
}

std::vector<Document> read_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open documents: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad document record");
    }
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.author_id = j.at("author_id").get<std::string>();
    d.thread_id = j.at("thread_id").get<std::string>();
    d.month = j.at("month").get<int>();
    d.kind = j.at("kind").get<std::string>() == "post" ? DocKind::kPost
                                                       : DocKind::kComment;
    if (j.contains("parent_doc_id")) {
      d.parent_doc_id = j["parent_doc_id"].get<std::string>();
    }
    d.text = j.at("text").get<std::string>();
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_forest(const ThreadForest& forest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write thread forest: " + path);
  out << "child_id,parent_id\n";
  for (const auto& [child, parent] : forest.parent_of) {
    out << child << ',' << parent << '\n';
  }
}

ThreadForest read_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open thread forest: " + path);
  ThreadForest forest;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      continue;  // header
    }
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path + ": bad forest row: " + line);
    }
    forest.parent_of[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return forest;
}

void write_ingest_report(const IngestReport& r, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["posts_read"] = r.posts_read;
  j["comments_read"] = r.comments_read;
  j["skips"] = {{"malformed", r.malformed},
                {"duplicates", r.duplicates},
                {"out_of_range", r.out_of_range},
                {"excluded_author", r.excluded_author},
                {"deleted_author", r.deleted_author},
                {"empty_text", r.empty_text},
                {"non_english", r.non_english}};
  j["orphan_comments"] = r.orphan_comments;
  j["users_dropped_few_partners"] = r.users_dropped_few_partners;
  j["docs_dropped_few_partners"] = r.docs_dropped_few_partners;
  j["documents_out"] = r.documents_out;
  j["users_out"] = r.users_out;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ingest report: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace statetrails
