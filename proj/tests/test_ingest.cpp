#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "statetrails/digest.hpp"
#include "statetrails/ingest.hpp"

using namespace statetrails;
using testutil::fixture_config;
using testutil::kStart;
using testutil::make_comment;
using testutil::make_post;

TEST_CASE("sha256 matches the published test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("pseudonymize is deterministic and keyed") {
  CHECK(pseudonymize("alice", "s1") == pseudonymize("alice", "s1"));
  CHECK(pseudonymize("alice", "s1") != pseudonymize("bob", "s1"));
  CHECK(pseudonymize("alice", "s1") != pseudonymize("alice", "s2"));
  CHECK(pseudonymize("a", "s").size() == pseudonymize("a very long name", "s").size());
  CHECK_THROWS(pseudonymize("alice", ""));
}

TEST_CASE("pseudonymize matches an independent hash oracle") {
  // sha256(salt || 0x00 || name), recomputed with python hashlib
  CHECK(pseudonymize("alice", "s1") ==
        "c25169c751667c72b0a7d1d9697c23e71dcf67123b831d12c7231b132aa0d428");
  CHECK(pseudonymize("alice", "s2") ==
        "0c6203ca6777dc06ac35c443801e9e384535e2afabca71eafb77c768f3b65b24");
  CHECK(pseudonymize("bob", "s1") ==
        "d605eb566f21133a12af4f9df64569b26e6f5c6c5fff4381b06e63f69354fab2");
  CHECK(pseudonymize("u42", "pepper") ==
        "ab171dace38382638eb2b2ca1b1de820caf4dd630828f1ed0df1ba00cbfcb659");
}

namespace {

// independent civil-calendar oracle (days-from-civil, Howard Hinnant's
// algorithm), distinct from the production std::chrono path
int oracle_month_index(std::int64_t ts, std::int64_t start) {
  auto civil = [](std::int64_t utc) {
    std::int64_t z = utc / 86400;
    if (utc < 0 && utc % 86400 != 0) --z;
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return std::make_pair(y + (m <= 2), m);
  };
  auto [sy, sm] = civil(start);
  auto [ty, tm] = civil(ts);
  return static_cast<int>((ty - sy) * 12 + static_cast<int>(tm) -
                          static_cast<int>(sm));
}

}  // namespace

TEST_CASE("month_index counts whole calendar months") {
  CHECK(month_index(kStart + 86400, kStart) == 0);
  CHECK(month_index(1529064000, kStart) == 1);   // 2018-06-15
  CHECK(month_index(1588204800, kStart) == 23);  // 2020-04-30
  CHECK_THROWS(month_index(kStart - 1, kStart));
}

TEST_CASE("month_index agrees with the civil-calendar oracle") {
  for (std::int64_t ts = kStart; ts < kStart + 800LL * 86400; ts += 86400 * 3 + 7211) {
    CHECK(month_index(ts, kStart) == oracle_month_index(ts, kStart));
  }
}

TEST_CASE("duplicate record ids keep the first occurrence") {
  std::vector<RawPost> posts = {make_post("p1", "alice", "hello world"),
                                make_post("p1", "alice", "hello world")};
  const IngestResult result = clean_corpus(posts, {}, fixture_config(), "salt");
  CHECK(result.documents.size() == 1);
  CHECK(result.report.duplicates == 1);
}

TEST_CASE("bot and moderator authors are excluded") {
  CleaningConfig cfg = fixture_config();
  cfg.bot_list.insert("AutoHelper");
  cfg.moderator_list.insert("mod1");
  std::vector<RawPost> posts = {make_post("p1", "AutoHelper", "beep boop"),
                                make_post("p2", "mod1", "locked"),
                                make_post("p3", "[deleted]", "gone"),
                                make_post("p4", "alice", "hello")};
  const IngestResult result = clean_corpus(posts, {}, cfg, "salt");
  CHECK(result.documents.size() == 1);
  CHECK(result.report.excluded_author == 2);
  CHECK(result.report.deleted_author == 1);
}

namespace {

// 3 posts + 5 comments drawn by hand:
//   p1(alice) <- c1(bob) <- c2(carol)
//              \ c3(dave)
//   p2(bob)   <- c4(alice)
//   p3(erin)  <- c5(frank, via t3_ prefix)
struct HandFixture {
  std::vector<RawPost> posts = {make_post("p1", "alice", "alpha"),
                                make_post("p2", "bob", "beta"),
                                make_post("p3", "erin", "gamma")};
  std::vector<RawComment> comments = {
      make_comment("c1", "bob", "one", "p1", "p1"),
      make_comment("c2", "carol", "two", "p1", "c1"),
      make_comment("c3", "dave", "three", "p1", "p1"),
      make_comment("c4", "alice", "four", "p2", "p2"),
      make_comment("c5", "frank", "five", "t3_p3", "t3_p3")};
};

}  // namespace

TEST_CASE("hand corpus: document count and parent edges match the drawing") {
  HandFixture fx;
  const std::string salt = "s";
  const IngestResult result =
      clean_corpus(fx.posts, fx.comments, fixture_config(), salt);
  CHECK(result.documents.size() == 8);
  CHECK(result.report.orphan_comments == 0);

  auto pid = [&](const std::string& raw) { return pseudonymize(raw, salt); };
  const ThreadForest& forest = result.forest;
  CHECK(forest.parent_of.size() == 5);
  CHECK(forest.parent(pid("c1")) == pid("p1"));
  CHECK(forest.parent(pid("c2")) == pid("c1"));
  CHECK(forest.parent(pid("c3")) == pid("p1"));
  CHECK(forest.parent(pid("c4")) == pid("p2"));
  CHECK(forest.parent(pid("c5")) == pid("p3"));

  // every comment's parent chain ends at a post of the same thread
  std::map<std::string, const Document*> by_id;
  for (const auto& d : result.documents) by_id[d.doc_id] = &d;
  for (const auto& d : result.documents) {
    if (d.kind != DocKind::kComment) continue;
    std::string cursor = d.doc_id;
    int hops = 0;
    while (auto parent = forest.parent(cursor)) {
      cursor = *parent;
      REQUIRE(++hops < 10);
    }
    REQUIRE(by_id.count(cursor));
    CHECK(by_id.at(cursor)->kind == DocKind::kPost);
    CHECK(by_id.at(cursor)->thread_id == d.thread_id);
  }
}

TEST_CASE("unresolvable parents attach to the thread root and are counted") {
  HandFixture fx;
  fx.comments.push_back(make_comment("c6", "gina", "six", "p1", "c_missing"));
  const IngestResult result =
      clean_corpus(fx.posts, fx.comments, fixture_config(), "s");
  CHECK(result.report.orphan_comments == 1);
  CHECK(result.forest.parent(pseudonymize("c6", "s")) ==
        pseudonymize("p1", "s"));
}

TEST_CASE("date range drops outside records") {
  CleaningConfig cfg = fixture_config();
  std::vector<RawPost> posts = {make_post("p1", "a", "in range", kStart + 5),
                                make_post("p2", "a", "too early", kStart - 5),
                                make_post("p3", "a", "too late", testutil::kEnd)};
  const IngestResult result = clean_corpus(posts, {}, cfg, "s");
  CHECK(result.documents.size() == 1);
  CHECK(result.report.out_of_range == 2);
}

TEST_CASE("empty and whitespace-only texts are dropped") {
  std::vector<RawPost> posts = {make_post("p1", "a", ""),
                                make_post("p2", "a", "  !! \n"),
                                make_post("p3", "a", "real words")};
  const IngestResult result = clean_corpus(posts, {}, fixture_config(), "s");
  CHECK(result.documents.size() == 1);
  CHECK(result.report.empty_text == 2);
}

TEST_CASE("language filter keeps function-word-bearing text") {
  CleaningConfig cfg = fixture_config();
  cfg.language_filter_enabled = true;
  std::string foreign;
  for (int i = 0; i < 30; ++i) foreign += "zzz" + std::to_string(i) + " ";
  std::vector<RawPost> posts = {
      make_post("p1", "a", "this is the story of a fox and the hound"),
      make_post("p2", "b", foreign)};
  const IngestResult result = clean_corpus(posts, {}, cfg, "s");
  CHECK(result.documents.size() == 1);
  CHECK(result.report.non_english == 1);
}

TEST_CASE("users below the interaction-partner threshold are dropped") {
  CleaningConfig cfg = fixture_config();
  cfg.min_interaction_partners = 1;
  std::vector<RawPost> posts = {make_post("p1", "alice", "alpha"),
                                make_post("p2", "loner", "nobody replies")};
  std::vector<RawComment> comments = {
      make_comment("c1", "bob", "one", "p1", "p1")};
  const IngestResult result = clean_corpus(posts, comments, cfg, "s");
  // alice and bob interact; loner has zero partners
  CHECK(result.report.users_dropped_few_partners == 1);
  CHECK(result.report.docs_dropped_few_partners == 1);
  CHECK(result.documents.size() == 2);
  for (const auto& d : result.documents) {
    CHECK(d.author_id != pseudonymize("loner", "s"));
  }
}

TEST_CASE("self-replies do not create interaction partners") {
  CleaningConfig cfg = fixture_config();
  cfg.min_interaction_partners = 1;
  std::vector<RawPost> posts = {make_post("p1", "solo", "talking")};
  std::vector<RawComment> comments = {
      make_comment("c1", "solo", "to myself", "p1", "p1")};
  const IngestResult result = clean_corpus(posts, comments, cfg, "s");
  CHECK(result.documents.empty());
  CHECK(result.report.users_dropped_few_partners == 1);
}

TEST_CASE("documents come out sorted by (month, doc_id)") {
  std::vector<RawPost> posts = {
      make_post("p1", "a", "one", kStart + 40 * 86400),
      make_post("p2", "b", "two", kStart + 5),
      make_post("p3", "c", "three", kStart + 70 * 86400)};
  const IngestResult result = clean_corpus(posts, {}, fixture_config(), "s");
  REQUIRE(result.documents.size() == 3);
  CHECK(std::is_sorted(result.documents.begin(), result.documents.end(),
                       [](const Document& x, const Document& y) {
                         return std::tie(x.month, x.doc_id) <
                                std::tie(y.month, y.doc_id);
                       }));
  CHECK(result.documents.front().month == 0);
  CHECK(result.documents.back().month == 2);
}

TEST_CASE("re-cleaning cleaned output is a no-op on structure") {
  HandFixture fx;
  const IngestResult first =
      clean_corpus(fx.posts, fx.comments, fixture_config(), "s");

  // feed the cleaned documents back through as raw records
  std::vector<RawPost> posts;
  std::vector<RawComment> comments;
  for (const auto& d : first.documents) {
    if (d.kind == DocKind::kPost) {
      posts.push_back(make_post(d.doc_id, d.author_id, d.text,
                                kStart + 86400LL * 31 * d.month + 10));
    } else {
      comments.push_back(make_comment(d.doc_id, d.author_id, d.text,
                                      d.thread_id, d.parent_doc_id,
                                      kStart + 86400LL * 31 * d.month + 20));
    }
  }
  const IngestResult second = clean_corpus(posts, comments, fixture_config(), "s");
  CHECK(second.documents.size() == first.documents.size());
  CHECK(second.forest.parent_of.size() == first.forest.parent_of.size());
  CHECK(second.report.empty_text == 0);
  CHECK(second.report.orphan_comments == 0);

  std::multiset<std::pair<int, std::string>> kinds_a, kinds_b;
  for (const auto& d : first.documents) kinds_a.insert({d.month, d.text});
  for (const auto& d : second.documents) kinds_b.insert({d.month, d.text});
  CHECK(kinds_a == kinds_b);
}

TEST_CASE("no raw author or id strings appear in emitted artifacts") {
  HandFixture fx;
  testutil::TempDir dir("ingestscan");
  const IngestResult result =
      clean_corpus(fx.posts, fx.comments, fixture_config(), "s");
  write_documents(result.documents, dir.str("documents.ndjson"));
  write_forest(result.forest, dir.str("forest.csv"));
  const std::string blob = testutil::read_file(dir.str("documents.ndjson")) +
                           testutil::read_file(dir.str("forest.csv"));
  for (const std::string raw : {"alice", "bob", "carol", "dave", "erin",
                                "frank", "p1", "p2", "p3", "c1"}) {
    CHECK(blob.find("\"" + raw + "\"") == std::string::npos);
  }
}

TEST_CASE("load_corpus parses NDJSON and counts malformed lines") {
  testutil::TempDir dir("ndjson");
  testutil::write_file(dir.str("posts.ndjson"),
                       R"({"id":"p1","author":"alice","selftext":"hello","title":"Hi","created_utc":1525132805})"
                       "\nnot json at all\n"
                       R"({"id":"p2","author":"bob","selftext":"there","title":"","created_utc":1525132806})"
                       "\n");
  testutil::write_file(dir.str("comments.ndjson"),
                       R"({"id":"c1","author":"bob","body":"reply","link_id":"t3_p1","parent_id":"t3_p1","created_utc":1525132807})"
                       "\n"
                       R"({"id":"c2","author":"carol","body":"reply"})"
                       "\n");
  const IngestResult result = load_corpus(dir.str("posts.ndjson"),
                                          dir.str("comments.ndjson"),
                                          fixture_config(), "s");
  CHECK(result.documents.size() == 3);
  CHECK(result.report.malformed == 2);
  // title is folded into the text ahead of normalization
  bool found_title = false;
  for (const auto& d : result.documents) {
    if (d.text == "hi hello") found_title = true;
  }
  CHECK(found_title);
}

TEST_CASE("document round-trip through NDJSON is lossless") {
  HandFixture fx;
  testutil::TempDir dir("roundtrip");
  const IngestResult result =
      clean_corpus(fx.posts, fx.comments, fixture_config(), "s");
  write_documents(result.documents, dir.str("docs.ndjson"));
  const auto loaded = read_documents(dir.str("docs.ndjson"));
  REQUIRE(loaded.size() == result.documents.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].doc_id == result.documents[i].doc_id);
    CHECK(loaded[i].parent_doc_id == result.documents[i].parent_doc_id);
    CHECK(loaded[i].month == result.documents[i].month);
    CHECK((loaded[i].kind == result.documents[i].kind));
    CHECK(loaded[i].text == result.documents[i].text);
  }
  write_forest(result.forest, dir.str("forest.csv"));
  const ThreadForest forest = read_forest(dir.str("forest.csv"));
  CHECK(forest.parent_of == result.forest.parent_of);
}
