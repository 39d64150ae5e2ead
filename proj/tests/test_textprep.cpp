#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cctype>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "statetrails/textprep.hpp"

using namespace statetrails;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("normalize applies the documented rules") {
  CHECK(normalize("Check https://x.y NOW!!") == "check now");
  CHECK(normalize("") == "");
  CHECK(normalize("A\tB\nC") == "a b c");
  CHECK(normalize("Hello,  World.") == "hello world");
  CHECK(normalize("see www.example.com for details") == "see for details");
  CHECK(normalize("a <b>bold</b> claim") == "a bold claim");
  CHECK(normalize("don't") == "don t");
  CHECK(normalize("!!!") == "");
  CHECK(normalize("awww.cool stays") == "awww cool stays");
  CHECK(normalize("ctrl\x01" "char") == "ctrlchar");
}

TEST_CASE("normalize is idempotent on random inputs") {
  std::mt19937 rng(7);
  const std::string alphabet =
      "abcXYZ 09.!?,<>\t\n:/#@'\"()[]{}~`^&*-_=+https://wx";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 80);
    for (int i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    const std::string once = normalize(s);
    CHECK(normalize(once) == once);
  }
}

TEST_CASE("tokenize splits cleaned text on spaces") {
  CHECK(tokenize("a b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("don t know").size() == 3);
  CHECK(tokenize("").empty());
  const std::string twelve = "one two three four five six seven eight nine ten eleven twelve";
  CHECK(tokenize(twelve).size() == 12);
}

TEST_CASE("tokens of normalized text carry no uppercase or punctuation") {
  std::mt19937 rng(11);
  const std::string alphabet = "abKLM !?.:'\",()<>/0_9-";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 60);
    for (int i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    for (const auto& token : tokenize(normalize(s))) {
      CHECK(!token.empty());
      for (char c : token) {
        const unsigned char uc = static_cast<unsigned char>(c);
        CHECK(!std::isupper(uc));
        CHECK(!std::ispunct(uc));
        CHECK(!std::isspace(uc));
      }
    }
  }
}

TEST_CASE("strip_suffix handles s/es/ed/ing") {
  CHECK(strip_suffix("dogs") == "dog");
  CHECK(strip_suffix("watches") == "watche");  // first applicable suffix wins
  CHECK(strip_suffix("wanted") == "want");
  CHECK(strip_suffix("running") == "runn");
  CHECK(strip_suffix("as") == "as");  // stem would drop below 2 chars
  CHECK(strip_suffix("s") == "s");
  CHECK(strip_suffix("x") == "x");
}

namespace {

void write_valid_lexicons(const TempDir& dir) {
  write_file(dir.str("emotion.tsv"), "# comment\nhappy\tjoy\nsad\tsadness\nhappy\ttrust\n");
  write_file(dir.str("vad.tsv"), "calm\t0.7\t0.2\t0.6\n");
  write_file(dir.str("sentiment.tsv"), "good\t0.6\nbad\t-0.5\n");
  write_file(dir.str("taboo.tsv"), "damn\t0.8\n");
  write_file(dir.str("subjectivity.tsv"), "feel\t0.9\n");
}

}  // namespace

TEST_CASE("load_lexicons reads and validates the five files") {
  TempDir dir("lex");
  write_valid_lexicons(dir);
  LexiconLoadReport report;
  const LexiconStore store = load_lexicons(dir.str(), &report);
  REQUIRE(store.emotion.count("happy"));
  CHECK((store.emotion.at("happy") & (1u << emotion_index("joy"))) != 0);
  CHECK((store.emotion.at("happy") & (1u << emotion_index("trust"))) != 0);
  CHECK(store.vad.at("calm")[0] == doctest::Approx(0.7));
  CHECK(store.sentiment.at("bad") == doctest::Approx(-0.5));
  CHECK(report.emotion_entries == 3);
  CHECK(report.warnings.empty());
}

TEST_CASE("load_lexicons rejects out-of-range values naming file and line") {
  TempDir dir("lexrange");
  write_valid_lexicons(dir);
  write_file(dir.str("vad.tsv"), "calm\t0.7\t0.2\t0.6\nodd\t1.2\t0.5\t0.5\n");
  try {
    load_lexicons(dir.str());
    FAIL("expected range error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("vad.tsv:2") != std::string::npos);
  }
}

TEST_CASE("load_lexicons rejects duplicates and multiword entries") {
  TempDir dir("lexdup");
  write_valid_lexicons(dir);
  write_file(dir.str("taboo.tsv"), "damn\t0.8\ndamn\t0.4\n");
  CHECK_THROWS_WITH_AS(load_lexicons(dir.str()),
                       doctest::Contains("duplicate key"), std::runtime_error);
  write_file(dir.str("taboo.tsv"), "damn\t0.8\n");
  write_file(dir.str("sentiment.tsv"), "pretty bad\t-0.5\n");
  CHECK_THROWS_WITH_AS(load_lexicons(dir.str()),
                       doctest::Contains("multiword"), std::runtime_error);
}

TEST_CASE("empty taboo file loads with a warning") {
  TempDir dir("lexempty");
  write_valid_lexicons(dir);
  write_file(dir.str("taboo.tsv"), "# empty\n");
  LexiconLoadReport report;
  const LexiconStore store = load_lexicons(dir.str(), &report);
  CHECK(store.taboo.empty());
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("taboo") != std::string::npos);
}

TEST_CASE("lexicon loading is order-independent") {
  TempDir a("lexorder1");
  TempDir b("lexorder2");
  write_valid_lexicons(a);
  write_valid_lexicons(b);
  write_file(b.str("sentiment.tsv"), "bad\t-0.5\ngood\t0.6\n");  // shuffled
  const LexiconStore sa = load_lexicons(a.str());
  const LexiconStore sb = load_lexicons(b.str());
  CHECK(sa.sentiment == sb.sentiment);
  CHECK(sa.emotion == sb.emotion);
}

TEST_CASE("lookups fall back to stripped suffixes") {
  const LexiconStore lex = testutil::fixture_lexicons();
  REQUIRE(lex.emotions_of("happy"));
  CHECK(lex.emotions_of("happys"));   // s-fallback
  CHECK(lex.sentiment_of("gooding")); // ing-fallback
  CHECK(!lex.sentiment_of("goo"));
  CHECK(!lex.emotions_of("zzzz"));
}
