#include "statetrails/simgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "statetrails/clustering.hpp"
#include "statetrails/networks.hpp"
#include "statetrails/random.hpp"

namespace statetrails {

namespace {

constexpr int kPoolSize = 24;  // words per state vocabulary

// archetype rows: 8 emotion weights (relative), VAD, sentiment +/- (<= 0.5),
// taboo, subjectivity; rows are mutually separated well beyond 0.5
const std::vector<FeatureVector>& archetype_table() {
  static const std::vector<FeatureVector> table = {
      {0.0, 0.0, 0.2, 0.3, 0.0, 0.5, 0.0, 0.0, 0.10, 0.90, 0.10, 0.05, 0.45, 0.70, 0.90},
      {0.0, 0.2, 0.0, 0.0, 0.5, 0.0, 0.0, 0.3, 0.90, 0.20, 0.90, 0.45, 0.03, 0.05, 0.75},
      {0.0, 0.3, 0.0, 0.0, 0.2, 0.2, 0.0, 0.3, 0.50, 0.40, 0.50, 0.20, 0.10, 0.15, 0.10},
      {0.3, 0.0, 0.0, 0.2, 0.0, 0.3, 0.2, 0.0, 0.30, 0.60, 0.35, 0.15, 0.30, 0.40, 0.50},
      {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.70, 0.75, 0.20, 0.30, 0.20, 0.90, 0.30},
      {0.25, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25, 0.0, 0.20, 0.30, 0.70, 0.10, 0.05, 0.30, 0.65},
  };
  return table;
}

std::string user_name(int idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%04d", idx);
  return buf;
}

std::string pool_word(int state, int idx) {
  std::string word = "w" + std::to_string(state);
  word.push_back(static_cast<char>('a' + idx / 26));
  word.push_back(static_cast<char>('a' + idx % 26));
  return word;
}

// largest-remainder apportionment of kPoolSize slots over the emotion block
std::array<int, kEmotionCount> emotion_slot_counts(const FeatureVector& a) {
  std::array<int, kEmotionCount> counts{};
  double total = 0.0;
  for (int e = 0; e < kEmotionCount; ++e) total += a[static_cast<std::size_t>(e)];
  if (total <= 0.0) return counts;
  std::array<double, kEmotionCount> exact{};
  int used = 0;
  for (int e = 0; e < kEmotionCount; ++e) {
    exact[static_cast<std::size_t>(e)] = a[static_cast<std::size_t>(e)] / total * kPoolSize;
    counts[static_cast<std::size_t>(e)] = static_cast<int>(exact[static_cast<std::size_t>(e)]);
    used += counts[static_cast<std::size_t>(e)];
  }
  std::array<int, kEmotionCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const double rx = exact[static_cast<std::size_t>(x)] - std::floor(exact[static_cast<std::size_t>(x)]);
    const double ry = exact[static_cast<std::size_t>(y)] - std::floor(exact[static_cast<std::size_t>(y)]);
    if (rx != ry) return rx > ry;
    return x < y;
  });
  for (int i = 0; used < kPoolSize && i < kEmotionCount; ++i) {
    ++counts[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    ++used;
  }
  return counts;
}

std::int64_t month_start_of(std::int64_t utc) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(sys_seconds{seconds{utc}})};
  return sys_days{ymd.year() / ymd.month() / 1}.time_since_epoch().count() *
         std::int64_t{86400};
}

std::int64_t add_months_utc(std::int64_t month_start, int t) {
  using namespace std::chrono;
  year_month_day ymd{floor<days>(sys_seconds{seconds{month_start}})};
  year_month ym = ymd.year() / ymd.month();
  ym += months{t};
  return sys_days{ym / 1}.time_since_epoch().count() * std::int64_t{86400};
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  double d2 = 0.0;
  for (int f = 0; f < kFeatureCount; ++f) {
    const double d = a[static_cast<std::size_t>(f)] - b[static_cast<std::size_t>(f)];
    d2 += d * d;
  }
  return std::sqrt(d2);
}

}  // namespace

SimConfig SimConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sim config: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  SimConfig cfg;
  cfg.n_users = j.value("n_users", cfg.n_users);
  cfg.n_months = j.value("n_months", cfg.n_months);
  cfg.k_states = j.value("k_states", cfg.k_states);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.min_separation = j.value("min_separation", cfg.min_separation);
  cfg.tokens_per_doc = j.value("tokens_per_doc", cfg.tokens_per_doc);
  cfg.corpus_start_utc = j.value("corpus_start_utc", cfg.corpus_start_utc);
  if (j.contains("archetypes")) {
    for (const auto& row : j["archetypes"]) {
      if (row.size() != kFeatureCount) {
        throw std::runtime_error("archetype rows need 15 values");
      }
      FeatureVector v{};
      for (int f = 0; f < kFeatureCount; ++f) v[static_cast<std::size_t>(f)] = row[static_cast<std::size_t>(f)];
      cfg.archetypes.push_back(v);
    }
  }
  if (j.contains("baseline_transition")) {
    for (const auto& row : j["baseline_transition"]) {
      cfg.baseline_transition.push_back(row.get<std::vector<double>>());
    }
  }
  if (j.contains("exposure_rules")) {
    for (const auto& r : j["exposure_rules"]) {
      ExposureRule rule;
      rule.conditioning = r.at("conditioning").get<int>();
      rule.kind = exposure_kind_from_name(r.at("kind").get<std::string>());
      rule.from_state = r.at("from_state").get<int>();
      rule.to_state = r.at("to_state").get<int>();
      rule.probability = r.at("probability").get<double>();
      cfg.exposure_rules.push_back(rule);
    }
  }
  if (j.contains("thread_model")) {
    const auto& tm = j["thread_model"];
    cfg.thread_model.threads_per_month =
        tm.value("threads_per_month", cfg.thread_model.threads_per_month);
    cfg.thread_model.comments_per_thread =
        tm.value("comments_per_thread", cfg.thread_model.comments_per_thread);
    cfg.thread_model.reply_depth_geom_p =
        tm.value("reply_depth_geom_p", cfg.thread_model.reply_depth_geom_p);
  }
  cfg.finalize();
  return cfg;
}

void SimConfig::finalize() {
  if (n_users < 1 || n_months < 1) {
    throw std::runtime_error("sim config: need n_users >= 1, n_months >= 1");
  }
  if (k_states < 2 ||
      k_states > static_cast<int>(archetype_table().size())) {
    throw std::runtime_error("sim config: k_states must be in [2, 6]");
  }
  corpus_start_utc = month_start_of(corpus_start_utc);
  if (archetypes.empty()) {
    archetypes.assign(archetype_table().begin(),
                      archetype_table().begin() + k_states);
  }
  if (static_cast<int>(archetypes.size()) != k_states) {
    throw std::runtime_error("sim config: archetype count != k_states");
  }
  for (auto& a : archetypes) {
    for (double v : a) {
      if (v < 0.0 || v > 1.0) {
        throw std::runtime_error("sim config: archetype values must be in [0,1]");
      }
    }
    // emotion block reads as relative weights; normalize when non-empty
    double emotion_total = 0.0;
    for (int e = 0; e < kEmotionCount; ++e) emotion_total += a[static_cast<std::size_t>(e)];
    if (emotion_total > 0.0) {
      for (int e = 0; e < kEmotionCount; ++e) a[static_cast<std::size_t>(e)] /= emotion_total;
    }
    if (a[kSentPositive] > 0.5 || a[kSentNegative] > 0.5) {
      throw std::runtime_error(
          "sim config: sentiment components above 0.5 are not representable");
    }
  }
  for (std::size_t i = 0; i < archetypes.size(); ++i) {
    for (std::size_t j = i + 1; j < archetypes.size(); ++j) {
      if (distance(archetypes[i], archetypes[j]) < min_separation) {
        throw std::runtime_error("sim config: archetypes closer than min_separation");
      }
    }
  }
  if (baseline_transition.empty()) {
    const double off = 0.45 / (k_states - 1);
    baseline_transition.assign(static_cast<std::size_t>(k_states),
                               std::vector<double>(static_cast<std::size_t>(k_states), off));
    for (int i = 0; i < k_states; ++i) {
      baseline_transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0.55;
    }
  }
  if (static_cast<int>(baseline_transition.size()) != k_states) {
    throw std::runtime_error("sim config: baseline matrix must be k x k");
  }
  for (const auto& row : baseline_transition) {
    if (static_cast<int>(row.size()) != k_states) {
      throw std::runtime_error("sim config: baseline matrix must be k x k");
    }
    double total = 0.0;
    for (double p : row) {
      if (p < 0.0 || p > 1.0) {
        throw std::runtime_error("sim config: baseline entries must be in [0,1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::runtime_error("sim config: baseline rows must sum to 1");
    }
  }
  std::set<int> rule_from_states;
  for (const auto& rule : exposure_rules) {
    if (rule.conditioning < 0 || rule.conditioning >= k_states ||
        rule.from_state < 0 || rule.from_state >= k_states ||
        rule.to_state < 0 || rule.to_state >= k_states) {
      throw std::runtime_error("sim config: rule indices out of range");
    }
    if (rule.probability < 0.0 || rule.probability > 1.0) {
      throw std::runtime_error("sim config: rule probability must be in [0,1]");
    }
    const double base = baseline_transition[static_cast<std::size_t>(rule.from_state)]
                                           [static_cast<std::size_t>(rule.to_state)];
    if (base >= 1.0 && rule.probability < 1.0) {
      throw std::runtime_error(
          "sim config: rule cannot redistribute a saturated baseline row");
    }
    if (!rule_from_states.insert(rule.from_state).second) {
      throw std::runtime_error(
          "sim config: at most one rule per from_state (ambiguous overrides)");
    }
  }
}

LexiconStore build_sim_lexicons(const SimConfig& config) {
  LexiconStore store;
  for (int s = 0; s < config.k_states; ++s) {
    const FeatureVector& a = config.archetypes[static_cast<std::size_t>(s)];
    const auto slots = emotion_slot_counts(a);
    int next_emotion = 0;
    int used_in_emotion = 0;
    for (int i = 0; i < kPoolSize; ++i) {
      const std::string word = pool_word(s, i);
      while (next_emotion < kEmotionCount &&
             used_in_emotion >= slots[static_cast<std::size_t>(next_emotion)]) {
        ++next_emotion;
        used_in_emotion = 0;
      }
      if (next_emotion < kEmotionCount) {
        store.emotion[word] = static_cast<std::uint8_t>(1u << next_emotion);
        ++used_in_emotion;
      }
      store.vad[word] = {a[kValence], a[kArousal], a[kDominance]};
      store.sentiment[word] = (i % 2 == 0)
                                  ? std::min(1.0, 2.0 * a[kSentPositive])
                                  : -std::min(1.0, 2.0 * a[kSentNegative]);
      store.taboo[word] = a[kTabooRate];
      store.subjectivity[word] = a[kSubjectivity];
    }
  }
  return store;
}

namespace {

struct SkeletonDoc {
  bool is_post = true;
  int author = 0;
  std::string id;
  std::string thread;  // root post id
  std::string parent;  // empty for posts
};

struct MonthPlan {
  std::vector<SkeletonDoc> docs;
  std::vector<bool> has_doc;
};

class ThreadBuilder {
 public:
  ThreadBuilder(MonthPlan& plan, int& post_seq, int& comment_seq)
      : plan_(plan), post_seq_(post_seq), comment_seq_(comment_seq) {}

  std::string post(int author) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%06d", post_seq_++);
    SkeletonDoc doc;
    doc.is_post = true;
    doc.author = author;
    doc.id = buf;
    doc.thread = buf;
    plan_.docs.push_back(doc);
    plan_.has_doc[static_cast<std::size_t>(author)] = true;
    return doc.id;
  }

  std::string comment(int author, const std::string& thread,
                      const std::string& parent) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%06d", comment_seq_++);
    SkeletonDoc doc;
    doc.is_post = false;
    doc.author = author;
    doc.id = buf;
    doc.thread = thread;
    doc.parent = parent;
    plan_.docs.push_back(doc);
    plan_.has_doc[static_cast<std::size_t>(author)] = true;
    return doc.id;
  }

 private:
  MonthPlan& plan_;
  int& post_seq_;
  int& comment_seq_;
};

// distinct helpers from the conditioning pool, excluding the target
std::vector<int> pick_partners(const std::vector<int>& pool, int exclude,
                               std::size_t count, Rng& rng) {
  std::vector<int> candidates;
  candidates.reserve(pool.size());
  for (int u : pool) {
    if (u != exclude) candidates.push_back(u);
  }
  if (candidates.size() < count) return {};
  rng.shuffle(candidates);
  candidates.resize(count);
  return candidates;
}

}  // namespace

SimCorpus simulate(const SimConfig& input_config) {
  SimConfig config = input_config;
  config.finalize();
  SimCorpus corpus;
  const int n = config.n_users;
  const int k = config.k_states;

  std::vector<std::vector<int>> states(
      static_cast<std::size_t>(config.n_months),
      std::vector<int>(static_cast<std::size_t>(n), 0));
  Rng init_rng(derive_seed(config.seed, "init"));
  for (int u = 0; u < n; ++u) {
    states[0][static_cast<std::size_t>(u)] = static_cast<int>(init_rng.next_below(static_cast<std::uint64_t>(k)));
  }
  Rng evolve_rng(derive_seed(config.seed, "evolve"));

  int post_seq = 0;
  int comment_seq = 0;

  for (int t = 0; t < config.n_months; ++t) {
    Rng wire_rng(derive_seed(config.seed, "wire", static_cast<std::uint64_t>(t)));
    Rng text_rng(derive_seed(config.seed, "text", static_cast<std::uint64_t>(t)));
    MonthPlan plan;
    plan.has_doc.assign(static_cast<std::size_t>(n), false);
    ThreadBuilder threads(plan, post_seq, comment_seq);

    std::vector<std::vector<int>> by_state(static_cast<std::size_t>(k));
    for (int u = 0; u < n; ++u) {
      by_state[static_cast<std::size_t>(states[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)])].push_back(u);
    }

    // rule threads: guarantee exposure for every user in the rule's
    // from-state, partner availability permitting
    std::vector<bool> target_used(static_cast<std::size_t>(n), false);
    for (const auto& rule : config.exposure_rules) {
      const auto& pool = by_state[static_cast<std::size_t>(rule.conditioning)];
      for (int u : by_state[static_cast<std::size_t>(rule.from_state)]) {
        if (target_used[static_cast<std::size_t>(u)]) continue;
        switch (rule.kind) {
          case ExposureKind::kSingleInteraction: {
            auto partners = pick_partners(pool, u, 1, wire_rng);
            if (partners.empty()) break;
            const std::string root = threads.post(partners[0]);
            threads.comment(u, root, root);
            target_used[static_cast<std::size_t>(u)] = true;
            break;
          }
          case ExposureKind::kSingleHomogeneousContext: {
            auto partners = pick_partners(pool, u, 2, wire_rng);
            if (partners.empty()) break;
            const std::string root = threads.post(partners[0]);
            threads.comment(u, root, root);
            threads.comment(partners[1], root, root);
            target_used[static_cast<std::size_t>(u)] = true;
            break;
          }
          case ExposureKind::kMajorityInteractions: {
            auto partners = pick_partners(pool, u, 3, wire_rng);
            if (partners.empty()) break;
            const std::string root = threads.post(partners[0]);
            const std::string mine = threads.comment(u, root, root);
            threads.comment(partners[1], root, mine);
            threads.comment(partners[2], root, mine);
            target_used[static_cast<std::size_t>(u)] = true;
            break;
          }
          case ExposureKind::kMajorityHomogeneousContexts: {
            auto partners = pick_partners(pool, u, 4, wire_rng);
            if (partners.empty()) break;
            for (int block = 0; block < 2; ++block) {
              const std::string root = threads.post(partners[static_cast<std::size_t>(2 * block)]);
              threads.comment(u, root, root);
              threads.comment(partners[static_cast<std::size_t>(2 * block + 1)], root, root);
            }
            target_used[static_cast<std::size_t>(u)] = true;
            break;
          }
        }
      }
    }

    // filler threads for everyone still silent this month
    std::vector<int> silent;
    for (int u = 0; u < n; ++u) {
      if (!plan.has_doc[static_cast<std::size_t>(u)]) silent.push_back(u);
    }
    wire_rng.shuffle(silent);
    if (!silent.empty()) {
      const std::size_t per_thread =
          static_cast<std::size_t>(config.thread_model.comments_per_thread) + 1;
      std::size_t n_threads = (silent.size() + per_thread - 1) / per_thread;
      n_threads = std::max(
          n_threads, std::min(silent.size(),
                              static_cast<std::size_t>(
                                  config.thread_model.threads_per_month)));
      std::vector<std::vector<int>> groups(n_threads);
      for (std::size_t i = 0; i < silent.size(); ++i) {
        groups[i % n_threads].push_back(silent[i]);
      }
      for (const auto& group : groups) {
        if (group.empty()) continue;
        const std::string root = threads.post(group[0]);
        std::vector<std::string> comment_ids;
        for (std::size_t i = 1; i < group.size(); ++i) {
          std::string parent = root;
          if (!comment_ids.empty() &&
              wire_rng.next_double() < config.thread_model.reply_depth_geom_p) {
            parent = comment_ids[static_cast<std::size_t>(
                wire_rng.next_below(comment_ids.size()))];
          }
          comment_ids.push_back(threads.comment(group[i], root, parent));
        }
      }
    }

    // realized exposure from this month's wiring, via the production
    // snapshot builder
    std::vector<Document> mini_docs;
    mini_docs.reserve(plan.docs.size());
    for (const auto& doc : plan.docs) {
      Document d;
      d.doc_id = doc.id;
      d.author_id = user_name(doc.author);
      d.thread_id = doc.thread;
      d.parent_doc_id = doc.parent;
      d.month = 0;
      d.kind = doc.is_post ? DocKind::kPost : DocKind::kComment;
      mini_docs.push_back(std::move(d));
    }
    const SnapshotSequence mini = build_snapshots(mini_docs, ThreadForest{});
    LabelMap mini_labels;
    for (int u = 0; u < n; ++u) {
      mini_labels.set(user_name(u), 0, states[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)]);
    }

    std::vector<std::set<std::pair<int, ExposureKind>>> events(
        static_cast<std::size_t>(n));
    if (!mini.graphs.empty()) {
      const auto& g = mini.graphs[0];
      const auto& h = mini.hypergraphs[0];
      for (int u = 0; u < n; ++u) {
        const std::string name = user_name(u);
        auto& user_events = events[static_cast<std::size_t>(u)];
        if (g.nodes.count(name)) {
          const auto pairwise = graph_neighborhood_labels(g, mini_labels, name);
          for (const auto& [label, count] : pairwise) {
            user_events.insert({label, ExposureKind::kSingleInteraction});
          }
          const int majority = most_frequent_label(pairwise);
          if (majority >= 0) {
            user_events.insert({majority, ExposureKind::kMajorityInteractions});
          }
        }
        if (h.nodes.count(name)) {
          const auto contexts =
              hyper_neighborhood_characteristic_labels(h, mini_labels, name);
          for (const auto& [label, count] : contexts) {
            user_events.insert({label, ExposureKind::kSingleHomogeneousContext});
          }
          const int majority = most_frequent_label(contexts);
          if (majority >= 0) {
            user_events.insert(
                {majority, ExposureKind::kMajorityHomogeneousContexts});
          }
        }
        for (const auto& [conditioning, kind] : user_events) {
          corpus.truth.exposures.emplace_back(name, t, conditioning, kind);
        }
      }
    }

    // next-month states: baseline row, overridden by a matching rule
    if (t + 1 < config.n_months) {
      for (int u = 0; u < n; ++u) {
        const int from = states[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)];
        int applied_rule = -1;
        std::vector<double> row =
            config.baseline_transition[static_cast<std::size_t>(from)];
        for (std::size_t r = 0; r < config.exposure_rules.size(); ++r) {
          const auto& rule = config.exposure_rules[r];
          if (rule.from_state != from) continue;
          if (!events[static_cast<std::size_t>(u)].count({rule.conditioning, rule.kind})) continue;
          const double base = row[static_cast<std::size_t>(rule.to_state)];
          const double scale =
              base >= 1.0 ? 0.0 : (1.0 - rule.probability) / (1.0 - base);
          for (auto& p : row) p *= scale;
          row[static_cast<std::size_t>(rule.to_state)] = rule.probability;
          applied_rule = static_cast<int>(r);
          break;
        }
        const int next = static_cast<int>(evolve_rng.next_weighted(row));
        states[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(u)] = next;
        corpus.truth.transitions.emplace_back(user_name(u), t, from, next,
                                              applied_rule);
      }
    }

    // texts and timestamps
    const std::int64_t month_start = add_months_utc(config.corpus_start_utc, t);
    int seq_in_month = 0;
    for (const auto& doc : plan.docs) {
      const int state = states[static_cast<std::size_t>(t)][static_cast<std::size_t>(doc.author)];
      std::string text;
      for (int w = 0; w < config.tokens_per_doc; ++w) {
        if (w) text.push_back(' ');
        text += pool_word(state, static_cast<int>(text_rng.next_below(kPoolSize)));
      }
      const std::int64_t created = month_start + 3600 + 37 * seq_in_month++;
      if (doc.is_post) {
        RawPost post;
        post.id = doc.id;
        post.author = user_name(doc.author);
        post.selftext = text;
        post.title = "";
        post.created_utc = created;
        corpus.posts.push_back(std::move(post));
      } else {
        RawComment comment;
        comment.id = doc.id;
        comment.author = user_name(doc.author);
        comment.body = text;
        comment.link_id = "t3_" + doc.thread;
        comment.parent_id = doc.parent == doc.thread ? "t3_" + doc.parent
                                                     : "t1_" + doc.parent;
        comment.created_utc = created;
        corpus.comments.push_back(std::move(comment));
      }
    }

    for (int u = 0; u < n; ++u) {
      corpus.truth.states[{user_name(u), t}] = states[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)];
    }
  }
  return corpus;
}

namespace {

void write_lexicon_tsvs(const LexiconStore& store, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "emotion.tsv");
    out << "# word\temotion\n";
    for (const auto& [word, mask] : store.emotion) {
      for (int e = 0; e < kEmotionCount; ++e) {
        if (mask & (1u << e)) {
          out << word << '\t' << kFeatureNames[static_cast<std::size_t>(e)] << '\n';
        }
      }
    }
  }
  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  {
    std::ofstream out(fs::path(dir) / "vad.tsv");
    out << "# word\tvalence\tarousal\tdominance\n";
    for (const auto& [word, vad] : store.vad) {
      out << word << '\t' << fmt(vad[0]) << '\t' << fmt(vad[1]) << '\t'
          << fmt(vad[2]) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "sentiment.tsv");
    out << "# word\tsigned_intensity\n";
    for (const auto& [word, v] : store.sentiment) {
      out << word << '\t' << fmt(v) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "taboo.tsv");
    out << "# word\tindex\n";
    for (const auto& [word, v] : store.taboo) {
      out << word << '\t' << fmt(v) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "subjectivity.tsv");
    out << "# word\tscore\n";
    for (const auto& [word, v] : store.subjectivity) {
      out << word << '\t' << fmt(v) << '\n';
    }
  }
}

}  // namespace

void write_sim_corpus(const SimCorpus& corpus, const SimConfig& input_config,
                      const std::string& out_dir) {
  namespace fs = std::filesystem;
  SimConfig config = input_config;
  config.finalize();
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "posts.ndjson");
    if (!out) throw std::runtime_error("cannot write posts in " + out_dir);
    for (const auto& p : corpus.posts) {
      nlohmann::json j;
      j["id"] = p.id;
      j["author"] = p.author;
      j["selftext"] = p.selftext;
      j["title"] = p.title;
      j["created_utc"] = p.created_utc;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "comments.ndjson");
    if (!out) throw std::runtime_error("cannot write comments in " + out_dir);
    for (const auto& c : corpus.comments) {
      nlohmann::json j;
      j["id"] = c.id;
      j["author"] = c.author;
      j["body"] = c.body;
      j["link_id"] = c.link_id;
      j["parent_id"] = c.parent_id;
      j["created_utc"] = c.created_utc;
      out << j.dump() << '\n';
    }
  }
  write_lexicon_tsvs(build_sim_lexicons(config), (fs::path(out_dir) / "lexicons").string());

  const fs::path ground = fs::path(out_dir) / "ground_truth";
  fs::create_directories(ground);
  {
    std::ofstream out(ground / "states.csv");
    out << "user,month,state\n";
    for (const auto& [key, state] : corpus.truth.states) {
      out << key.first << ',' << key.second << ',' << state << '\n';
    }
  }
  {
    std::ofstream out(ground / "exposures.csv");
    out << "user,month,conditioning,kind\n";
    for (const auto& [user, month, conditioning, kind] : corpus.truth.exposures) {
      out << user << ',' << month << ',' << conditioning << ','
          << exposure_kind_name(kind) << '\n';
    }
  }
  {
    std::ofstream out(ground / "transitions.csv");
    out << "user,month,from_state,to_state,rule_index\n";
    for (const auto& [user, month, from, to, rule] : corpus.truth.transitions) {
      out << user << ',' << month << ',' << from << ',' << to << ',' << rule
          << '\n';
    }
  }

  const std::int64_t end_utc =
      add_months_utc(config.corpus_start_utc, config.n_months);
  nlohmann::json cleaning;
  cleaning["bot_list"] = nlohmann::json::array();
  cleaning["moderator_list"] = nlohmann::json::array();
  // synthetic vocabularies carry no English function words, and isolated
  // posters must survive so the ground-truth universe stays intact
  cleaning["language_filter_enabled"] = false;
  cleaning["min_interaction_partners"] = 0;
  cleaning["date_range"] = {{"start_utc", config.corpus_start_utc},
                            {"end_utc", end_utc}};
  {
    std::ofstream out(fs::path(out_dir) / "cleaning_config.json");
    out << cleaning.dump(2) << '\n';
  }

  nlohmann::json pipeline;
  pipeline["schema_version"] = 1;
  pipeline["posts"] = "posts.ndjson";
  pipeline["comments"] = "comments.ndjson";
  pipeline["lexicons"] = "lexicons";
  pipeline["cleaning"] = cleaning;
  pipeline["clustering"] = {{"k", config.k_states},
                            {"auto_k", false},
                            {"ks", std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10}}};
  nlohmann::json kinds = nlohmann::json::array();
  for (ExposureKind kind : kAllExposureKinds) {
    kinds.push_back(exposure_kind_name(kind));
  }
  pipeline["exposure_kinds"] = kinds;
  pipeline["significance"] = {{"n_replicates", 100},
                              {"alpha", 0.01},
                              {"models", std::vector<std::string>{"cluster", "temporal"}},
                              {"z_variant", "paper"}};
  pipeline["persistence_filter"] = true;
  pipeline["include_parent_in_context"] = true;
  pipeline["master_seed"] = config.seed;
  pipeline["salt_env"] = "SALT";
  {
    std::ofstream out(fs::path(out_dir) / "pipeline_config.json");
    out << pipeline.dump(2) << '\n';
  }

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["n_users"] = config.n_users;
  meta["n_months"] = config.n_months;
  meta["k_states"] = config.k_states;
  meta["seed"] = config.seed;
  meta["corpus_start_utc"] = config.corpus_start_utc;
  meta["posts"] = corpus.posts.size();
  meta["comments"] = corpus.comments.size();
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : config.exposure_rules) {
    rules.push_back({{"conditioning", rule.conditioning},
                     {"kind", exposure_kind_name(rule.kind)},
                     {"from_state", rule.from_state},
                     {"to_state", rule.to_state},
                     {"probability", rule.probability}});
  }
  meta["exposure_rules"] = rules;
  {
    std::ofstream out(fs::path(out_dir) / "meta.json");
    out << meta.dump(2) << '\n';
  }
}

GroundTruth read_ground_truth(const std::string& ground_dir) {
  namespace fs = std::filesystem;
  GroundTruth truth;
  auto read_csv = [](const std::string& path,
                     const std::function<void(const std::vector<std::string>&)>& row_fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
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
      row_fn(fields);
    }
  };
  read_csv((fs::path(ground_dir) / "states.csv").string(),
           [&](const std::vector<std::string>& f) {
             truth.states[{f[0], std::stoi(f[1])}] = std::stoi(f[2]);
           });
  read_csv((fs::path(ground_dir) / "exposures.csv").string(),
           [&](const std::vector<std::string>& f) {
             truth.exposures.emplace_back(f[0], std::stoi(f[1]), std::stoi(f[2]),
                                          exposure_kind_from_name(f[3]));
           });
  read_csv((fs::path(ground_dir) / "transitions.csv").string(),
           [&](const std::vector<std::string>& f) {
             truth.transitions.emplace_back(f[0], std::stoi(f[1]),
                                            std::stoi(f[2]), std::stoi(f[3]),
                                            std::stoi(f[4]));
           });
  return truth;
}

namespace {

struct VerdictRow {
  int conditioning = 0;
  std::string kind;
  int from = 0;
  int to = 0;
  bool keep_combined = false;
  bool applicable = true;
};

std::vector<VerdictRow> read_verdict_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open verdicts: " + path);
  std::vector<VerdictRow> rows;
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
    if (fields.size() < 14) {
      throw std::runtime_error(path + ": bad verdict row: " + line);
    }
    VerdictRow row;
    row.conditioning = std::stoi(fields[0]);
    row.kind = fields[1];
    row.from = std::stoi(fields[2]);
    row.to = std::stoi(fields[3]);
    if (fields[13] == "na") {
      row.applicable = false;
    } else {
      row.keep_combined = fields[13] == "1";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

RecoveryReport evaluate_recovery(const std::string& ground_dir,
                                 const std::string& run_dir,
                                 const SimConfig& input_config,
                                 const std::string& salt) {
  namespace fs = std::filesystem;
  SimConfig config = input_config;
  config.finalize();
  const int k = config.k_states;
  const GroundTruth truth = read_ground_truth(ground_dir);
  const LabelMap assignments =
      read_assignments((fs::path(run_dir) / "cluster" / "assignments.csv").string());

  std::unordered_map<std::string, std::string> pseudo_cache;
  auto pseudo_of = [&](const std::string& user) -> const std::string& {
    auto it = pseudo_cache.find(user);
    if (it == pseudo_cache.end()) {
      it = pseudo_cache.emplace(user, pseudonymize(user, salt)).first;
    }
    return it->second;
  };

  // contingency[true ][pipeline]
  std::vector<std::vector<double>> contingency(
      static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  std::size_t missing = 0;
  std::size_t matched = 0;
  for (const auto& [key, state] : truth.states) {
    const auto label = assignments.label(pseudo_of(key.first), key.second);
    if (!label) {
      ++missing;
      continue;
    }
    ++contingency[static_cast<std::size_t>(state)][static_cast<std::size_t>(*label)];
    ++matched;
  }
  if (missing > 0 || matched != assignments.size()) {
    throw std::runtime_error(
        "user universe mismatch: " + std::to_string(missing) +
        " ground pairs missing from the run, " +
        std::to_string(assignments.size()) + " assignments vs " +
        std::to_string(matched) + " matched");
  }

  RecoveryReport report;
  report.matched_pairs = matched;

  // pair-counting Rand index (mapping-invariant)
  double sum_cells = 0.0;
  std::vector<double> row_sums(static_cast<std::size_t>(k), 0.0);
  std::vector<double> col_sums(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double c = contingency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      sum_cells += comb2(c);
      row_sums[static_cast<std::size_t>(i)] += c;
      col_sums[static_cast<std::size_t>(j)] += c;
    }
  }
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (int i = 0; i < k; ++i) {
    sum_rows += comb2(row_sums[static_cast<std::size_t>(i)]);
    sum_cols += comb2(col_sums[static_cast<std::size_t>(i)]);
  }
  const double total_pairs = comb2(static_cast<double>(matched));
  report.rand_index =
      total_pairs == 0.0
          ? 1.0
          : (total_pairs + 2.0 * sum_cells - sum_rows - sum_cols) / total_pairs;

  // best pipeline-label -> true-state mapping by brute force
  if (k > 8) throw std::runtime_error("evaluate_recovery: k too large");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  double best_agreement = -1.0;
  for (long long p = 0; p < factorial(k); ++p) {
    double agreement = 0.0;
    for (int pipe = 0; pipe < k; ++pipe) {
      agreement += contingency[static_cast<std::size_t>(perm[static_cast<std::size_t>(pipe)])]
                              [static_cast<std::size_t>(pipe)];
    }
    if (agreement > best_agreement) {
      best_agreement = agreement;
      best_perm = perm;
    }
    if (!std::next_permutation(perm.begin(), perm.end())) break;
  }
  report.label_to_state = best_perm;
  std::vector<int> state_to_label(static_cast<std::size_t>(k), 0);
  for (int pipe = 0; pipe < k; ++pipe) {
    state_to_label[static_cast<std::size_t>(best_perm[static_cast<std::size_t>(pipe)])] = pipe;
  }

  // planted cells against estimated CTP matrices and verdicts
  const auto verdicts =
      read_verdict_rows((fs::path(run_dir) / "nullcheck" / "verdicts.csv").string());
  std::set<std::tuple<int, std::string, int, int>> planted_keys;
  for (std::size_t r = 0; r < config.exposure_rules.size(); ++r) {
    const auto& rule = config.exposure_rules[r];
    RuleRecovery recovery;
    recovery.rule_index = r;
    recovery.planted = rule.probability;
    const int cond = state_to_label[static_cast<std::size_t>(rule.conditioning)];
    const int from = state_to_label[static_cast<std::size_t>(rule.from_state)];
    const int to = state_to_label[static_cast<std::size_t>(rule.to_state)];
    const std::string kind_name = exposure_kind_name(rule.kind);
    const std::string matrix_path =
        (fs::path(run_dir) / "transitions" /
         ("ctp_c" + std::to_string(cond) + "_" + kind_name + ".csv"))
            .string();
    const TransitionMatrix matrix = read_transition_matrix(matrix_path);
    recovery.estimated = matrix.probs[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
    recovery.support = matrix.support[static_cast<std::size_t>(from)];
    recovery.abs_error = std::abs(recovery.estimated - recovery.planted);
    for (const auto& row : verdicts) {
      if (row.conditioning == cond && row.kind == kind_name &&
          row.from == from && row.to == to) {
        recovery.keep_combined = row.keep_combined;
        recovery.verdict_found = true;
        break;
      }
    }
    planted_keys.insert({cond, kind_name, from, to});
    report.rules.push_back(recovery);
  }

  for (const auto& row : verdicts) {
    if (row.kind == "metapopulation") continue;
    if (!row.applicable) continue;
    if (planted_keys.count({row.conditioning, row.kind, row.from, row.to})) {
      continue;
    }
    ++report.nonplanted_cells;
    if (row.keep_combined) ++report.nonplanted_kept;
  }
  report.false_positive_fraction =
      report.nonplanted_cells == 0
          ? 0.0
          : static_cast<double>(report.nonplanted_kept) /
                static_cast<double>(report.nonplanted_cells);
  return report;
}

void write_recovery_report(const RecoveryReport& report,
                           const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["rand_index"] = report.rand_index;
  j["matched_pairs"] = report.matched_pairs;
  j["label_to_state"] = report.label_to_state;
  auto rules = nlohmann::json::array();
  for (const auto& r : report.rules) {
    rules.push_back({{"rule_index", r.rule_index},
                     {"planted", r.planted},
                     {"estimated", r.estimated},
                     {"abs_error", r.abs_error},
                     {"support", r.support},
                     {"keep_combined", r.keep_combined},
                     {"verdict_found", r.verdict_found}});
  }
  j["rules"] = rules;
  j["nonplanted_cells"] = report.nonplanted_cells;
  j["nonplanted_kept"] = report.nonplanted_kept;
  j["false_positive_fraction"] = report.false_positive_fraction;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write recovery report: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace statetrails
