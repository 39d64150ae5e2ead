#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "statetrails/networks.hpp"
#include "statetrails/transitions.hpp"

using namespace statetrails;

namespace {

UserMonthProfile profile(const std::string& u, int m) {
  UserMonthProfile p;
  p.author_id = u;
  p.month = m;
  p.n_docs = 1;
  return p;
}

Document doc(const std::string& id, const std::string& author, int month,
             const std::string& thread, const std::string& parent = "") {
  Document d;
  d.doc_id = id;
  d.author_id = author;
  d.thread_id = thread;
  d.parent_doc_id = parent;
  d.month = month;
  d.kind = parent.empty() ? DocKind::kPost : DocKind::kComment;
  return d;
}

}  // namespace

TEST_CASE("persistence keeps users with two consecutive months") {
  SUBCASE("months {2,3} yield the pair (u,2)") {
    const auto result = persistence_filter({profile("u", 2), profile("u", 3)});
    CHECK(result.eligible == std::set<UserMonth>{{"u", 2}});
    CHECK(result.persistent_users == 1);
    CHECK(result.dropped_fraction == 0.0);
  }
  SUBCASE("months {1,3,5} yield nothing") {
    const auto result = persistence_filter(
        {profile("u", 1), profile("u", 3), profile("u", 5)});
    CHECK(result.eligible.empty());
    CHECK(result.persistent_users == 0);
    CHECK(result.dropped_fraction == 1.0);
  }
  SUBCASE("half single-month users give dropped fraction one half") {
    std::vector<UserMonthProfile> profiles;
    for (int u = 0; u < 10; ++u) {
      profiles.push_back(profile("multi" + std::to_string(u), 0));
      profiles.push_back(profile("multi" + std::to_string(u), 1));
      profiles.push_back(profile("single" + std::to_string(u), u % 5));
    }
    const auto result = persistence_filter(profiles);
    CHECK(result.total_users == 20);
    CHECK(result.persistent_users == 10);
    CHECK(result.dropped_fraction == 0.5);
  }
}

namespace {

// one month of wiring: u's post gets a comment from each listed neighbor
struct MonthWiring {
  std::map<std::string, std::vector<std::string>> replies;  // poster -> repliers
};

struct Fixture {
  std::vector<Document> docs;
  LabelMap labels;
  SnapshotSequence seq;
  PersistenceResult persistence;

  void wire(const std::vector<MonthWiring>& months,
            const std::map<std::string, std::vector<int>>& label_rows) {
    int seq_no = 0;
    for (std::size_t m = 0; m < months.size(); ++m) {
      for (const auto& [poster, repliers] : months[m].replies) {
        const std::string pid = "p" + std::to_string(seq_no++);
        docs.push_back(doc(pid, poster, static_cast<int>(m), pid));
        for (const auto& replier : repliers) {
          const std::string cid = "c" + std::to_string(seq_no++);
          docs.push_back(doc(cid, replier, static_cast<int>(m), pid, pid));
        }
      }
    }
    std::vector<UserMonthProfile> profiles;
    for (const auto& [user, row] : label_rows) {
      for (std::size_t m = 0; m < row.size(); ++m) {
        if (row[m] < 0) continue;
        labels.set(user, static_cast<int>(m), row[m]);
        profiles.push_back(profile(user, static_cast<int>(m)));
      }
    }
    ThreadForest forest;
    for (const auto& d : docs) {
      if (!d.parent_doc_id.empty()) forest.parent_of[d.doc_id] = d.parent_doc_id;
    }
    seq = build_snapshots(docs, forest);
    persistence = persistence_filter(profiles);
  }
};

}  // namespace

TEST_CASE("exposure predicates follow the four definitions") {
  Fixture fx;
  // month 0: u replies to a (post) and to b, c via their posts
  MonthWiring m0;
  m0.replies["a"] = {"u"};
  m0.replies["b"] = {"u"};
  m0.replies["c"] = {"u"};
  fx.wire({m0, MonthWiring{}},
          {{"u", {0, 0}}, {"a", {1, -1}}, {"b", {2, -1}}, {"c", {2, -1}}});

  // neighbors labeled {1, 2, 2}
  CHECK(exposed("u", 0, 1, ExposureKind::kSingleInteraction, fx.seq, fx.labels));
  CHECK(exposed("u", 0, 2, ExposureKind::kSingleInteraction, fx.seq, fx.labels));
  CHECK(!exposed("u", 0, 3, ExposureKind::kSingleInteraction, fx.seq, fx.labels));
  CHECK(exposed("u", 0, 2, ExposureKind::kMajorityInteractions, fx.seq, fx.labels));
  CHECK(!exposed("u", 0, 1, ExposureKind::kMajorityInteractions, fx.seq, fx.labels));

  // contexts: {a,u} char 0 (tie 0 vs 1), {b,u} char 0, {c,u} char 0
  CHECK(exposed("u", 0, 0, ExposureKind::kSingleHomogeneousContext, fx.seq, fx.labels));
  CHECK(exposed("u", 0, 0, ExposureKind::kMajorityHomogeneousContexts, fx.seq, fx.labels));
  CHECK(!exposed("u", 0, 2, ExposureKind::kSingleHomogeneousContext, fx.seq, fx.labels));

  // empty neighborhoods expose nothing
  CHECK(!exposed("u", 1, 0, ExposureKind::kSingleInteraction, fx.seq, fx.labels));
  CHECK(!exposed("ghost", 0, 0, ExposureKind::kSingleInteraction, fx.seq, fx.labels));
}

TEST_CASE("majority exposure over characteristic labels") {
  Fixture fx;
  MonthWiring m0;
  m0.replies["a"] = {"u", "a2"};
  m0.replies["b"] = {"u", "b2"};
  m0.replies["c"] = {"u", "c2"};
  fx.wire({m0, MonthWiring{}},
          {{"u", {1, 1}},
           {"a", {3, -1}},
           {"a2", {3, -1}},
           {"b", {3, -1}},
           {"b2", {3, -1}},
           {"c", {2, -1}},
           {"c2", {1, -1}}});
  // contexts: {a,a2,u}: 3,3,1 -> 3; {b,b2,u}: 3,3,1 -> 3; {c,c2,u}: 2,1,1 -> 1
  CHECK(exposed("u", 0, 3, ExposureKind::kMajorityHomogeneousContexts, fx.seq, fx.labels));
  CHECK(!exposed("u", 0, 2, ExposureKind::kMajorityHomogeneousContexts, fx.seq, fx.labels));
  CHECK(exposed("u", 0, 1, ExposureKind::kSingleHomogeneousContext, fx.seq, fx.labels));
}

TEST_CASE("deterministic fixture: every exposed user moves 2 -> 1") {
  Fixture fx;
  MonthWiring m0;
  m0.replies["c"] = {"u", "v"};  // c labeled 0 exposes u, v
  fx.wire({m0, MonthWiring{}},
          {{"u", {2, 1}}, {"v", {2, 1}}, {"c", {0, 0}}});
  const CtpResult result = estimate_ctp(fx.seq, fx.labels, fx.persistence, 0,
                                        ExposureKind::kSingleInteraction, 3);
  CHECK(result.matrix.probs[2][1] == 1.0);
  CHECK(result.matrix.counts[2][1] == 2);
  CHECK(!result.degenerate);
  // u and v counted among 3 persistent users (c included)
  CHECK(result.users_affected == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("six users over three months match a manual tally") {
  // month 0: a<-b reply, c<-d reply; month 1: a<-d; labels move by hand
  Fixture fx;
  MonthWiring m0;
  m0.replies["a"] = {"b"};
  m0.replies["c"] = {"d"};
  MonthWiring m1;
  m1.replies["a"] = {"d"};
  fx.wire({m0, m1, MonthWiring{}}, {{"a", {0, 0, 1}},
                                    {"b", {1, 0, -1}},
                                    {"c", {0, 1, 1}},
                                    {"d", {1, 1, 0}}});
  // eligible pairs: (a,0),(a,1),(b,0),(c,0),(c,1),(d,0),(d,1)
  CHECK(fx.persistence.eligible.size() == 7);

  // single interaction with cluster 1 at t: a(0): neighbor b=1 yes; b(0):
  // neighbor a=0 no; c(0): neighbor d=1 yes; d(0): neighbor c=0 no;
  // a(1): neighbor d=1 yes; d(1): neighbor a=0 no; c(1): isolated no
  const CtpResult result = estimate_ctp(fx.seq, fx.labels, fx.persistence, 1,
                                        ExposureKind::kSingleInteraction, 2);
  CHECK(result.matrix.counts[0][0] == 1);  // a: 0->0
  CHECK(result.matrix.counts[0][1] == 2);  // c: 0->1, a(1): 0->1
  CHECK(result.matrix.counts[1][0] == 0);
  CHECK(result.matrix.counts[1][1] == 0);
  CHECK(result.matrix.support[0] == 3);
  CHECK(result.users_affected == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("metapopulation TP counts all eligible pairs") {
  Fixture fx;
  fx.wire({MonthWiring{}, MonthWiring{}, MonthWiring{}},
          {{"a", {0, 0, 0}}, {"b", {1, 0, 1}}});
  // a: 0->0 twice; b: 1->0 then 0->1
  const TransitionMatrix tp = estimate_tp(fx.labels, fx.persistence, 2);
  CHECK(tp.counts[0][0] == 2);
  CHECK(tp.counts[1][0] == 1);
  CHECK(tp.counts[0][1] == 1);
  CHECK(tp.probs[0][0] == doctest::Approx(2.0 / 3.0));
  CHECK(tp.probs[1][0] == 1.0);
}

TEST_CASE("identity labels give a diagonal TP") {
  std::vector<UserMonthProfile> profiles;
  LabelMap labels;
  for (int u = 0; u < 6; ++u) {
    for (int m = 0; m < 4; ++m) {
      profiles.push_back(profile("u" + std::to_string(u), m));
      labels.set("u" + std::to_string(u), m, u % 3);
    }
  }
  const auto persistence = persistence_filter(profiles);
  const TransitionMatrix tp = estimate_tp(labels, persistence, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(tp.probs[i][j] == (i == j ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("iid uniform labels give near-uniform TP rows") {
  std::mt19937 rng(42);
  std::vector<UserMonthProfile> profiles;
  LabelMap labels;
  for (int u = 0; u < 2000; ++u) {
    for (int m = 0; m < 13; ++m) {
      profiles.push_back(profile("u" + std::to_string(u), m));
      labels.set("u" + std::to_string(u), m, static_cast<int>(rng() % 4));
    }
  }
  const auto persistence = persistence_filter(profiles);
  const TransitionMatrix tp = estimate_tp(labels, persistence, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(tp.probs[i][j] == doctest::Approx(0.25).epsilon(0.08));
      CHECK(std::abs(tp.probs[i][j] - 0.25) < 0.02);
    }
  }
}

TEST_CASE("degenerate conditioning is flagged") {
  Fixture fx;
  fx.wire({MonthWiring{}, MonthWiring{}}, {{"a", {0, 0}}});
  const CtpResult result = estimate_ctp(fx.seq, fx.labels, fx.persistence, 1,
                                        ExposureKind::kSingleInteraction, 2);
  CHECK(result.degenerate);
  CHECK(result.users_affected == 0.0);
  for (const auto& row : result.matrix.probs) {
    for (double p : row) CHECK(p == 0.0);
  }
}

TEST_CASE("majority exposure implies single exposure") {
  std::mt19937 rng(7);
  // random corpora, property probed over many (u, t, C)
  for (int trial = 0; trial < 5; ++trial) {
    Fixture fx;
    std::vector<MonthWiring> months(4);
    std::map<std::string, std::vector<int>> rows;
    const int n = 12;
    for (int u = 0; u < n; ++u) {
      rows["u" + std::to_string(u)] = {static_cast<int>(rng() % 3),
                                       static_cast<int>(rng() % 3),
                                       static_cast<int>(rng() % 3),
                                       static_cast<int>(rng() % 3)};
    }
    for (auto& wiring : months) {
      for (int p = 0; p < 4; ++p) {
        const std::string poster = "u" + std::to_string(rng() % n);
        auto& repliers = wiring.replies[poster];
        for (int r = 0; r < 3; ++r) {
          const std::string replier = "u" + std::to_string(rng() % n);
          if (replier != poster) repliers.push_back(replier);
        }
      }
    }
    fx.wire(months, rows);
    for (int u = 0; u < n; ++u) {
      for (int t = 0; t < 4; ++t) {
        for (int c = 0; c < 3; ++c) {
          const std::string name = "u" + std::to_string(u);
          if (exposed(name, t, c, ExposureKind::kMajorityInteractions, fx.seq,
                      fx.labels)) {
            CHECK(exposed(name, t, c, ExposureKind::kSingleInteraction, fx.seq,
                          fx.labels));
          }
          if (exposed(name, t, c, ExposureKind::kMajorityHomogeneousContexts,
                      fx.seq, fx.labels)) {
            CHECK(exposed(name, t, c, ExposureKind::kSingleHomogeneousContext,
                          fx.seq, fx.labels));
          }
        }
      }
    }
  }
}

TEST_CASE("CTP counts never exceed TP counts cell-wise") {
  std::mt19937 rng(19);
  Fixture fx;
  std::vector<MonthWiring> months(5);
  std::map<std::string, std::vector<int>> rows;
  for (int u = 0; u < 15; ++u) {
    std::vector<int> row;
    for (int m = 0; m < 5; ++m) row.push_back(static_cast<int>(rng() % 4));
    rows["u" + std::to_string(u)] = row;
  }
  for (auto& wiring : months) {
    for (int p = 0; p < 5; ++p) {
      const std::string poster = "u" + std::to_string(rng() % 15);
      for (int r = 0; r < 2; ++r) {
        const std::string replier = "u" + std::to_string(rng() % 15);
        if (replier != poster) wiring.replies[poster].push_back(replier);
      }
    }
  }
  fx.wire(months, rows);
  const TransitionMatrix tp = estimate_tp(fx.labels, fx.persistence, 4);
  for (int c = 0; c < 4; ++c) {
    for (ExposureKind kind : kAllExposureKinds) {
      const CtpResult ctp =
          estimate_ctp(fx.seq, fx.labels, fx.persistence, c, kind, 4);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          CHECK(ctp.matrix.counts[i][j] <= tp.counts[i][j]);
        }
      }
    }
  }
}

TEST_CASE("row stochasticity within 1e-9 for supported rows") {
  std::mt19937 rng(23);
  Fixture fx;
  std::vector<MonthWiring> months(4);
  std::map<std::string, std::vector<int>> rows;
  for (int u = 0; u < 20; ++u) {
    std::vector<int> row;
    for (int m = 0; m < 4; ++m) row.push_back(static_cast<int>(rng() % 4));
    rows["u" + std::to_string(u)] = row;
  }
  for (auto& wiring : months) {
    for (int p = 0; p < 6; ++p) {
      const std::string poster = "u" + std::to_string(rng() % 20);
      const std::string replier = "u" + std::to_string(rng() % 20);
      if (replier != poster) wiring.replies[poster].push_back(replier);
    }
  }
  fx.wire(months, rows);
  const TransitionMatrix tp = estimate_tp(fx.labels, fx.persistence, 4);
  for (int i = 0; i < 4; ++i) {
    double total = 0.0;
    for (double p : tp.probs[i]) total += p;
    if (tp.support[i] > 0) {
      CHECK(std::abs(total - 1.0) < 1e-9);
    } else {
      CHECK(total == 0.0);
    }
  }
}

TEST_CASE("single and batch estimates agree") {
  std::mt19937 rng(31);
  Fixture fx;
  std::vector<MonthWiring> months(4);
  std::map<std::string, std::vector<int>> rows;
  for (int u = 0; u < 15; ++u) {
    std::vector<int> row;
    for (int m = 0; m < 4; ++m) row.push_back(static_cast<int>(rng() % 3));
    rows["u" + std::to_string(u)] = row;
  }
  for (auto& wiring : months) {
    for (int p = 0; p < 5; ++p) {
      const std::string poster = "u" + std::to_string(rng() % 15);
      for (int r = 0; r < 2; ++r) {
        const std::string replier = "u" + std::to_string(rng() % 15);
        if (replier != poster) wiring.replies[poster].push_back(replier);
      }
    }
  }
  fx.wire(months, rows);
  std::vector<std::pair<int, ExposureKind>> targets;
  for (int c = 0; c < 3; ++c) {
    for (ExposureKind kind : kAllExposureKinds) targets.emplace_back(c, kind);
  }
  const auto batch =
      estimate_ctp_batch(fx.seq, fx.labels, fx.persistence, targets, 3);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const CtpResult single = estimate_ctp(fx.seq, fx.labels, fx.persistence,
                                          targets[i].first, targets[i].second, 3);
    CHECK(single.matrix.counts == batch[i].matrix.counts);
    CHECK(single.users_affected == batch[i].users_affected);
    CHECK(single.degenerate == batch[i].degenerate);
  }
}
