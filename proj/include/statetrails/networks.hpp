#ifndef STATETRAILS_NETWORKS_HPP
#define STATETRAILS_NETWORKS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "statetrails/types.hpp"

namespace statetrails {

struct SnapshotGraph {
  int month = 0;
  std::set<std::string> nodes;
  // unordered pairs stored as (min, max)
  std::set<std::pair<std::string, std::string>> edges;
  std::map<std::string, std::set<std::string>> adjacency;

  void add_edge(const std::string& u, const std::string& v);
};

struct Hyperedge {
  std::string parent_doc_id;  // context anchor; one hyperedge per parent
  std::vector<std::string> members;  // sorted, distinct, size >= 2
};

struct SnapshotHypergraph {
  int month = 0;
  std::set<std::string> nodes;
  std::vector<Hyperedge> hyperedges;  // sorted by parent_doc_id
  std::map<std::string, std::vector<std::size_t>> incidence;

  void rebuild_incidence();
};

struct SnapshotSequence {
  std::vector<SnapshotGraph> graphs;        // index = month
  std::vector<SnapshotHypergraph> hypergraphs;

  std::size_t months() const { return graphs.size(); }
};

// Monthly reply graphs and discussion-context hypergraphs. An edge joins the
// authors of a direct reply, placed in the reply's month. A context is the
// sibling comment group under one parent document within one month, plus the
// parent's author when include_parent is set; contexts with fewer than two
// distinct authors are dropped.
SnapshotSequence build_snapshots(const std::vector<Document>& docs,
                                 const ThreadForest& forest,
                                 bool include_parent = true);

using LabelMultiset = std::map<int, int>;

// Labels of u's adjacent nodes (one per neighbor); unlabeled neighbors are
// skipped. Throws when u is not a node of the snapshot.
LabelMultiset graph_neighborhood_labels(const SnapshotGraph& g,
                                        const LabelMap& labels,
                                        const std::string& u);

// Most frequent member label of each hyperedge containing u (ties toward the
// lower label); hyperedges with no labeled member contribute nothing.
LabelMultiset hyper_neighborhood_characteristic_labels(
    const SnapshotHypergraph& h, const LabelMap& labels, const std::string& u);

// Lower label wins ties; -1 for an empty multiset.
int most_frequent_label(const LabelMultiset& multiset);

void write_snapshots(const SnapshotSequence& seq, const std::string& dir);
SnapshotSequence read_snapshots(const std::string& dir);

}  // namespace statetrails

#endif
