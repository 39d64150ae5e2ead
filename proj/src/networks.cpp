#include "statetrails/networks.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "statetrails/textprep.hpp"

namespace statetrails {

void SnapshotGraph::add_edge(const std::string& u, const std::string& v) {
  if (u == v) return;
  nodes.insert(u);
  nodes.insert(v);
  edges.insert(u < v ? std::make_pair(u, v) : std::make_pair(v, u));
  adjacency[u].insert(v);
  adjacency[v].insert(u);
}

void SnapshotHypergraph::rebuild_incidence() {
  incidence.clear();
  for (std::size_t i = 0; i < hyperedges.size(); ++i) {
    for (const auto& member : hyperedges[i].members) {
      incidence[member].push_back(i);
    }
  }
}

SnapshotSequence build_snapshots(const std::vector<Document>& docs,
                                 const ThreadForest& forest,
                                 bool include_parent) {
  (void)forest;  // parent links ride on the documents themselves
  SnapshotSequence seq;
  if (docs.empty()) return seq;

  int max_month = 0;
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& doc : docs) {
    max_month = std::max(max_month, doc.month);
    by_id[doc.doc_id] = &doc;
  }
  const std::size_t months = static_cast<std::size_t>(max_month) + 1;
  seq.graphs.resize(months);
  seq.hypergraphs.resize(months);
  for (std::size_t m = 0; m < months; ++m) {
    seq.graphs[m].month = static_cast<int>(m);
    seq.hypergraphs[m].month = static_cast<int>(m);
  }

  // authors active in a month are snapshot nodes even when isolated
  for (const auto& doc : docs) {
    seq.graphs[static_cast<std::size_t>(doc.month)].nodes.insert(doc.author_id);
    seq.hypergraphs[static_cast<std::size_t>(doc.month)].nodes.insert(doc.author_id);
  }

  // reply edges, placed in the replying document's month
  for (const auto& doc : docs) {
    if (doc.kind != DocKind::kComment) continue;
    auto it = by_id.find(doc.parent_doc_id);
    if (it == by_id.end()) continue;
    seq.graphs[static_cast<std::size_t>(doc.month)].add_edge(doc.author_id,
                                                             it->second->author_id);
  }

  // sibling groups: same-month comments sharing a parent document
  std::map<std::pair<int, std::string>, std::set<std::string>> contexts;
  for (const auto& doc : docs) {
    if (doc.kind != DocKind::kComment) continue;
    contexts[{doc.month, doc.parent_doc_id}].insert(doc.author_id);
  }
  for (auto& [key, members] : contexts) {
    const auto& [month, parent_id] = key;
    if (include_parent) {
      auto it = by_id.find(parent_id);
      if (it != by_id.end()) members.insert(it->second->author_id);
    }
    if (members.size() < 2) continue;
    Hyperedge edge;
    edge.parent_doc_id = parent_id;
    edge.members.assign(members.begin(), members.end());
    auto& h = seq.hypergraphs[static_cast<std::size_t>(month)];
    for (const auto& member : edge.members) h.nodes.insert(member);
    h.hyperedges.push_back(std::move(edge));
  }
  for (auto& h : seq.hypergraphs) {
    std::sort(h.hyperedges.begin(), h.hyperedges.end(),
              [](const Hyperedge& a, const Hyperedge& b) {
                return a.parent_doc_id < b.parent_doc_id;
              });
    h.rebuild_incidence();
  }
  return seq;
}

LabelMultiset graph_neighborhood_labels(const SnapshotGraph& g,
                                        const LabelMap& labels,
                                        const std::string& u) {
  if (!g.nodes.count(u)) {
    throw std::runtime_error("node not present in snapshot: " + u);
  }
  LabelMultiset out;
  auto it = g.adjacency.find(u);
  if (it == g.adjacency.end()) return out;
  for (const auto& neighbor : it->second) {
    if (auto label = labels.label(neighbor, g.month)) ++out[*label];
  }
  return out;
}

LabelMultiset hyper_neighborhood_characteristic_labels(
    const SnapshotHypergraph& h, const LabelMap& labels,
    const std::string& u) {
  LabelMultiset out;
  auto it = h.incidence.find(u);
  if (it == h.incidence.end()) return out;
  for (std::size_t idx : it->second) {
    LabelMultiset member_labels;
    for (const auto& member : h.hyperedges[idx].members) {
      if (auto label = labels.label(member, h.month)) ++member_labels[*label];
    }
    const int characteristic = most_frequent_label(member_labels);
    if (characteristic >= 0) ++out[characteristic];
  }
  return out;
}

int most_frequent_label(const LabelMultiset& multiset) {
  int best = -1;
  int best_count = 0;
  for (const auto& [label, count] : multiset) {  // ascending labels: ties keep the lower
    if (count > best_count) {
      best_count = count;
      best = label;
    }
  }
  return best;
}

namespace {

std::string month_tag(int month) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", month);
  return buf;
}

}  // namespace

void write_snapshots(const SnapshotSequence& seq, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (std::size_t m = 0; m < seq.months(); ++m) {
    const std::string tag = month_tag(static_cast<int>(m));
    std::ofstream edges(fs::path(dir) / ("edges_m" + tag + ".csv"));
    if (!edges) throw std::runtime_error("cannot write edges for month " + tag);
    edges << "u,v\n";
    for (const auto& [u, v] : seq.graphs[m].edges) {
      edges << u << ',' << v << '\n';
    }
    std::ofstream hyper(fs::path(dir) / ("hyperedges_m" + tag + ".txt"));
    if (!hyper) {
      throw std::runtime_error("cannot write hyperedges for month " + tag);
    }
    for (const auto& edge : seq.hypergraphs[m].hyperedges) {
      for (std::size_t i = 0; i < edge.members.size(); ++i) {
        if (i) hyper << ' ';
        hyper << edge.members[i];
      }
      hyper << '\n';
    }
    std::ofstream nodes(fs::path(dir) / ("nodes_m" + tag + ".txt"));
    if (!nodes) throw std::runtime_error("cannot write nodes for month " + tag);
    for (const auto& node : seq.graphs[m].nodes) nodes << node << '\n';
  }
}

SnapshotSequence read_snapshots(const std::string& dir) {
  namespace fs = std::filesystem;
  SnapshotSequence seq;
  for (int m = 0;; ++m) {
    const std::string tag = month_tag(m);
    const fs::path edges_path = fs::path(dir) / ("edges_m" + tag + ".csv");
    if (!fs::exists(edges_path)) break;
    SnapshotGraph g;
    g.month = m;
    SnapshotHypergraph h;
    h.month = m;

    std::ifstream nodes(fs::path(dir) / ("nodes_m" + tag + ".txt"));
    std::string line;
    while (nodes && std::getline(nodes, line)) {
      if (!line.empty()) {
        g.nodes.insert(line);
        h.nodes.insert(line);
      }
    }
    std::ifstream edges(edges_path);
    bool first = true;
    while (std::getline(edges, line)) {
      if (first) {
        first = false;
        continue;
      }
      if (line.empty()) continue;
      auto comma = line.find(',');
      g.add_edge(line.substr(0, comma), line.substr(comma + 1));
    }
    std::ifstream hyper(fs::path(dir) / ("hyperedges_m" + tag + ".txt"));
    std::size_t idx = 0;
    while (hyper && std::getline(hyper, line)) {
      if (line.empty()) continue;
      Hyperedge edge;
      // parent anchors are not serialized; synthesize stable keys
      edge.parent_doc_id = "h" + std::to_string(idx++);
      std::stringstream ss(line);
      std::string member;
      while (ss >> member) edge.members.push_back(member);
      for (const auto& m2 : edge.members) h.nodes.insert(m2);
      h.hyperedges.push_back(std::move(edge));
    }
    h.rebuild_incidence();
    seq.graphs.push_back(std::move(g));
    seq.hypergraphs.push_back(std::move(h));
  }
  return seq;
}

}  // namespace statetrails
