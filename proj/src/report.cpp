#include "statetrails/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace statetrails {

namespace {

std::string cluster_name(std::size_t label) {
  return "C" + std::to_string(label + 1);
}

std::string graph_id(const MatrixVerdicts& m) {
  if (m.is_metapopulation) return "tp_metapopulation";
  return "ctp_" + cluster_name(static_cast<std::size_t>(m.conditioning)) + "_" +
         exposure_kind_name(m.kind);
}

}  // namespace

std::string export_markov_dot(const MatrixVerdicts& m) {
  std::ostringstream out;
  out << "digraph " << graph_id(m) << " {\n";
  char pct[32];
  std::snprintf(pct, sizeof(pct), "%.1f", m.users_affected * 100.0);
  if (m.is_metapopulation) {
    out << "  label=\"metapopulation\";\n";
  } else {
    out << "  label=\"conditioning="
        << cluster_name(static_cast<std::size_t>(m.conditioning))
        << " kind=" << exposure_kind_name(m.kind) << " users_affected=" << pct
        << "%\";\n";
  }
  out << "  rankdir=LR;\n";
  const std::size_t k = m.cells.size();
  for (std::size_t i = 0; i < k; ++i) {
    out << "  " << cluster_name(i) << ";\n";
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const CellVerdict& c = m.cells[i][j];
      if (!c.applicable || !c.keep_combined) continue;
      char prob[32];
      std::snprintf(prob, sizeof(prob), "%.2f", c.x);
      out << "  " << cluster_name(i) << " -> " << cluster_name(j)
          << " [label=\"" << prob << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

void write_report(const ValidationResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump = [&](const MatrixVerdicts& m) {
    std::ofstream out(fs::path(dir) / (graph_id(m) + ".dot"));
    if (!out) throw std::runtime_error("cannot write dot file in " + dir);
    out << export_markov_dot(m);
  };
  for (const auto& m : result.ctp) dump(m);
  if (result.options.run_cluster && !result.tp.cells.empty()) dump(result.tp);

  std::ofstream kept(fs::path(dir) / "kept_transitions.csv");
  if (!kept) throw std::runtime_error("cannot write kept transitions in " + dir);
  kept << "conditioning,kind,from,to,prob,users_affected\n";
  char buf[32];
  auto rows = [&](const MatrixVerdicts& m) {
    const std::string kind_name =
        m.is_metapopulation ? "metapopulation" : exposure_kind_name(m.kind);
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
      for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
        const CellVerdict& c = m.cells[i][j];
        if (!c.applicable || !c.keep_combined) continue;
        std::snprintf(buf, sizeof(buf), "%.17g", c.x);
        kept << m.conditioning << ',' << kind_name << ',' << i << ',' << j
             << ',' << buf << ',' << m.users_affected << '\n';
      }
    }
  };
  for (const auto& m : result.ctp) rows(m);
  if (result.options.run_cluster && !result.tp.cells.empty()) rows(result.tp);
}

}  // namespace statetrails
