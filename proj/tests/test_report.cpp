#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "statetrails/report.hpp"

using namespace statetrails;

namespace {

MatrixVerdicts hand_verdicts(bool with_kept_cell) {
  MatrixVerdicts m;
  m.conditioning = 0;
  m.kind = ExposureKind::kSingleInteraction;
  m.users_affected = 0.42;
  m.cells.assign(4, std::vector<CellVerdict>(4));
  for (auto& row : m.cells) {
    for (auto& cell : row) {
      cell.applicable = true;
      cell.keep_combined = false;
    }
  }
  if (with_kept_cell) {
    m.cells[2][1].x = 0.198;
    m.cells[2][1].keep_combined = true;
  }
  return m;
}

}  // namespace

TEST_CASE("a single kept cell renders one labeled edge") {
  const std::string golden =
      "digraph ctp_C1_single_interaction {\n"
      "  label=\"conditioning=C1 kind=single_interaction users_affected=42.0%\";\n"
      "  rankdir=LR;\n"
      "  C1;\n"
      "  C2;\n"
      "  C3;\n"
      "  C4;\n"
      "  C3 -> C2 [label=\"0.20\"];\n"
      "}\n";
  CHECK(export_markov_dot(hand_verdicts(true)) == golden);
}

TEST_CASE("no significant cells render four isolated nodes") {
  const std::string dot = export_markov_dot(hand_verdicts(false));
  CHECK(dot.find("->") == std::string::npos);
  CHECK(dot.find("C1;") != std::string::npos);
  CHECK(dot.find("C4;") != std::string::npos);
}

TEST_CASE("inapplicable cells never render edges") {
  MatrixVerdicts m = hand_verdicts(true);
  m.cells[2][1].applicable = false;
  CHECK(export_markov_dot(m).find("->") == std::string::npos);
}

TEST_CASE("write_report emits DOT files and the kept-transitions table") {
  ValidationResult result;
  result.options.run_cluster = true;
  result.options.run_temporal = true;
  result.ctp.push_back(hand_verdicts(true));
  result.tp = hand_verdicts(false);
  result.tp.is_metapopulation = true;
  result.tp.conditioning = -1;

  testutil::TempDir dir("report");
  write_report(result, dir.str());
  namespace fs = std::filesystem;
  CHECK(fs::exists(dir.str("ctp_C1_single_interaction.dot")));
  CHECK(fs::exists(dir.str("tp_metapopulation.dot")));
  const std::string kept = testutil::read_file(dir.str("kept_transitions.csv"));
  CHECK(kept.find("0,single_interaction,2,1,") != std::string::npos);
}
