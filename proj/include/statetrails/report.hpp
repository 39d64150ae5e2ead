#ifndef STATETRAILS_REPORT_HPP
#define STATETRAILS_REPORT_HPP

#include <string>

#include "statetrails/significance.hpp"

namespace statetrails {

// DOT rendering of one pruned Markov chain: a node per cluster, one directed
// edge per keep_combined cell labeled with its probability (2 decimals),
// users_affected in the graph label. Cluster l displays as "C<l+1>".
std::string export_markov_dot(const MatrixVerdicts& verdicts);

// Writes one DOT file per validated matrix plus kept_transitions.csv.
void write_report(const ValidationResult& result, const std::string& dir);

}  // namespace statetrails

#endif
