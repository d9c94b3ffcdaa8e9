#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ergostat/measure.hpp"

namespace ergo {

// Measure file format (one measure per file):
//
//   ergostat-measure v1
//   space <circle|interval01|square01|torus2>
//   repr <atoms|histogram>
//   count N              (atoms)   |   resolution R + nonzero N (histogram)
//   <records>            atoms: "x w" / "x y w"; histogram: "bin w"
//
// Lines starting with '#' are comments (pipeline outputs stamp the manifest
// hash there). Weights are written with 17 significant digits, so
// read-write round trips are exact at the decimal-string level.
class MeasureParseError : public std::runtime_error {
 public:
  MeasureParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

void write_measure(std::ostream& os, const ProbMeasure& mu);
ProbMeasure read_measure(std::istream& is);

void write_measure_file(const std::string& path, const ProbMeasure& mu);
ProbMeasure read_measure_file(const std::string& path);

// Shortest-exact formatting used across all text outputs.
std::string format_double(double v);

}  // namespace ergo
