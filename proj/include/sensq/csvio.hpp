#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sensq/inference.hpp"
#include "sensq/study.hpp"

namespace sensq {

// Parsed study input. Rows are grouped by set_id in order of first
// appearance; the optional delta column carries hypothesized effects.
struct StudyInput {
  MatchedStudy study;
  std::vector<double> delta;  // empty when the column is absent
  bool has_delta = false;
};

// Reads the `set_id,treated,outcome[,delta]` schema. Throws Error
// (parse_error) with a line number, or ValidationError for studies with
// zero or multiple treated units in a set.
StudyInput read_study_csv(std::istream& in);
StudyInput read_study_csv_file(const std::string& path);

void write_curve_csv(const ConfidenceCurve& curve, int num_sets,
                     std::ostream& out);
void write_curve_json(const ConfidenceCurve& curve, int num_sets,
                      std::ostream& out);

// Round-trip reader for curve.json output.
ConfidenceCurve read_curve_json(std::istream& in);

}  // namespace sensq
