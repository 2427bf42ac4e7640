#pragma once

#include <string>
#include <vector>

#include "sensq/error.hpp"

namespace sensq {

// One matched set: n_i >= 2 units, exactly one treated.
struct MatchedSet {
  std::string set_id;
  std::vector<double> outcomes;
  int treated_index = 0;

  int size() const { return static_cast<int>(outcomes.size()); }
};

// A matched observational study. Immutable once validated; set order and
// within-set unit order are preserved from input.
struct MatchedStudy {
  std::vector<MatchedSet> sets;

  int num_sets() const { return static_cast<int>(sets.size()); }
  int num_units() const;
  bool all_pairs() const;
};

// Null-hypothesis specification: hypothesized per-unit effects (sharp null)
// or per-unit effect bounds (one-sided bounded nulls).
struct EffectSpec {
  enum class Kind { sharp, bounded_above, bounded_below };
  Kind kind = Kind::sharp;
  std::vector<double> delta;  // length N; empty means all-zero

  static EffectSpec sharp_zero() { return {}; }
};

// Checks the study invariants and returns the validated study.
// Throws ValidationError naming the offending set on failure.
MatchedStudy validate_study(const MatchedStudy& raw);

// Reduces testing `spec` on `study` to the zero-effect analysis of the
// returned study: Y~ = Y - Z o delta for sharp / bounded-above nulls,
// Y~ = -Y + Z o delta for bounded-below.
MatchedStudy transform_for_null(const MatchedStudy& study, const EffectSpec& spec);

}  // namespace sensq
