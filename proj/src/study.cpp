#include "sensq/study.hpp"

#include <cmath>
#include <unordered_set>

namespace sensq {

int MatchedStudy::num_units() const {
  int n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

bool MatchedStudy::all_pairs() const {
  for (const auto& s : sets) {
    if (s.size() != 2) return false;
  }
  return !sets.empty();
}

MatchedStudy validate_study(const MatchedStudy& raw) {
  std::unordered_set<std::string> seen;
  for (const auto& set : raw.sets) {
    if (!seen.insert(set.set_id).second) {
      throw ValidationError(ErrorCode::duplicate_set_id,
                            "duplicate set id: " + set.set_id, set.set_id);
    }
    if (set.size() < 2) {
      throw ValidationError(ErrorCode::set_too_small,
                            "set " + set.set_id + " has fewer than 2 units",
                            set.set_id);
    }
    if (set.treated_index < 0 || set.treated_index >= set.size()) {
      throw ValidationError(ErrorCode::zero_treated,
                            "set " + set.set_id + " has no treated unit",
                            set.set_id);
    }
    for (int j = 0; j < set.size(); ++j) {
      if (!std::isfinite(set.outcomes[j])) {
        throw ValidationError(ErrorCode::non_finite_outcome,
                              "set " + set.set_id + " unit " +
                                  std::to_string(j) + " has non-finite outcome",
                              set.set_id, j);
      }
    }
  }
  return raw;
}

MatchedStudy transform_for_null(const MatchedStudy& study, const EffectSpec& spec) {
  const int n_units = study.num_units();
  if (!spec.delta.empty() && static_cast<int>(spec.delta.size()) != n_units) {
    throw Error(ErrorCode::length_mismatch,
                "delta length does not match unit count");
  }
  MatchedStudy out = study;
  int offset = 0;
  for (auto& set : out.sets) {
    for (int j = 0; j < set.size(); ++j) {
      const double delta = spec.delta.empty() ? 0.0 : spec.delta[offset + j];
      const bool treated = (j == set.treated_index);
      double y = set.outcomes[j];
      if (spec.kind == EffectSpec::Kind::bounded_below) {
        y = -y + (treated ? delta : 0.0);
      } else {
        y = y - (treated ? delta : 0.0);
      }
      set.outcomes[j] = y;
    }
    offset += set.size();
  }
  return out;
}

}  // namespace sensq
