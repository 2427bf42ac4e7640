#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sensq/pair_exact.hpp"
#include "sensq/set_asymptotic.hpp"

namespace sensq {

enum class EngineKind { pair_exact_dp, pair_monte_carlo, set_asymptotic };

struct EngineConfig {
  EngineKind kind = EngineKind::set_asymptotic;
  MonteCarloMethod mc;            // pair_monte_carlo only
  ExactDpMethod dp;               // pair_exact_dp only
  ModifiedPvalueBounds modified;  // inert by default
};

// Worst-case p-value for one constraint, routed through the selected engine.
double sensitivity_pvalue(const ScoreMatrix& scores,
                          const SensitivityConstraint& constraint,
                          const EngineConfig& engine);

enum class SearchStatus { converged, bracket_capped, noninformative };

const char* to_string(SearchStatus status);

struct CurveEntry {
  int k = 0;
  double lower_limit = 1.0;  // the sensitivity value for the k-th quantile
  double achieved_p = 1.0;   // p-value at the reported limit
  SearchStatus status = SearchStatus::converged;
};

struct SearchOptions {
  double alpha = 0.05;
  double tol = 1e-4;
  double bracket_cap = 1e6;
  std::optional<double> initial_hi;  // nested-bracket hint
  std::uint64_t seed = 0;
};

// Largest searched bias bound whose worst-case p-value stays <= alpha for
// the k-th quantile; the reported endpoint always satisfies p <= alpha.
CurveEntry lower_confidence_limit(const ScoreMatrix& scores, int k,
                                  const SearchOptions& opts,
                                  const EngineConfig& engine);

struct ConfidenceCurve {
  double alpha = 0.05;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  EngineKind engine = EngineKind::set_asymptotic;
  std::vector<CurveEntry> entries;  // descending k
};

struct CurveOptions {
  SearchOptions search;
  std::vector<int> k_grid;  // empty: all k = I..1 with nested brackets
};

ConfidenceCurve confidence_curve(const ScoreMatrix& scores,
                                 const CurveOptions& opts,
                                 const EngineConfig& engine);

// Lower confidence limit for the number of sets with bias exceeding gamma0.
int count_exceeding_limit(const ConfidenceCurve& curve, double gamma0);

enum class BiasTransform { identity, log_scale, odds };

// g^{-1}(mean of g(limits)) across the full curve.
double average_bias_limit(const ConfidenceCurve& curve, BiasTransform g);

}  // namespace sensq
