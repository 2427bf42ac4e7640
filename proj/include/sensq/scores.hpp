#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sensq/study.hpp"

namespace sensq {

// Configuration of the robust m-statistic score: truncation at kappa,
// inner trimming at iota, optional override for the pairwise-difference
// scale. kappa <= 0 is not allowed; use uncapped() for no truncation.
struct MStatConfig {
  double kappa = 2.5;
  double iota = 0.0;
  bool uncapped = false;
  std::optional<double> scale_override;

  static MStatConfig uncapped_config(double iota = 0.0) {
    MStatConfig c;
    c.uncapped = true;
    c.iota = iota;
    return c;
  }

  void validate() const;
};

struct DiffMeansConfig {
  std::vector<double> weights;  // per set; empty means all-one
};

using StatisticSpec = std::variant<DiffMeansConfig, MStatConfig>;

// Scores for one matched set, with the sorted copy and cumulative sums used
// by the worst-case moment computations.
struct SetScores {
  std::string set_id;
  std::vector<double> q;  // input unit order
  int treated_index = 0;
  std::vector<double> sorted_q;  // ascending, stable
  std::vector<double> cum_q;     // cum_q[j] = sum of sorted_q[0..j]
  std::vector<double> cum_q2;    // same for squares

  int size() const { return static_cast<int>(q.size()); }
  double range() const { return sorted_q.back() - sorted_q.front(); }
  void build_cache();
};

struct ScoreMatrix {
  std::vector<SetScores> sets;
  double t_obs = 0.0;

  int num_sets() const { return static_cast<int>(sets.size()); }
  bool all_pairs() const;
};

// The truncated/trimmed odd score function.
double psi_eval(double y, const MStatConfig& cfg);

// Per-unit scores q_ij of the additive statistic for the chosen test
// statistic, evaluated on a null-imputed (already transformed) study.
ScoreMatrix compute_scores(const MatchedStudy& study, const StatisticSpec& stat);

// Sum of the treated-unit scores for an arbitrary one-treated assignment.
double statistic_value(const ScoreMatrix& scores, const std::vector<int>& treated);

// Direct evaluation of the weighted difference-in-means statistic, used as an
// independent route when testing the score representation.
double diff_means_statistic(const MatchedStudy& study,
                            const std::vector<int>& treated,
                            const std::vector<double>& weights = {});

// Generic statistic evaluator over (assignment, outcome vector) pairs.
using StatisticFn = std::function<double(const MatchedStudy& study,
                                         const std::vector<int>& treated)>;

enum class StatisticProperty { effect_increasing, differential_increasing };

struct PropertyReport {
  bool violation_found = false;
  int trials_run = 0;
  std::string witness;  // human-readable description of the counterexample
};

// Randomized search for violations of the effect-increasing /
// differential-increasing properties on small studies.
PropertyReport check_statistic_property(const StatisticFn& stat,
                                        StatisticProperty property, int trials,
                                        std::uint64_t seed);

}  // namespace sensq
