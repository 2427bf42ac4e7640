#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sensq/inference.hpp"
#include "sensq/rng.hpp"
#include "sensq/scores.hpp"
#include "sensq/study.hpp"

namespace sensq {

enum class OutcomeModel { normal, binary };
enum class BiasModel { constant, lognormal, outlier };

// Effect c/beta on the first beta*I sets, zero elsewhere; the average
// effect stays at c regardless of beta.
struct EffectModel {
  double c = 0.0;
  double beta = 1.0;
};

struct SimDesign {
  int num_sets = 200;
  int set_size = 2;
  OutcomeModel outcome = OutcomeModel::normal;
  double outcome_sd = 1.0;
  BiasModel bias = BiasModel::constant;
  EffectModel effect;
  StatisticSpec statistic = DiffMeansConfig{};
  int reps = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

// One simulated finite population: potential outcomes plus the hidden
// biases and confounder values that drive the assignment law.
struct GeneratedStudy {
  std::vector<std::vector<double>> y0;  // control potential outcomes
  std::vector<std::vector<double>> y1;  // treated potential outcomes
  std::vector<double> gamma;            // true per-set hidden biases
  std::vector<std::vector<double>> u;   // confounder values in [0,1]
};

GeneratedStudy generate_study(const SimDesign& design, int rep_index);

// Draws one treated unit per set from the sensitivity model and reveals
// the corresponding observed outcomes.
MatchedStudy sample_assignment(const GeneratedStudy& gen, Rng& rng);

// Same draw under uniform (unconfounded) assignment.
MatchedStudy sample_uniform_assignment(const GeneratedStudy& gen, Rng& rng);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(const std::string& path) const;
};

// Null-holds calibration: per rep, the asymptotic p-value at the true bound
// for each requested quantile fraction. One row per rep.
struct Type1Mode {
  std::vector<double> quantile_fractions = {1.0, 0.95, 0.9};
};

// Favorable-situation power: mean lower confidence limit per quantile k.
struct PowerMode {
  double alpha = 0.05;
};

// Inner-trimming sweep of the m-statistic: per trimming value, mean limits
// at the top and the 86% quantile plus the g-averaged summaries.
struct TrimmingMode {
  double alpha = 0.05;
  double kappa = 3.0;
  std::vector<double> iota_grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
};

ResultTable run_experiment(const SimDesign& design, const Type1Mode& mode);
ResultTable run_experiment(const SimDesign& design, const PowerMode& mode);
ResultTable run_experiment(const SimDesign& design, const TrimmingMode& mode);

}  // namespace sensq
