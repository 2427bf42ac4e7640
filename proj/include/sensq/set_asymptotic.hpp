#pragma once

#include <vector>

#include "sensq/constraint.hpp"
#include "sensq/scores.hpp"

namespace sensq {

// Worst-case mean and variance of one set's contribution T_i at a given
// bias bound. argmax_a is the cut position achieving the mean (-1 when the
// bound is unbounded and the set collapses to a point mass at its maximum).
struct PerSetMoments {
  double mu = 0.0;
  double var = 0.0;
  int argmax_a = -1;
};

PerSetMoments per_set_worst_moments(const SetScores& set, ExtendedBias gamma);

// The k sets whose worst-case laws are hurt least by the bound gamma0,
// ranked ascending by mu_i(inf) - mu_i(gamma0); gap ties prefer larger
// variance, then lower set index. Returned ascending.
std::vector<int> select_sets_quantile(const ScoreMatrix& scores,
                                      ExtendedBias gamma0, int k);

struct WorstCaseGaussian {
  double mu = 0.0;
  double sigma2 = 0.0;
  std::vector<int> selected;  // sets held at gamma0; full set for vector bounds
};

WorstCaseGaussian worst_case_gaussian(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint);

// Standard normal CDF, accurate to ~1e-15 via erfc.
double normal_cdf(double x);

// One-sided Gaussian bounding p-value: 1 below the mean, upper tail above.
double asymptotic_pvalue(double t_obs, const WorstCaseGaussian& law);

struct ModifiedPvalueBounds {
  ExtendedBias gamma_max = ExtendedBias::unbounded();
  int k_min = 1;
};

// Conservative override: p = 1 outside the configured (gamma0, k) region.
double modified_pvalue(double p, ExtendedBias gamma0, int k,
                       const ModifiedPvalueBounds& bounds);

}  // namespace sensq
