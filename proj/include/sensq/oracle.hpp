#pragma once

#include <utility>
#include <vector>

#include "sensq/bias.hpp"
#include "sensq/scores.hpp"
#include "sensq/set_asymptotic.hpp"
#include "sensq/study.hpp"

// Brute-force reference implementations, used only by the test suite as
// independent correctness anchors. Nothing here is performance-minded.
namespace sensq::oracle {

struct SensitivityModelSpec {
  std::vector<ExtendedBias> gamma;    // per set
  std::vector<std::vector<double>> u; // per set, per unit, in [0,1]
};

// Per-set treated-assignment probabilities under the sensitivity model:
// softmax of gamma_i * u_ij within each set.
std::vector<std::vector<double>> assignment_law(const MatchedStudy& study,
                                                const SensitivityModelSpec& spec);

// Exact P(T >= c) by enumerating every one-treated-per-set assignment.
double exact_tail_under_model(const ScoreMatrix& scores,
                              const SensitivityModelSpec& spec, double c);

// Worst-case (max-mean, then max-variance) moments of one set's
// contribution, searched over all binary u plus a dense grid.
std::pair<double, double> bruteforce_worst_moments(const SetScores& set,
                                                  ExtendedBias gamma,
                                                  int grid_points = 21);

struct BestSubset {
  std::vector<int> indices;
  double mu = 0.0;
  double sigma2 = 0.0;
};

// Lexicographic maximum of (mu, sigma2) over all size-k subsets held at
// gamma0, the rest collapsed to their maximum score.
BestSubset bruteforce_best_subset(const ScoreMatrix& scores,
                                  ExtendedBias gamma0, int k);

}  // namespace sensq::oracle
