#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sensq/constraint.hpp"
#include "sensq/scores.hpp"

namespace sensq {

// Worst-case bounding law for a pair study: independent two-point laws, one
// per pair, with mass p_hi on the larger score.
struct PairWorstCaseLaw {
  struct PairLaw {
    double lo = 0.0;
    double hi = 0.0;
    double p_hi = 0.5;  // Gamma/(1+Gamma); 1 for unbounded pairs
  };
  std::vector<PairLaw> pairs;
};

PairWorstCaseLaw worst_case_pair_law(const ScoreMatrix& scores,
                                     const std::vector<ExtendedBias>& gamma);

// Indices (ascending) of the k pairs with the smallest |q_i1 - q_i2|;
// ties broken by lower set index.
std::vector<int> select_pairs_quantile(const ScoreMatrix& scores, int k);

// Shared uniform draws, one row per pair, reused across all probed bias
// bounds during inversion so that Monte-Carlo p-values stay monotone.
struct McTable {
  std::int64_t samples = 0;
  std::vector<double> u;  // row-major, pairs x samples

  double at(int pair, std::int64_t m) const { return u[pair * samples + m]; }
};

McTable make_mc_table(int num_pairs, std::int64_t samples, std::uint64_t seed);

struct MonteCarloMethod {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  bool add_one = false;             // (1+count)/(M+1) instead of count/M
  const McTable* table = nullptr;   // optional shared draws
};

struct ExactDpMethod {
  double lattice_rel_tol = 1e-9;
  std::int64_t max_support = 1000000;
};

struct TailProbability {
  double p = 1.0;
  std::optional<double> mc_stderr;
};

TailProbability pair_tail_probability(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint,
                                      const MonteCarloMethod& method);

TailProbability pair_tail_probability(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint,
                                      const ExactDpMethod& method);

// Exact tail P(Tbar >= c) of the bounding law by convolving the two-point
// laws on a shared value lattice. Throws SupportTooLarge past the guard.
double exact_dp_tail(const PairWorstCaseLaw& law, double c,
                     const ExactDpMethod& method);

}  // namespace sensq
