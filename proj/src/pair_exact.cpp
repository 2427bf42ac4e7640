#include "sensq/pair_exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sensq/error.hpp"
#include "sensq/rng.hpp"

namespace sensq {

namespace {

void require_pairs(const ScoreMatrix& scores) {
  if (!scores.all_pairs()) {
    throw Error(ErrorCode::not_pair_study,
                "operation requires a study of matched pairs (all n_i = 2)");
  }
}

std::vector<ExtendedBias> resolve_gamma(const ScoreMatrix& scores,
                                        const SensitivityConstraint& constraint) {
  if (const auto* vb = std::get_if<VectorBound>(&constraint)) {
    if (static_cast<int>(vb->gamma.size()) != scores.num_sets()) {
      throw Error(ErrorCode::length_mismatch,
                  "gamma vector length must equal the number of pairs");
    }
    return vb->gamma;
  }
  const auto& qb = std::get<QuantileBound>(constraint);
  const auto selected = select_pairs_quantile(scores, qb.k);
  std::vector<ExtendedBias> gamma(scores.num_sets(), ExtendedBias::unbounded());
  for (int i : selected) gamma[i] = qb.gamma0;
  return gamma;
}

// Lattice spacing used to merge floating-point near-ties before convolution.
double lattice_spacing(const PairWorstCaseLaw& law, double rel_tol) {
  double max_abs = 0.0;
  for (const auto& p : law.pairs) {
    max_abs = std::max({max_abs, std::abs(p.lo), std::abs(p.hi)});
  }
  return max_abs > 0.0 ? rel_tol * max_abs : 1.0;
}

std::int64_t lattice_key(double v, double delta) {
  return static_cast<std::int64_t>(std::llround(v / delta));
}

// Distribution of the sum of the independent two-point laws, keyed on the
// shared integer lattice.
std::map<std::int64_t, double> convolve(const PairWorstCaseLaw& law,
                                        double delta,
                                        std::int64_t max_support) {
  std::map<std::int64_t, double> dist;
  dist[0] = 1.0;
  for (const auto& pair : law.pairs) {
    const std::int64_t key_lo = lattice_key(pair.lo, delta);
    const std::int64_t key_hi = lattice_key(pair.hi, delta);
    if (key_lo == key_hi || pair.p_hi >= 1.0) {
      // point mass: shift every key
      std::map<std::int64_t, double> next;
      for (const auto& [key, prob] : dist) next[key + key_hi] = prob;
      dist = std::move(next);
      continue;
    }
    std::map<std::int64_t, double> next;
    for (const auto& [key, prob] : dist) {
      next[key + key_lo] += prob * (1.0 - pair.p_hi);
      next[key + key_hi] += prob * pair.p_hi;
    }
    if (static_cast<std::int64_t>(next.size()) > max_support) {
      throw Error(ErrorCode::support_too_large,
                  "exact convolution support exceeds the guard; "
                  "use the Monte-Carlo method");
    }
    dist = std::move(next);
  }
  return dist;
}

double tail_at_key(const std::map<std::int64_t, double>& dist,
                   std::int64_t key_c) {
  double tail = 0.0;
  for (auto it = dist.lower_bound(key_c); it != dist.end(); ++it) {
    tail += it->second;
  }
  return std::min(1.0, tail);
}

}  // namespace

PairWorstCaseLaw worst_case_pair_law(const ScoreMatrix& scores,
                                     const std::vector<ExtendedBias>& gamma) {
  require_pairs(scores);
  if (static_cast<int>(gamma.size()) != scores.num_sets()) {
    throw Error(ErrorCode::length_mismatch,
                "gamma vector length must equal the number of pairs");
  }
  PairWorstCaseLaw law;
  law.pairs.resize(scores.num_sets());
  for (int i = 0; i < scores.num_sets(); ++i) {
    const auto& q = scores.sets[i].q;
    auto& pair = law.pairs[i];
    pair.lo = std::min(q[0], q[1]);
    pair.hi = std::max(q[0], q[1]);
    pair.p_hi = gamma[i].is_unbounded()
                    ? 1.0
                    : gamma[i].value() / (1.0 + gamma[i].value());
  }
  return law;
}

std::vector<int> select_pairs_quantile(const ScoreMatrix& scores, int k) {
  require_pairs(scores);
  const int num = scores.num_sets();
  if (k < 1 || k > num) {
    throw Error(ErrorCode::k_out_of_range,
                "k must lie in [1, I] for quantile pair selection");
  }
  std::vector<int> order(num);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto gap = [&](int i) {
      return std::abs(scores.sets[i].q[0] - scores.sets[i].q[1]);
    };
    return gap(a) < gap(b);
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

McTable make_mc_table(int num_pairs, std::int64_t samples, std::uint64_t seed) {
  McTable table;
  table.samples = samples;
  table.u.resize(static_cast<std::size_t>(num_pairs) * samples);
  for (int i = 0; i < num_pairs; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    for (std::int64_t m = 0; m < samples; ++m) {
      table.u[i * samples + m] = rng.uniform();
    }
  }
  return table;
}

TailProbability pair_tail_probability(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint,
                                      const MonteCarloMethod& method) {
  require_pairs(scores);
  if (method.samples < 1) {
    throw Error(ErrorCode::invalid_config, "monte_carlo requires M >= 1");
  }
  const auto law = worst_case_pair_law(scores, resolve_gamma(scores, constraint));
  const int num = scores.num_sets();

  const McTable* table = method.table;
  McTable local;
  if (table == nullptr) {
    local = make_mc_table(num, method.samples, method.seed);
    table = &local;
  } else if (static_cast<std::int64_t>(table->u.size()) !=
             static_cast<std::int64_t>(num) * table->samples) {
    throw Error(ErrorCode::length_mismatch,
                "shared uniform table does not match the number of pairs");
  }

  const std::int64_t samples = table->samples;
  std::int64_t count = 0;
  for (std::int64_t m = 0; m < samples; ++m) {
    double t = 0.0;
    for (int i = 0; i < num; ++i) {
      const auto& pair = law.pairs[i];
      t += (table->at(i, m) < pair.p_hi) ? pair.hi : pair.lo;
    }
    if (t >= scores.t_obs) ++count;
  }

  TailProbability out;
  if (method.add_one) {
    out.p = static_cast<double>(1 + count) / static_cast<double>(samples + 1);
  } else {
    out.p = static_cast<double>(count) / static_cast<double>(samples);
  }
  out.mc_stderr = std::sqrt(out.p * (1.0 - out.p) /
                            static_cast<double>(samples));
  return out;
}

TailProbability pair_tail_probability(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint,
                                      const ExactDpMethod& method) {
  require_pairs(scores);
  const auto law = worst_case_pair_law(scores, resolve_gamma(scores, constraint));
  const double delta = lattice_spacing(law, method.lattice_rel_tol);
  const auto dist = convolve(law, delta, method.max_support);

  // Sum the treated-unit keys so that the threshold sits exactly on the
  // lattice used for the convolution.
  std::int64_t key_t = 0;
  for (const auto& set : scores.sets) {
    key_t += lattice_key(set.q[set.treated_index], delta);
  }

  TailProbability out;
  out.p = tail_at_key(dist, key_t);
  return out;
}

double exact_dp_tail(const PairWorstCaseLaw& law, double c,
                     const ExactDpMethod& method) {
  const double delta = lattice_spacing(law, method.lattice_rel_tol);
  const auto dist = convolve(law, delta, method.max_support);
  return tail_at_key(dist, lattice_key(c, delta));
}

}  // namespace sensq
