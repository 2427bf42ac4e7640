#include "sensq/set_asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sensq/error.hpp"

namespace sensq {

PerSetMoments per_set_worst_moments(const SetScores& set, ExtendedBias gamma) {
  PerSetMoments out;
  if (gamma.is_unbounded()) {
    out.mu = set.sorted_q.back();
    out.var = 0.0;
    out.argmax_a = -1;
    return out;
  }
  const double g = gamma.value();
  const int n = set.size();
  const double q_total = set.cum_q[n - 1];
  const double q2_total = set.cum_q2[n - 1];

  // Scan the cut position a: units at ranks <= a get u = 0, the rest u = 1.
  double best_mu = -std::numeric_limits<double>::infinity();
  double best_var = 0.0;
  int best_a = 1;
  std::vector<double> mus(n), vars(n);
  for (int a = 1; a <= n - 1; ++a) {
    const double denom = a + g * (n - a);
    const double mu = (set.cum_q[a - 1] + g * (q_total - set.cum_q[a - 1])) / denom;
    const double m2 = (set.cum_q2[a - 1] + g * (q2_total - set.cum_q2[a - 1])) / denom;
    mus[a - 1] = mu;
    vars[a - 1] = std::max(0.0, m2 - mu * mu);
    if (mu > best_mu) best_mu = mu;
  }
  // Among mean-maximizers (within a floating-point tie window), report the
  // largest variance.
  const double tie = 1e-12 * std::max(1.0, std::abs(best_mu));
  bool first = true;
  for (int a = 1; a <= n - 1; ++a) {
    if (mus[a - 1] >= best_mu - tie) {
      if (first || vars[a - 1] > best_var) {
        best_var = vars[a - 1];
        best_a = a;
        first = false;
      }
    }
  }
  out.mu = best_mu;
  out.var = best_var;
  out.argmax_a = best_a;
  return out;
}

std::vector<int> select_sets_quantile(const ScoreMatrix& scores,
                                      ExtendedBias gamma0, int k) {
  const int num = scores.num_sets();
  if (k < 1 || k > num) {
    throw Error(ErrorCode::k_out_of_range,
                "k must lie in [1, I] for quantile set selection");
  }
  std::vector<double> gap(num), var(num);
  for (int i = 0; i < num; ++i) {
    const auto m = per_set_worst_moments(scores.sets[i], gamma0);
    gap[i] = scores.sets[i].sorted_q.back() - m.mu;
    var[i] = m.var;
  }
  std::vector<int> order(num);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (gap[a] != gap[b]) return gap[a] < gap[b];
    return var[a] > var[b];  // gap ties: larger variance first
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

WorstCaseGaussian worst_case_gaussian(const ScoreMatrix& scores,
                                      const SensitivityConstraint& constraint) {
  WorstCaseGaussian out;
  if (const auto* vb = std::get_if<VectorBound>(&constraint)) {
    if (static_cast<int>(vb->gamma.size()) != scores.num_sets()) {
      throw Error(ErrorCode::length_mismatch,
                  "gamma vector length must equal the number of sets");
    }
    out.selected.resize(scores.num_sets());
    std::iota(out.selected.begin(), out.selected.end(), 0);
    for (int i = 0; i < scores.num_sets(); ++i) {
      const auto m = per_set_worst_moments(scores.sets[i], vb->gamma[i]);
      out.mu += m.mu;
      out.sigma2 += m.var;
    }
    return out;
  }

  const auto& qb = std::get<QuantileBound>(constraint);
  out.selected = select_sets_quantile(scores, qb.gamma0, qb.k);
  std::vector<char> in_sel(scores.num_sets(), 0);
  for (int i : out.selected) in_sel[i] = 1;
  for (int i = 0; i < scores.num_sets(); ++i) {
    if (in_sel[i]) {
      const auto m = per_set_worst_moments(scores.sets[i], qb.gamma0);
      out.mu += m.mu;
      out.sigma2 += m.var;
    } else {
      out.mu += scores.sets[i].sorted_q.back();
    }
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double asymptotic_pvalue(double t_obs, const WorstCaseGaussian& law) {
  if (law.sigma2 <= 0.0) {
    return t_obs <= law.mu ? 1.0 : 0.0;
  }
  if (t_obs < law.mu) return 1.0;
  return 1.0 - normal_cdf((t_obs - law.mu) / std::sqrt(law.sigma2));
}

namespace {

bool bias_exceeds(ExtendedBias a, ExtendedBias b) {
  if (b.is_unbounded()) return false;
  if (a.is_unbounded()) return true;
  return a.value() > b.value();
}

}  // namespace

double modified_pvalue(double p, ExtendedBias gamma0, int k,
                       const ModifiedPvalueBounds& bounds) {
  if (bias_exceeds(gamma0, bounds.gamma_max) || k < bounds.k_min) return 1.0;
  return p;
}

}  // namespace sensq
