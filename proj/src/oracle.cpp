#include "sensq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "sensq/error.hpp"

namespace sensq::oracle {

namespace {

std::vector<double> set_probabilities(ExtendedBias gamma,
                                      const std::vector<double>& u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> p(n);
  if (gamma.is_unbounded()) {
    // limit law: all mass on the arg-max of u, split evenly over ties
    const double u_max = *std::max_element(u.begin(), u.end());
    int ties = 0;
    for (double v : u) {
      if (v == u_max) ++ties;
    }
    for (int j = 0; j < n; ++j) p[j] = (u[j] == u_max) ? 1.0 / ties : 0.0;
    return p;
  }
  const double g = gamma.log_value();
  const double u_max = *std::max_element(u.begin(), u.end());
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    p[j] = std::exp(g * (u[j] - u_max));
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

std::vector<std::vector<double>> assignment_law(const MatchedStudy& study,
                                                const SensitivityModelSpec& spec) {
  if (spec.gamma.size() != study.sets.size() ||
      spec.u.size() != study.sets.size()) {
    throw Error(ErrorCode::length_mismatch,
                "model spec must cover every matched set");
  }
  std::vector<std::vector<double>> law;
  law.reserve(study.sets.size());
  for (std::size_t i = 0; i < study.sets.size(); ++i) {
    if (spec.u[i].size() != study.sets[i].outcomes.size()) {
      throw Error(ErrorCode::length_mismatch,
                  "u row length must match set size in set " +
                      study.sets[i].set_id);
    }
    law.push_back(set_probabilities(spec.gamma[i], spec.u[i]));
  }
  return law;
}

double exact_tail_under_model(const ScoreMatrix& scores,
                              const SensitivityModelSpec& spec, double c) {
  const int num = scores.num_sets();
  if (static_cast<int>(spec.gamma.size()) != num ||
      static_cast<int>(spec.u.size()) != num) {
    throw Error(ErrorCode::length_mismatch,
                "model spec must cover every matched set");
  }
  double combos = 1.0;
  for (const auto& set : scores.sets) combos *= set.size();
  if (combos > 1e6) {
    throw Error(ErrorCode::enumeration_too_large,
                "joint assignment space exceeds 10^6 points");
  }

  std::vector<std::vector<double>> probs(num);
  for (int i = 0; i < num; ++i) {
    probs[i] = set_probabilities(spec.gamma[i], spec.u[i]);
  }

  // odometer over one treated unit per set
  std::vector<int> z(num, 0);
  double tail = 0.0;
  while (true) {
    double t = 0.0, pr = 1.0;
    for (int i = 0; i < num; ++i) {
      t += scores.sets[i].q[z[i]];
      pr *= probs[i][z[i]];
    }
    if (t >= c) tail += pr;
    int pos = num - 1;
    while (pos >= 0) {
      if (++z[pos] < scores.sets[pos].size()) break;
      z[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return tail;
}

std::pair<double, double> bruteforce_worst_moments(const SetScores& set,
                                                  ExtendedBias gamma,
                                                  int grid_points) {
  const int n = set.size();
  if (n > 5) {
    throw Error(ErrorCode::set_too_large,
                "brute-force moment search supports n_i <= 5");
  }
  if (gamma.is_unbounded()) {
    return {set.sorted_q.back(), 0.0};
  }
  const double g = gamma.log_value();

  std::vector<double> grid(grid_points);
  for (int v = 0; v < grid_points; ++v) {
    grid[v] = static_cast<double>(v) / (grid_points - 1);
  }
  std::vector<double> weight(grid_points);
  for (int v = 0; v < grid_points; ++v) weight[v] = std::exp(g * grid[v]);

  double best_mu = -std::numeric_limits<double>::infinity();
  double best_var = 0.0;

  // Depth-first over the grid assignments of u, carrying partial softmax
  // sums so each leaf costs O(1).
  const auto visit = [&](double sw, double swq, double swq2) {
    const double mu = swq / sw;
    const double var = std::max(0.0, swq2 / sw - mu * mu);
    const double tie = 1e-12 * std::max(1.0, std::abs(best_mu));
    if (mu > best_mu + tie) {
      best_mu = mu;
      best_var = var;
    } else if (mu >= best_mu - tie) {
      best_mu = std::max(best_mu, mu);
      best_var = std::max(best_var, var);
    }
  };
  const auto recurse = [&](const auto& self, int j, double sw, double swq,
                           double swq2) -> void {
    if (j == n) {
      visit(sw, swq, swq2);
      return;
    }
    const double q = set.q[j];
    for (int v = 0; v < grid_points; ++v) {
      const double w = weight[v];
      self(self, j + 1, sw + w, swq + w * q, swq2 + w * q * q);
    }
  };
  recurse(recurse, 0, 0.0, 0.0, 0.0);
  return {best_mu, best_var};
}

BestSubset bruteforce_best_subset(const ScoreMatrix& scores,
                                  ExtendedBias gamma0, int k) {
  const int num = scores.num_sets();
  if (num > 12) {
    throw Error(ErrorCode::too_many_subsets,
                "exhaustive subset search supports I <= 12");
  }
  if (k < 1 || k > num) {
    throw Error(ErrorCode::k_out_of_range, "k must lie in [1, I]");
  }

  std::vector<PerSetMoments> at_gamma(num);
  std::vector<double> at_inf(num);
  for (int i = 0; i < num; ++i) {
    at_gamma[i] = per_set_worst_moments(scores.sets[i], gamma0);
    at_inf[i] = scores.sets[i].sorted_q.back();
  }

  BestSubset best;
  bool have_best = false;
  constexpr double kTol = 1e-12;

  // lexicographic combinations of k indices
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    double mu = 0.0, s2 = 0.0;
    std::vector<char> in_pick(num, 0);
    for (int i : pick) in_pick[i] = 1;
    for (int i = 0; i < num; ++i) {
      if (in_pick[i]) {
        mu += at_gamma[i].mu;
        s2 += at_gamma[i].var;
      } else {
        mu += at_inf[i];
      }
    }
    if (!have_best || mu > best.mu + kTol ||
        (mu >= best.mu - kTol && s2 > best.sigma2 + kTol)) {
      best.indices = pick;
      best.mu = mu;
      best.sigma2 = s2;
      have_best = true;
    }
    // advance to the next combination
    int pos = k - 1;
    while (pos >= 0 && pick[pos] == num - k + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int j = pos + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace sensq::oracle
