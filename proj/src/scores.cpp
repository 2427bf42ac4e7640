#include "sensq/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sensq/rng.hpp"

namespace sensq {

void MStatConfig::validate() const {
  if (!uncapped && !(kappa > 0.0)) {
    throw Error(ErrorCode::invalid_config, "mstat kappa must be > 0");
  }
  if (!(iota >= 0.0)) {
    throw Error(ErrorCode::invalid_config, "mstat iota must be >= 0");
  }
  if (!uncapped && !(iota < kappa)) {
    throw Error(ErrorCode::invalid_config, "mstat iota must be < kappa");
  }
  if (scale_override && !(*scale_override > 0.0)) {
    throw Error(ErrorCode::invalid_config, "mstat scale override must be > 0");
  }
}

double psi_eval(double y, const MStatConfig& cfg) {
  const double sign = (y > 0.0) ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
  const double a = std::abs(y);
  if (cfg.uncapped) {
    // kappa -> inf limit: linear beyond the inner trim
    return sign * std::max(0.0, a - cfg.iota);
  }
  const double frac = (a - cfg.iota) / (cfg.kappa - cfg.iota);
  return sign * cfg.kappa * std::min(1.0, std::max(0.0, frac));
}

void SetScores::build_cache() {
  const int n = size();
  sorted_q = q;
  std::stable_sort(sorted_q.begin(), sorted_q.end());
  cum_q.resize(n);
  cum_q2.resize(n);
  double a = 0.0, b = 0.0;
  for (int j = 0; j < n; ++j) {
    a += sorted_q[j];
    b += sorted_q[j] * sorted_q[j];
    cum_q[j] = a;
    cum_q2[j] = b;
  }
}

bool ScoreMatrix::all_pairs() const {
  for (const auto& s : sets) {
    if (s.size() != 2) return false;
  }
  return !sets.empty();
}

namespace {

// Lower median: element at index floor((m-1)/2) of the sorted values.
double lower_median(std::vector<double> v) {
  const auto mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

double mstat_scale(const MatchedStudy& study, const MStatConfig& cfg) {
  if (cfg.scale_override) return *cfg.scale_override;
  std::vector<double> diffs;
  bool any_nonzero = false;
  for (const auto& set : study.sets) {
    for (int j = 0; j < set.size(); ++j) {
      for (int l = j + 1; l < set.size(); ++l) {
        const double d = std::abs(set.outcomes[j] - set.outcomes[l]);
        diffs.push_back(d);
        if (d > 0.0) any_nonzero = true;
      }
    }
  }
  if (!any_nonzero) {
    throw Error(ErrorCode::degenerate_scale,
                "all within-set pairwise differences are zero; "
                "provide a scale override");
  }
  double s = lower_median(diffs);
  if (s == 0.0) {
    // heavy ties pushed the median to zero; fall back to the nonzero diffs
    std::vector<double> nonzero;
    for (double d : diffs) {
      if (d > 0.0) nonzero.push_back(d);
    }
    s = lower_median(std::move(nonzero));
  }
  return s;
}

}  // namespace

ScoreMatrix compute_scores(const MatchedStudy& study, const StatisticSpec& stat) {
  ScoreMatrix out;
  out.sets.reserve(study.sets.size());

  if (const auto* dm = std::get_if<DiffMeansConfig>(&stat)) {
    if (!dm->weights.empty() &&
        static_cast<int>(dm->weights.size()) != study.num_sets()) {
      throw Error(ErrorCode::length_mismatch,
                  "diff_means weights length must equal the number of sets");
    }
    for (int i = 0; i < study.num_sets(); ++i) {
      const auto& set = study.sets[i];
      const double w = dm->weights.empty() ? 1.0 : dm->weights[i];
      const int n = set.size();
      const double total = std::accumulate(set.outcomes.begin(),
                                           set.outcomes.end(), 0.0);
      SetScores ss;
      ss.set_id = set.set_id;
      ss.treated_index = set.treated_index;
      ss.q.resize(n);
      for (int j = 0; j < n; ++j) {
        ss.q[j] = w * (n * set.outcomes[j] - total) / (n - 1);
      }
      ss.build_cache();
      out.sets.push_back(std::move(ss));
    }
  } else {
    const auto& cfg = std::get<MStatConfig>(stat);
    cfg.validate();
    const double s = mstat_scale(study, cfg);
    for (const auto& set : study.sets) {
      const int n = set.size();
      SetScores ss;
      ss.set_id = set.set_id;
      ss.treated_index = set.treated_index;
      ss.q.resize(n);
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += psi_eval((set.outcomes[j] - set.outcomes[l]) / s, cfg);
        }
        ss.q[j] = acc / n;
      }
      ss.build_cache();
      out.sets.push_back(std::move(ss));
    }
  }

  double t = 0.0;
  for (const auto& ss : out.sets) t += ss.q[ss.treated_index];
  out.t_obs = t;
  return out;
}

double statistic_value(const ScoreMatrix& scores, const std::vector<int>& treated) {
  if (static_cast<int>(treated.size()) != scores.num_sets()) {
    throw Error(ErrorCode::index_out_of_range,
                "assignment length must equal the number of sets");
  }
  double t = 0.0;
  for (int i = 0; i < scores.num_sets(); ++i) {
    const auto& set = scores.sets[i];
    if (treated[i] < 0 || treated[i] >= set.size()) {
      throw Error(ErrorCode::index_out_of_range,
                  "treated index out of range in set " + set.set_id);
    }
    t += set.q[treated[i]];
  }
  return t;
}

double diff_means_statistic(const MatchedStudy& study,
                            const std::vector<int>& treated,
                            const std::vector<double>& weights) {
  double t = 0.0;
  for (int i = 0; i < study.num_sets(); ++i) {
    const auto& set = study.sets[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    const int n = set.size();
    double control_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != treated[i]) control_sum += set.outcomes[j];
    }
    t += w * (set.outcomes[treated[i]] - control_sum / (n - 1));
  }
  return t;
}

namespace {

MatchedStudy random_small_study(Rng& rng) {
  MatchedStudy study;
  const int num_sets = rng.uniform_int(1, 5);
  for (int i = 0; i < num_sets; ++i) {
    MatchedSet set;
    set.set_id = "s" + std::to_string(i);
    const int n = rng.uniform_int(2, 4);
    set.outcomes.resize(n);
    for (auto& y : set.outcomes) y = rng.uniform(-3.0, 3.0);
    set.treated_index = rng.uniform_int(0, n - 1);
    study.sets.push_back(std::move(set));
  }
  return study;
}

std::vector<int> random_assignment(const MatchedStudy& study, Rng& rng) {
  std::vector<int> z(study.num_sets());
  for (int i = 0; i < study.num_sets(); ++i) {
    z[i] = rng.uniform_int(0, study.sets[i].size() - 1);
  }
  return z;
}

MatchedStudy with_assignment(MatchedStudy study, const std::vector<int>& z) {
  for (int i = 0; i < study.num_sets(); ++i) study.sets[i].treated_index = z[i];
  return study;
}

MatchedStudy shifted(const MatchedStudy& study, const std::vector<int>& z,
                     const std::vector<double>& eta,
                     const std::vector<double>& xi) {
  MatchedStudy out = study;
  int offset = 0;
  for (int i = 0; i < out.num_sets(); ++i) {
    auto& set = out.sets[i];
    for (int j = 0; j < set.size(); ++j) {
      if (j == z[i]) {
        set.outcomes[j] += eta[offset + j];
      } else if (!xi.empty()) {
        set.outcomes[j] += xi[offset + j];
      }
    }
    offset += set.size();
  }
  return out;
}

std::string describe_witness(const MatchedStudy& study,
                             const std::vector<int>& z, double before,
                             double after, const char* relation) {
  std::ostringstream os;
  os << "I=" << study.num_sets() << " z=(";
  for (int i = 0; i < study.num_sets(); ++i) os << (i ? "," : "") << z[i];
  os << ") " << before << " " << relation << " " << after;
  return os.str();
}

}  // namespace

PropertyReport check_statistic_property(const StatisticFn& stat,
                                        StatisticProperty property, int trials,
                                        std::uint64_t seed) {
  PropertyReport report;
  constexpr double kTol = 1e-9;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed, static_cast<std::uint64_t>(trial));
    MatchedStudy study = random_small_study(rng);
    const int n_units = study.num_units();
    std::vector<int> z = random_assignment(study, rng);
    std::vector<double> eta(n_units), xi(n_units);
    for (auto& e : eta) e = rng.uniform(0.0, 2.0);
    for (auto& x : xi) x = -rng.uniform(0.0, 2.0);
    report.trials_run = trial + 1;

    if (property == StatisticProperty::effect_increasing) {
      const MatchedStudy base = with_assignment(study, z);
      const double before = stat(base, z);
      const double after = stat(shifted(base, z, eta, xi), z);
      if (after < before - kTol) {
        report.violation_found = true;
        report.witness = describe_witness(base, z, before, after, "->");
        return report;
      }
    } else {
      std::vector<int> a = random_assignment(study, rng);
      const MatchedStudy base = with_assignment(study, z);
      const MatchedStudy bumped = shifted(base, a, eta, {});
      const double lhs = stat(bumped, z) - stat(base, z);
      const double rhs = stat(bumped, a) - stat(base, a);
      if (lhs > rhs + kTol) {
        report.violation_found = true;
        report.witness = describe_witness(base, z, lhs, rhs, ">");
        return report;
      }
    }
  }
  return report;
}

}  // namespace sensq
