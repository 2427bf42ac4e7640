#include "sensq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sensq/error.hpp"

namespace sensq {

void SimDesign::validate() const {
  if (num_sets < 1 || set_size < 2) {
    throw Error(ErrorCode::invalid_config,
                "simulation requires I >= 1 and n >= 2");
  }
  if (!(effect.beta > 0.0 && effect.beta <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "effect beta must lie in (0, 1]");
  }
  if (reps < 1) {
    throw Error(ErrorCode::invalid_config, "simulation requires reps >= 1");
  }
}

GeneratedStudy generate_study(const SimDesign& design, int rep_index) {
  design.validate();
  Rng rng(design.seed, static_cast<std::uint64_t>(rep_index));
  const int num = design.num_sets;
  const int n = design.set_size;

  GeneratedStudy gen;
  gen.y0.assign(num, std::vector<double>(n));
  gen.y1.assign(num, std::vector<double>(n));
  gen.gamma.assign(num, 1.0);
  gen.u.assign(num, std::vector<double>(n));

  for (int i = 0; i < num; ++i) {
    auto& y0 = gen.y0[i];
    if (design.outcome == OutcomeModel::normal) {
      for (double& y : y0) y = rng.normal(0.0, design.outcome_sd);
    } else {
      for (double& y : y0) y = rng.uniform() < 0.5 ? 1.0 : 0.0;
      // force one 0 and one 1 at random positions so the confounder
      // rescaling below is well-defined
      const int a = rng.uniform_int(0, n - 1);
      int b = rng.uniform_int(0, n - 2);
      if (b >= a) ++b;
      y0[a] = 0.0;
      y0[b] = 1.0;
    }
  }

  switch (design.bias) {
    case BiasModel::constant:
      std::fill(gen.gamma.begin(), gen.gamma.end(), 5.0);
      break;
    case BiasModel::lognormal:
      for (double& g : gen.gamma) g = std::max(1.0, rng.lognormal(1.5, 0.2));
      break;
    case BiasModel::outlier: {
      std::fill(gen.gamma.begin(), gen.gamma.end(), 5.0);
      const int outliers = static_cast<int>(std::lround(0.05 * num));
      for (int j = 0; j < outliers; ++j) gen.gamma[j] = 500.0;
      break;
    }
  }

  const int affected = static_cast<int>(std::lround(design.effect.beta * num));
  const double shift =
      design.effect.c == 0.0 ? 0.0 : design.effect.c / design.effect.beta;
  for (int i = 0; i < num; ++i) {
    const auto& y0 = gen.y0[i];
    auto& y1 = gen.y1[i];
    for (int j = 0; j < n; ++j) y1[j] = y0[j] + (i < affected ? shift : 0.0);

    const auto [lo_it, hi_it] = std::minmax_element(y0.begin(), y0.end());
    const double span = *hi_it - *lo_it;
    for (int j = 0; j < n; ++j) {
      gen.u[i][j] = span > 0.0 ? (y0[j] - *lo_it) / span : 0.0;
    }
  }
  return gen;
}

namespace {

MatchedStudy assemble(const GeneratedStudy& gen, const std::vector<int>& z) {
  MatchedStudy study;
  const int num = static_cast<int>(gen.y0.size());
  study.sets.resize(num);
  for (int i = 0; i < num; ++i) {
    auto& set = study.sets[i];
    set.set_id = "s" + std::to_string(i);
    set.treated_index = z[i];
    const int n = static_cast<int>(gen.y0[i].size());
    set.outcomes.resize(n);
    for (int j = 0; j < n; ++j) {
      set.outcomes[j] = (j == z[i]) ? gen.y1[i][j] : gen.y0[i][j];
    }
  }
  return study;
}

int draw_categorical(const std::vector<double>& p, Rng& rng) {
  const double r = rng.uniform();
  double acc = 0.0;
  for (int j = 0; j < static_cast<int>(p.size()); ++j) {
    acc += p[j];
    if (r < acc) return j;
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

MatchedStudy sample_assignment(const GeneratedStudy& gen, Rng& rng) {
  const int num = static_cast<int>(gen.y0.size());
  std::vector<int> z(num);
  for (int i = 0; i < num; ++i) {
    const auto& u = gen.u[i];
    const int n = static_cast<int>(u.size());
    const double g = std::log(gen.gamma[i]);
    std::vector<double> p(n);
    double total = 0.0;
    const double u_max = *std::max_element(u.begin(), u.end());
    for (int j = 0; j < n; ++j) {
      p[j] = std::exp(g * (u[j] - u_max));
      total += p[j];
    }
    for (double& v : p) v /= total;
    z[i] = draw_categorical(p, rng);
  }
  return assemble(gen, z);
}

MatchedStudy sample_uniform_assignment(const GeneratedStudy& gen, Rng& rng) {
  const int num = static_cast<int>(gen.y0.size());
  std::vector<int> z(num);
  for (int i = 0; i < num; ++i) {
    z[i] = rng.uniform_int(0, static_cast<int>(gen.y0[i].size()) - 1);
  }
  return assemble(gen, z);
}

void ResultTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::parse_error, "cannot open output file " + path);
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << "\n";
  out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << row[c];
    }
    out << "\n";
  }
}

ResultTable run_experiment(const SimDesign& design, const Type1Mode& mode) {
  design.validate();
  ResultTable table;
  table.columns.push_back("rep");
  std::vector<int> ks;
  for (double frac : mode.quantile_fractions) {
    const int k = std::max(
        1, static_cast<int>(std::ceil(frac * design.num_sets - 1e-9)));
    ks.push_back(k);
    table.columns.push_back("p_k" + std::to_string(k));
  }

  EngineConfig engine;
  engine.kind = EngineKind::set_asymptotic;

  for (int rep = 0; rep < design.reps; ++rep) {
    const GeneratedStudy gen = generate_study(design, rep);
    Rng rng(design.seed, 0x5a5a0000ULL + static_cast<std::uint64_t>(rep));
    const MatchedStudy study = sample_assignment(gen, rng);
    const ScoreMatrix scores = compute_scores(study, design.statistic);

    std::vector<double> sorted_gamma = gen.gamma;
    std::sort(sorted_gamma.begin(), sorted_gamma.end());

    std::vector<double> row;
    row.push_back(rep);
    for (int k : ks) {
      const double gamma0 = sorted_gamma[k - 1];  // true k-th smallest bias
      row.push_back(sensitivity_pvalue(
          scores, QuantileBound{k, ExtendedBias(gamma0)}, engine));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

ConfidenceCurve favorable_curve(const SimDesign& design, int rep,
                                const StatisticSpec& stat, double alpha) {
  const GeneratedStudy gen = generate_study(design, rep);
  Rng rng(design.seed, 0x5a5a0000ULL + static_cast<std::uint64_t>(rep));
  const MatchedStudy study = sample_uniform_assignment(gen, rng);
  const ScoreMatrix scores = compute_scores(study, stat);

  EngineConfig engine;
  engine.kind = EngineKind::set_asymptotic;
  CurveOptions opts;
  opts.search.alpha = alpha;
  opts.search.seed = design.seed;
  return confidence_curve(scores, opts, engine);
}

// g-average over the informative part of the curve (limits above the
// noninformative 1).  The trimming summaries use this restriction; averaging
// noninformative entries as 1 is available via average_bias_limit.
double informative_bias_average(const ConfidenceCurve& curve,
                                BiasTransform transform) {
  ConfidenceCurve informative;
  for (const auto& entry : curve.entries) {
    if (entry.lower_limit > 1.0 + 1e-9) informative.entries.push_back(entry);
  }
  if (informative.entries.empty()) return 1.0;
  return average_bias_limit(informative, transform);
}

}  // namespace

ResultTable run_experiment(const SimDesign& design, const PowerMode& mode) {
  design.validate();
  std::vector<double> mean_limit(design.num_sets, 0.0);
  for (int rep = 0; rep < design.reps; ++rep) {
    const ConfidenceCurve curve =
        favorable_curve(design, rep, design.statistic, mode.alpha);
    for (const auto& entry : curve.entries) {
      mean_limit[entry.k - 1] += entry.lower_limit;
    }
  }
  ResultTable table;
  table.columns = {"k", "quantile_fraction", "mean_lower_limit"};
  for (int k = design.num_sets; k >= 1; --k) {
    table.rows.push_back({static_cast<double>(k),
                          static_cast<double>(k) / design.num_sets,
                          mean_limit[k - 1] / design.reps});
  }
  return table;
}

ResultTable run_experiment(const SimDesign& design, const TrimmingMode& mode) {
  design.validate();
  ResultTable table;
  table.columns = {"iota",         "mean_limit_top", "mean_limit_q86",
                   "avg_identity", "avg_log",        "avg_odds"};
  const int k86 = std::max(
      1, static_cast<int>(std::lround(0.86 * design.num_sets)));

  for (double iota : mode.iota_grid) {
    MStatConfig stat;
    stat.kappa = mode.kappa;
    stat.iota = iota;
    double top = 0.0, q86 = 0.0, gi = 0.0, gl = 0.0, go = 0.0;
    for (int rep = 0; rep < design.reps; ++rep) {
      const ConfidenceCurve curve =
          favorable_curve(design, rep, stat, mode.alpha);
      for (const auto& entry : curve.entries) {
        if (entry.k == design.num_sets) top += entry.lower_limit;
        if (entry.k == k86) q86 += entry.lower_limit;
      }
      gi += informative_bias_average(curve, BiasTransform::identity);
      gl += informative_bias_average(curve, BiasTransform::log_scale);
      go += informative_bias_average(curve, BiasTransform::odds);
    }
    const double r = design.reps;
    table.rows.push_back({iota, top / r, q86 / r, gi / r, gl / r, go / r});
  }
  return table;
}

}  // namespace sensq
