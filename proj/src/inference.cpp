#include "sensq/inference.hpp"

#include <algorithm>
#include <cmath>

#include "sensq/error.hpp"

namespace sensq {

double sensitivity_pvalue(const ScoreMatrix& scores,
                          const SensitivityConstraint& constraint,
                          const EngineConfig& engine) {
  const auto* qb = std::get_if<QuantileBound>(&constraint);
  if (qb != nullptr && qb->gamma0.is_unbounded()) {
    return 1.0;  // vacuous constraint
  }

  double p = 1.0;
  switch (engine.kind) {
    case EngineKind::pair_exact_dp:
      if (!scores.all_pairs()) {
        throw Error(ErrorCode::engine_mismatch,
                    "exact pair engine requires all n_i = 2");
      }
      p = pair_tail_probability(scores, constraint, engine.dp).p;
      break;
    case EngineKind::pair_monte_carlo:
      if (!scores.all_pairs()) {
        throw Error(ErrorCode::engine_mismatch,
                    "Monte-Carlo pair engine requires all n_i = 2");
      }
      p = pair_tail_probability(scores, constraint, engine.mc).p;
      break;
    case EngineKind::set_asymptotic:
      if (scores.num_sets() < 2) {
        throw Error(ErrorCode::engine_mismatch,
                    "asymptotic engine requires at least 2 matched sets");
      }
      p = asymptotic_pvalue(scores.t_obs, worst_case_gaussian(scores, constraint));
      break;
  }
  if (qb != nullptr) {
    p = modified_pvalue(p, qb->gamma0, qb->k, engine.modified);
  }
  return p;
}

const char* to_string(SearchStatus status) {
  switch (status) {
    case SearchStatus::converged: return "converged";
    case SearchStatus::bracket_capped: return "bracket_capped";
    case SearchStatus::noninformative: return "noninformative";
  }
  return "unknown";
}

namespace {

// Binds the shared uniform table into the Monte-Carlo engine so every probe
// of the search reuses the same draws.
EngineConfig with_table(EngineConfig engine, const McTable* table,
                        std::uint64_t seed) {
  if (engine.kind == EngineKind::pair_monte_carlo && table != nullptr) {
    engine.mc.table = table;
    engine.mc.seed = seed;
  }
  return engine;
}

CurveEntry search_limit(const ScoreMatrix& scores, int k,
                        const SearchOptions& opts, const EngineConfig& engine) {
  const auto pval = [&](double gamma0) {
    return sensitivity_pvalue(scores,
                              QuantileBound{k, ExtendedBias(gamma0)}, engine);
  };

  CurveEntry entry;
  entry.k = k;

  const double p1 = pval(1.0);
  if (p1 > opts.alpha) {
    entry.lower_limit = 1.0;
    entry.achieved_p = p1;
    entry.status = SearchStatus::noninformative;
    return entry;
  }

  // Bracket [lo, hi] with p(lo) <= alpha < p(hi), doubling up to the cap.
  double lo = 1.0;
  double lo_p = p1;
  double hi = opts.initial_hi ? std::min(*opts.initial_hi, opts.bracket_cap)
                              : 2.0;
  bool bracketed = false;
  while (true) {
    const double p_hi = pval(hi);
    if (p_hi > opts.alpha) {
      bracketed = true;
      break;
    }
    lo = hi;
    lo_p = p_hi;
    if (hi >= opts.bracket_cap) break;
    hi = std::min(hi * 2.0, opts.bracket_cap);
  }
  if (!bracketed) {
    entry.lower_limit = lo;
    entry.achieved_p = lo_p;
    entry.status = SearchStatus::bracket_capped;
    return entry;
  }

  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    const double p_mid = pval(mid);
    if (p_mid <= opts.alpha) {
      lo = mid;
      lo_p = p_mid;
    } else {
      hi = mid;
    }
  }

  entry.lower_limit = lo;  // conservative endpoint: p(lo) <= alpha holds
  entry.achieved_p = lo_p;
  entry.status = SearchStatus::converged;
  return entry;
}

}  // namespace

CurveEntry lower_confidence_limit(const ScoreMatrix& scores, int k,
                                  const SearchOptions& opts,
                                  const EngineConfig& engine) {
  McTable table;
  const McTable* table_ptr = nullptr;
  if (engine.kind == EngineKind::pair_monte_carlo &&
      engine.mc.table == nullptr) {
    table = make_mc_table(scores.num_sets(), engine.mc.samples, opts.seed);
    table_ptr = &table;
  }
  return search_limit(scores, k, opts, with_table(engine, table_ptr, opts.seed));
}

ConfidenceCurve confidence_curve(const ScoreMatrix& scores,
                                 const CurveOptions& opts,
                                 const EngineConfig& engine) {
  ConfidenceCurve curve;
  curve.alpha = opts.search.alpha;
  curve.tol = opts.search.tol;
  curve.seed = opts.search.seed;
  curve.engine = engine.kind;

  McTable table;
  const McTable* table_ptr = nullptr;
  if (engine.kind == EngineKind::pair_monte_carlo &&
      engine.mc.table == nullptr) {
    table = make_mc_table(scores.num_sets(), engine.mc.samples,
                          opts.search.seed);
    table_ptr = &table;
  }
  const EngineConfig bound = with_table(engine, table_ptr, opts.search.seed);

  if (!opts.k_grid.empty()) {
    std::vector<int> grid = opts.k_grid;
    std::sort(grid.begin(), grid.end(), std::greater<int>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (int k : grid) {
      curve.entries.push_back(search_limit(scores, k, opts.search, bound));
    }
    return curve;
  }

  // Full curve, k = I down to 1, each search bracketed by the previous
  // limit's upper endpoint: the p-value can only grow as k drops.
  SearchOptions search = opts.search;
  for (int k = scores.num_sets(); k >= 1; --k) {
    const CurveEntry entry = search_limit(scores, k, search, bound);
    if (entry.status == SearchStatus::converged) {
      search.initial_hi = entry.lower_limit + search.tol * 2.0;
    } else if (entry.status == SearchStatus::noninformative) {
      search.initial_hi = 2.0;
    }
    curve.entries.push_back(entry);
  }
  return curve;
}

int count_exceeding_limit(const ConfidenceCurve& curve, double gamma0) {
  int count = 0;
  for (const auto& entry : curve.entries) {
    if (entry.lower_limit > gamma0) ++count;
  }
  return count;
}

double average_bias_limit(const ConfidenceCurve& curve, BiasTransform g) {
  double acc = 0.0;
  for (const auto& entry : curve.entries) {
    const double x = entry.lower_limit;
    switch (g) {
      case BiasTransform::identity: acc += x; break;
      case BiasTransform::log_scale: acc += std::log(x); break;
      case BiasTransform::odds: acc += x / (1.0 + x); break;
    }
  }
  const double mean = acc / static_cast<double>(curve.entries.size());
  switch (g) {
    case BiasTransform::identity: return mean;
    case BiasTransform::log_scale: return std::exp(mean);
    case BiasTransform::odds: return mean / (1.0 - mean);
  }
  return mean;
}

}  // namespace sensq
