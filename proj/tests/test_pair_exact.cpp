#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sensq/oracle.hpp"
#include "sensq/pair_exact.hpp"
#include "sensq/rng.hpp"

using namespace sensq;

namespace {

MatchedStudy pair_study(std::vector<std::pair<double, double>> outcomes,
                        std::vector<int> treated) {
  MatchedStudy study;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    MatchedSet set;
    set.set_id = "s" + std::to_string(i);
    set.outcomes = {outcomes[i].first, outcomes[i].second};
    set.treated_index = treated[i];
    study.sets.push_back(std::move(set));
  }
  return study;
}

// I pairs with outcomes (1, 0), treated unit observed at the maximum.
ScoreMatrix sign_study(int num_pairs) {
  std::vector<std::pair<double, double>> outcomes(num_pairs, {1.0, 0.0});
  std::vector<int> treated(num_pairs, 0);
  return compute_scores(pair_study(outcomes, treated), DiffMeansConfig{});
}

ScoreMatrix random_pair_scores(Rng& rng, int max_pairs = 6) {
  const int num = rng.uniform_int(1, max_pairs);
  std::vector<std::pair<double, double>> outcomes;
  std::vector<int> treated;
  for (int i = 0; i < num; ++i) {
    outcomes.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    treated.push_back(rng.uniform_int(0, 1));
  }
  return compute_scores(pair_study(outcomes, treated), DiffMeansConfig{});
}

}  // namespace

TEST_CASE("worst_case_pair_law basics") {
  auto scores = compute_scores(pair_study({{1.0, 0.0}}, {0}), DiffMeansConfig{});
  // scores are (1, -1)

  SUBCASE("bounded gamma") {
    auto law = worst_case_pair_law(scores, {ExtendedBias(3.0)});
    CHECK(law.pairs[0].lo == doctest::Approx(-1.0));
    CHECK(law.pairs[0].hi == doctest::Approx(1.0));
    CHECK(law.pairs[0].p_hi == doctest::Approx(0.75));
  }
  SUBCASE("gamma of one gives the randomization law") {
    auto law = worst_case_pair_law(scores, {ExtendedBias(1.0)});
    CHECK(law.pairs[0].p_hi == doctest::Approx(0.5));
  }
  SUBCASE("unbounded gamma gives a point mass at the maximum") {
    auto law = worst_case_pair_law(scores, {ExtendedBias::unbounded()});
    CHECK(law.pairs[0].p_hi == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    auto triple = compute_scores(
        MatchedStudy{{MatchedSet{"t", {1.0, 0.0, 0.0}, 0}}}, DiffMeansConfig{});
    CHECK_THROWS_AS(worst_case_pair_law(triple, {ExtendedBias(2.0)}), Error);
    CHECK_THROWS_AS(worst_case_pair_law(scores, {}), Error);
  }
}

TEST_CASE("select_pairs_quantile") {
  auto scores = compute_scores(
      pair_study({{0.25, 0.0}, {1.0, 0.0}, {0.5, 0.0}}, {0, 0, 0}),
      DiffMeansConfig{});
  // |q_i1 - q_i2| = (0.5, 2.0, 1.0)
  CHECK(select_pairs_quantile(scores, 2) == std::vector<int>{0, 2});
  CHECK(select_pairs_quantile(scores, 3) == std::vector<int>{0, 1, 2});

  auto tied = compute_scores(
      pair_study({{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}, {0, 0, 0}),
      DiffMeansConfig{});
  CHECK(select_pairs_quantile(tied, 1) == std::vector<int>{0});

  CHECK_THROWS_AS(select_pairs_quantile(scores, 0), Error);
  CHECK_THROWS_AS(select_pairs_quantile(scores, 4), Error);
}

TEST_CASE("binomial closed form: 5-pair sign study") {
  auto scores = sign_study(5);

  SUBCASE("k = 5, gamma0 = 1 gives (1/2)^5 exactly") {
    auto tail = pair_tail_probability(
        scores, QuantileBound{5, ExtendedBias(1.0)}, ExactDpMethod{});
    CHECK(tail.p == doctest::Approx(0.03125).epsilon(1e-14));
  }
  SUBCASE("k = 3 leaves Binomial(3, 1/2)") {
    auto tail = pair_tail_probability(
        scores, QuantileBound{3, ExtendedBias(1.0)}, ExactDpMethod{});
    CHECK(tail.p == doctest::Approx(0.125).epsilon(1e-14));
  }
  SUBCASE("general gamma0 matches (G/(1+G))^5") {
    const double g = 1.7;
    auto tail = pair_tail_probability(
        scores, QuantileBound{5, ExtendedBias(g)}, ExactDpMethod{});
    CHECK(tail.p == doctest::Approx(std::pow(g / (1 + g), 5)).epsilon(1e-12));
  }
  SUBCASE("monte carlo agrees within 3 standard errors") {
    MonteCarloMethod mc;
    mc.samples = 100000;
    mc.seed = 5;
    auto tail = pair_tail_probability(
        scores, QuantileBound{5, ExtendedBias(1.0)}, mc);
    REQUIRE(tail.mc_stderr.has_value());
    CHECK(std::abs(tail.p - 0.03125) <= 3.0 * *tail.mc_stderr + 1e-12);
  }
  SUBCASE("add-one variant") {
    MonteCarloMethod mc;
    mc.samples = 10;
    mc.seed = 1;
    mc.add_one = true;
    auto tail = pair_tail_probability(
        scores, QuantileBound{5, ExtendedBias(1.0)}, mc);
    CHECK(tail.p >= 1.0 / 11.0 - 1e-15);
  }
}

TEST_CASE("t_obs below the support minimum gives p = 1") {
  // treated at the minimum in every pair
  auto scores = compute_scores(pair_study({{1.0, 0.0}, {2.0, 0.0}}, {1, 1}),
                               DiffMeansConfig{});
  auto tail = pair_tail_probability(
      scores, QuantileBound{2, ExtendedBias(2.0)}, ExactDpMethod{});
  CHECK(tail.p == doctest::Approx(1.0));
}

TEST_CASE("gamma0 = 1, k = I reduces to the randomization test") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto scores = random_pair_scores(rng);
    const int num = scores.num_sets();
    auto tail = pair_tail_probability(
        scores, QuantileBound{num, ExtendedBias(1.0)}, ExactDpMethod{});

    oracle::SensitivityModelSpec spec;
    spec.gamma.assign(num, ExtendedBias(1.0));
    spec.u.assign(num, {0.0, 0.0});
    const double exact =
        oracle::exact_tail_under_model(scores, spec, scores.t_obs);
    CHECK(tail.p == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("stochastic dominance of the worst-case law") {
  // Random pair studies, random u, random Gamma* entrywise below Gamma:
  // the model tail never exceeds the worst-case tail at any threshold.
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto scores = random_pair_scores(rng);
    const int num = scores.num_sets();

    oracle::SensitivityModelSpec spec;
    std::vector<ExtendedBias> gamma;
    for (int i = 0; i < num; ++i) {
      const double g_star = rng.uniform(1.0, 4.0);
      spec.gamma.push_back(ExtendedBias(g_star));
      spec.u.push_back({rng.uniform(), rng.uniform()});
      gamma.push_back(ExtendedBias(g_star + rng.uniform(0.0, 2.0)));
    }

    auto law = worst_case_pair_law(scores, gamma);
    // thresholds: all sums of per-pair support points, nudged just below so
    // neither side is sensitive to which side of the point the cut falls on
    // (the dp path merges values on a 1e-9-relative lattice)
    std::vector<double> thresholds = {0.0};
    double scale = 0.0;
    for (const auto& p : law.pairs) {
      std::vector<double> next;
      for (double t : thresholds) {
        next.push_back(t + p.lo);
        next.push_back(t + p.hi);
      }
      thresholds = std::move(next);
      scale = std::max({scale, std::abs(p.lo), std::abs(p.hi)});
    }
    const double margin = 40.0 * num * 1e-9 * std::max(scale, 1e-300);
    for (double c : thresholds) {
      const double model_tail =
          oracle::exact_tail_under_model(scores, spec, c - margin);
      const double worst_tail =
          exact_dp_tail(law, c - margin, ExactDpMethod{});
      CHECK(model_tail <= worst_tail + 1e-12);
    }
  }
}

TEST_CASE("quantile selection is optimal among size-k subsets") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    auto scores = random_pair_scores(rng, 5);
    const int num = scores.num_sets();
    const int k = rng.uniform_int(1, num);
    const double gamma0 = rng.uniform(1.0, 5.0);

    auto selected_tail = pair_tail_probability(
        scores, QuantileBound{k, ExtendedBias(gamma0)}, ExactDpMethod{});

    // every other subset of size k gives a smaller-or-equal tail
    for (int mask = 0; mask < (1 << num); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      std::vector<ExtendedBias> gamma(num, ExtendedBias::unbounded());
      for (int i = 0; i < num; ++i) {
        if (mask & (1 << i)) gamma[i] = ExtendedBias(gamma0);
      }
      auto tail = pair_tail_probability(scores, VectorBound{gamma},
                                        ExactDpMethod{});
      CHECK(tail.p <= selected_tail.p + 1e-12);
    }
  }
}

TEST_CASE("monotonicity in gamma0 and k") {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    auto scores = random_pair_scores(rng);
    const int num = scores.num_sets();

    double prev = -1.0;
    for (int step = 0; step < 20; ++step) {
      const double gamma0 = 1.0 + 0.25 * step;
      auto tail = pair_tail_probability(
          scores, QuantileBound{num, ExtendedBias(gamma0)}, ExactDpMethod{});
      CHECK(tail.p >= prev - 1e-12);
      prev = tail.p;
    }

    prev = 2.0;
    for (int k = 1; k <= num; ++k) {
      auto tail = pair_tail_probability(
          scores, QuantileBound{k, ExtendedBias(2.0)}, ExactDpMethod{});
      CHECK(tail.p <= prev + 1e-12);
      prev = tail.p;
    }
  }
}

TEST_CASE("monte carlo with common random numbers is monotone in gamma0") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    auto scores = random_pair_scores(rng);
    auto table = make_mc_table(scores.num_sets(), 20000, 99 + trial);
    MonteCarloMethod mc;
    mc.table = &table;
    double prev = -1.0;
    for (int step = 0; step < 20; ++step) {
      const double gamma0 = 1.0 + 0.5 * step;
      auto tail = pair_tail_probability(
          scores, QuantileBound{scores.num_sets(), ExtendedBias(gamma0)}, mc);
      CHECK(tail.p >= prev - 1e-15);
      prev = tail.p;
    }
  }
}

TEST_CASE("support guard") {
  Rng rng(71);
  std::vector<std::pair<double, double>> outcomes;
  std::vector<int> treated;
  for (int i = 0; i < 40; ++i) {
    outcomes.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    treated.push_back(0);
  }
  auto scores = compute_scores(pair_study(outcomes, treated), DiffMeansConfig{});
  ExactDpMethod method;
  method.max_support = 1000;
  CHECK_THROWS_AS(
      pair_tail_probability(scores, QuantileBound{40, ExtendedBias(2.0)},
                            method),
      Error);
}
