#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gbo/acquisition.hpp"
#include "gbo/bo.hpp"
#include "gbo/generators.hpp"

using namespace gbo;

namespace {

struct Problem {
  CandidateSet set;
  FeatureGroups groups;
  std::unique_ptr<GraphKernelBank> bank;
  std::vector<double> values;
  BoProblem problem;
};

// 32 small synthetic graphs; the objective is a smooth function of the features.
std::unique_ptr<Problem> make_problem(std::uint64_t seed = 3) {
  auto p = std::make_unique<Problem>();
  SynthSpec spec;
  spec.count_per_family = 16;
  spec.node_counts = {8, 12, 16, 20};
  spec.seed = seed;
  p->set = synth_dataset(spec);
  p->groups = build_feature_groups(p->set, {{"F", {"node_count", "avg_clustering"}}}, seed);
  GraphKernelOptions opt;
  opt.samples = 100;
  opt.seed = seed;
  p->bank = std::make_unique<GraphKernelBank>(p->set, opt);
  for (std::size_t i = 0; i < p->set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double a = p->groups[0].values(r, 0), b = p->groups[0].values(r, 1);
    p->values.push_back(-std::pow(a - 0.6, 2) - 0.5 * std::pow(b - 0.3, 2));
  }
  p->problem.ids = p->set.ids;
  p->problem.bank = p->bank.get();
  p->problem.groups = &p->groups;
  p->problem.objective = [v = p->values](std::size_t i) { return v.at(i); };
  p->problem.encoding = power_set_encoding(p->set.size());
  return p;
}

BoConfig quick_config(std::size_t budget, std::uint64_t seed = 0) {
  BoConfig c;
  c.budget = budget;
  c.n_init = 5;
  c.refit_every = 5;
  c.seed = seed;
  c.fit.grid = {{2, 2}, {10, 5}};
  c.fit.restarts = 2;
  return c;
}

std::vector<std::size_t> visited(const RunRecord& r) {
  std::vector<std::size_t> out;
  for (const auto& it : r.iterations) out.push_back(it.candidate);
  return out;
}

void expect_well_formed(const RunRecord& r, std::size_t budget) {
  EXPECT_FALSE(r.aborted) << r.error;
  EXPECT_LE(r.iterations.size(), budget);
  const auto v = visited(r);
  EXPECT_EQ(std::set<std::size_t>(v.begin(), v.end()).size(), v.size()) << "repeated candidate";
  for (std::size_t t = 0; t < r.iterations.size(); ++t) {
    EXPECT_EQ(r.iterations[t].iteration, t + 1);
    if (t > 0) {
      EXPECT_GE(r.iterations[t].best_so_far, r.iterations[t - 1].best_so_far);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= t; ++s) best = std::max(best, r.iterations[s].y);
    EXPECT_EQ(r.iterations[t].best_so_far, best);
  }
}

}  // namespace

TEST(ExpectedImprovement, ZeroVarianceIsPlainImprovement) {
  EXPECT_EQ(expected_improvement(1.0, 0.0, 0.0), 1.0);
  EXPECT_EQ(expected_improvement(-1.0, 0.0, 0.0), 0.0);
}

TEST(ExpectedImprovement, UnitVarianceAtIncumbentIsDensityAtZero) {
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 0.398942, 1e-6);
}

TEST(ExpectedImprovement, MatchesMonteCarloOracle) {
  Rng rng(11);
  std::normal_distribution<double> normal;
  const std::vector<std::array<double, 3>> cases{{0.3, 0.5, 0.0}, {-1.0, 2.0, 0.5}, {2.0, 0.1, 1.0}};
  for (const auto& [mu, var, y_max] : cases) {
    const int draws = 1'000'000;
    const double s = std::sqrt(var);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double gain = std::max(0.0, mu + s * normal(rng) - y_max);
      sum += gain;
      sq += gain * gain;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sq / draws - mean * mean) / draws);
    EXPECT_NEAR(expected_improvement(mu, var, y_max), mean, 4.0 * se + 1e-12);
  }
}

TEST(ExpectedImprovement, NonNegativeAndIncreasingInMean) {
  double prev = 0.0;
  for (double mu = -5.0; mu <= 5.0; mu += 0.25) {
    const double ei = expected_improvement(mu, 0.7, 0.0);
    EXPECT_GE(ei, 0.0);
    EXPECT_GE(ei, prev);
    prev = ei;
  }
}

TEST(SelectNext, MatchesBruteForceWithTies) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    std::vector<double> scores(n);
    std::vector<char> evaluated(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(uniform_index(rng, 3));  // frequent ties
      evaluated[i] = uniform01(rng) < 0.3;
    }
    std::optional<std::size_t> expected;
    for (std::size_t i = 0; i < n; ++i)
      if (!evaluated[i] && (!expected || scores[i] > scores[*expected])) expected = i;
    if (!expected) {
      EXPECT_THROW(select_next(scores, evaluated), ParameterError);
    } else {
      EXPECT_EQ(select_next(scores, evaluated), *expected);
    }
  }
}

TEST(SelectNext, FirstOfEqualScoresWins) {
  const std::vector<double> scores{0.0, 0.0, 0.0};
  EXPECT_EQ(select_next(scores, {0, 0, 0}), 0u);
  EXPECT_EQ(select_next(scores, {1, 0, 0}), 1u);
}

TEST(Strategy, NamesRoundTrip) {
  for (auto s : {Strategy::gbo, Strategy::random, Strategy::bo_f, Strategy::bo_g, Strategy::ga, Strategy::sa})
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_THROW(parse_strategy("bogus"), ParameterError);
}

TEST(InitialDesign, SeededPrefixOfAPermutation) {
  const auto a = initial_design(50, 10, 7), b = initial_design(50, 20, 7);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_EQ(std::set<std::size_t>(b.begin(), b.end()).size(), 20u);
  EXPECT_NE(initial_design(50, 10, 8), a);
}

TEST(RunGbo, ExhaustiveBudgetVisitsEveryCandidateAndFindsOptimum) {
  const auto p = make_problem();
  auto cfg = quick_config(p->set.size());
  cfg.optimum = *std::max_element(p->values.begin(), p->values.end());
  const auto r = run_gbo(p->problem, cfg);
  expect_well_formed(r, cfg.budget);
  EXPECT_EQ(r.iterations.size(), p->set.size());
  ASSERT_TRUE(r.evaluations_to_optimum.has_value());
  EXPECT_EQ(r.best(), *cfg.optimum);
}

TEST(RunGbo, BudgetEqualToInitialDesignDoesNotFit) {
  const auto p = make_problem();
  auto cfg = quick_config(5);
  const auto r = run_gbo(p->problem, cfg);
  expect_well_formed(r, 5);
  EXPECT_TRUE(r.fits.empty());
  EXPECT_EQ(visited(r), initial_design(p->set.size(), 5, cfg.seed));
}

TEST(RunGbo, StartsFromTheSharedInitialDesign) {
  const auto p = make_problem();
  const auto cfg = quick_config(12, 4);
  const auto g = run_gbo(p->problem, cfg), r = run_random(p->problem, cfg);
  const auto design = initial_design(p->set.size(), cfg.n_init, cfg.seed);
  EXPECT_TRUE(std::equal(design.begin(), design.end(), visited(g).begin()));
  EXPECT_TRUE(std::equal(design.begin(), design.end(), visited(r).begin()));
}

TEST(RunGbo, RefitScheduleAndTheta) {
  const auto p = make_problem();
  auto cfg = quick_config(16);
  cfg.final_fit = true;
  const auto r = run_gbo(p->problem, cfg);
  expect_well_formed(r, 16);
  ASSERT_EQ(r.fits.size(), 4u);  // at 5, 10 and 15 observations, then the final fit on 16
  EXPECT_EQ(r.fits[0].iteration, 5u);
  EXPECT_EQ(r.fits[1].iteration, 10u);
  EXPECT_EQ(r.fits[2].iteration, 15u);
  EXPECT_EQ(r.fits[3].iteration, 16u);
  for (std::size_t t = 0; t < 5; ++t) EXPECT_FALSE(r.iterations[t].theta.has_value());
  for (std::size_t t = 5; t < 16; ++t) ASSERT_TRUE(r.iterations[t].theta.has_value());
  EXPECT_TRUE(std::isfinite(r.gamma()));
}

TEST(RunGbo, DeterministicUnderSeed) {
  const auto p = make_problem();
  const auto cfg = quick_config(12, 9);
  EXPECT_EQ(visited(run_gbo(p->problem, cfg)), visited(run_gbo(p->problem, cfg)));
}

TEST(RunGbo, FeatureOnlyBaselineEqualsPinnedGraphWeight) {
  const auto p = make_problem();
  const auto cfg = quick_config(12, 2);
  const auto bo_f = run_baseline(Strategy::bo_f, p->problem, cfg);
  const auto pinned = run_gbo(p->problem, cfg, true, false);
  expect_well_formed(bo_f, 12);
  EXPECT_EQ(bo_f.strategy, Strategy::bo_f);
  EXPECT_EQ(visited(bo_f), visited(pinned));
  for (const auto& f : bo_f.fits) EXPECT_EQ(f.params.alpha, 0.0);
  EXPECT_TRUE(std::isinf(bo_f.gamma()));
}

TEST(RunGbo, GraphOnlyBaselinePinsFeatureWeights) {
  const auto p = make_problem();
  const auto r = run_baseline(Strategy::bo_g, p->problem, quick_config(12, 2));
  expect_well_formed(r, 12);
  for (const auto& f : r.fits) EXPECT_EQ(f.params.betas[0], 0.0);
  EXPECT_EQ(r.gamma(), 0.0);
}

TEST(RunGbo, InfeasibleCandidatesCountButStayOutOfTheModel) {
  auto p = make_problem();
  p->problem.objective = [v = p->values](std::size_t i) {
    return i % 3 == 0 ? -std::numeric_limits<double>::infinity() : v.at(i);
  };
  const auto r = run_gbo(p->problem, quick_config(20, 1));
  EXPECT_FALSE(r.aborted) << r.error;
  EXPECT_EQ(r.iterations.size(), 20u);
  EXPECT_TRUE(std::isfinite(r.best()));
}

TEST(RunGbo, ObjectiveFailureAbortsTheRun) {
  auto p = make_problem();
  p->problem.objective = [](std::size_t i) -> double {
    if (i % 2) throw DomainError("boom");
    return 0.0;
  };
  const auto r = run_gbo(p->problem, quick_config(10));
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.error.find("boom"), std::string::npos);
}

TEST(RunGbo, RejectsBadArguments) {
  const auto p = make_problem();
  EXPECT_THROW(run_gbo(p->problem, quick_config(p->set.size() + 1)), ParameterError);
  auto cfg = quick_config(10);
  cfg.n_init = 11;
  EXPECT_THROW(run_gbo(p->problem, cfg), ParameterError);
  auto no_groups = p->problem;
  no_groups.groups = nullptr;
  EXPECT_THROW(run_gbo(no_groups, quick_config(10)), ParameterError);
}

TEST(RunRandom, ReproducibleUnderSeed) {
  const auto p = make_problem();
  const auto cfg = quick_config(20, 5);
  const auto a = run_random(p->problem, cfg);
  expect_well_formed(a, 20);
  EXPECT_EQ(visited(a), visited(run_random(p->problem, cfg)));
  EXPECT_EQ(visited(a), initial_design(p->set.size(), 20, 5));
}

TEST(RunGa, RespectsBudgetWithDistinctEvaluations) {
  const auto p = make_problem();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto cfg = quick_config(20, seed);
    cfg.ga.population = 10;
    const auto r = run_ga(p->problem, cfg);
    expect_well_formed(r, 20);
    EXPECT_EQ(r.iterations.size(), 20u);
    EXPECT_EQ(visited(r), visited(run_ga(p->problem, cfg)));
  }
}

TEST(RunSa, RespectsBudgetWithDistinctEvaluations) {
  const auto p = make_problem();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto cfg = quick_config(20, seed);
    const auto r = run_sa(p->problem, cfg);
    expect_well_formed(r, 20);
    EXPECT_EQ(r.iterations.size(), 20u);
  }
}

TEST(RunSa, ScheduleAcceptsCalibratedMoveAtStartProbability) {
  const double delta = sa_calibration_delta({1.0, 2.0, 4.0, 7.0});
  EXPECT_NEAR(sa_acceptance_probability(delta, sa_temperature(delta, 0.7)), 0.7, 1e-12);
  EXPECT_NEAR(sa_acceptance_probability(delta, sa_temperature(delta, 0.001)), 0.001, 1e-12);
  EXPECT_EQ(sa_calibration_delta({3.0, 3.0}), 1.0);
}

TEST(BitEncoding, NeedsPowerOfTwoCandidates) {
  EXPECT_THROW(power_set_encoding(30), UnsupportedError);
  const auto e = power_set_encoding(32);
  EXPECT_EQ(e.bits, 5);
  EXPECT_EQ(e.index_of(31), 31u);
  EXPECT_FALSE(e.index_of(32).has_value());
  auto p = make_problem();
  p->problem.encoding.reset();
  EXPECT_THROW(run_ga(p->problem, quick_config(10)), UnsupportedError);
  EXPECT_THROW(run_sa(p->problem, quick_config(10)), UnsupportedError);
}
