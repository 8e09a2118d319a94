#include <cmath>
#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xplain/bandit.hpp"
#include "xplain/error.hpp"

namespace xplain {
namespace {

Triple at(Eigen::VectorXd x) { return make_triple(std::move(x), Importance{{0.0}}, 0); }

Eigen::VectorXd basis(int i, double scale = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
  v[i] = scale;
  return v;
}

// Four contexts in the plane, label = quadrant parity, relevance ground truth
// that depends on the context.
Task toy_task(RewardKind reward = RewardKind::Cosine) {
  std::vector<Eigen::VectorXd> contexts;
  std::vector<Arm> truth;
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd x(2);
    x << (i & 1 ? 1.0 : -1.0), (i & 2 ? 1.0 : -1.0);
    contexts.push_back(x);
    Relevance r{{0, 0, 0, 0}};
    r.mask[static_cast<std::size_t>(i)] = 1;
    r.mask[static_cast<std::size_t>((i + 1) % 4)] = 1;
    truth.push_back({r, i % 2});
  }
  RewardOracle oracle(reward, std::move(truth));
  auto candidates = distinct_explanations(oracle);
  return Task{std::move(contexts), std::move(oracle), Variant::Relevance, std::move(candidates), std::nullopt};
}

TEST(Beta, Schedules) {
  EXPECT_EQ(BetaSchedule::constant(2.0).value(1), 2.0);
  EXPECT_EQ(BetaSchedule::constant(2.0).value(977), 2.0);
  EXPECT_DOUBLE_EQ(BetaSchedule::theorem(1.0, 0.1, {0.0}).value(40), 2.0);
  EXPECT_NEAR(BetaSchedule::log_growth(1.0, 1.0).value(std::exp(1.0) - 1.0), 2.0, 1e-15);
  EXPECT_NEAR(BetaSchedule::log_growth(1.0, 0.2).value(9), 1.0 + 0.2 * std::log(10.0), 1e-15);
}

TEST(Beta, TheoremFormula) {
  const auto b = BetaSchedule::theorem(0.5, 0.1, {1.0, 2.0});
  const double l1 = std::log(1 / 0.1), l3 = std::log(3 / 0.1);
  EXPECT_NEAR(b.value(1), 0.5 + 300 * 1.0 * l1 * l1 * l1, 1e-9);
  EXPECT_NEAR(b.value(3), 0.5 + 300 * 2.0 * l3 * l3 * l3, 1e-9);  // past the list: last entry
  EXPECT_NEAR(BetaSchedule::theorem(1.0, 0.5, {}).value(1), 2.0, 1e-15);
}

TEST(Beta, TheoremClampsLogBelowDelta) {
  EXPECT_NEAR(BetaSchedule::theorem(1.0, 0.999999, {5.0}).value(1), 2.0, 1e-9);
}

TEST(Beta, NonnegativeAndMonotone) {
  const auto theorem = BetaSchedule::theorem(1.0, 0.05, {0.1, 0.2, 0.2, 0.4, 0.8});
  const auto log = BetaSchedule::log_growth(1.0, 0.2);
  double prev_t = 0, prev_l = 0;
  for (int t = 1; t <= 300; ++t) {
    const double vt = theorem.value(t), vl = log.value(t);
    EXPECT_GE(vt, 0.0);
    EXPECT_GE(vt, prev_t);
    EXPECT_GE(vl, prev_l);
    prev_t = vt;
    prev_l = vl;
  }
}

TEST(Beta, RejectsInvalid) {
  EXPECT_THROW(BetaSchedule::constant(-1), InputError);
  EXPECT_THROW(BetaSchedule::log_growth(1, -0.1), InputError);
  EXPECT_THROW(BetaSchedule::theorem(1, 1.5, {}), InputError);
  EXPECT_THROW(BetaSchedule::theorem(1, 0.1, {-1}), InputError);
  EXPECT_THROW(BetaSchedule::constant(1).value(0), InputError);
}

TEST(ArmPool, Invariants) {
  EXPECT_THROW(ArmPool({}), InputError);
  EXPECT_THROW(ArmPool({{Relevance{{1}}, 0}, {Importance{{1}}, 0}}), InputError);
  EXPECT_THROW(ArmPool({{Relevance{{1}}, 2}}), InputError);
}

TEST(SelectUcb, PriorTiesGoToIndexZero) {
  const GpPosterior gp(KernelExpr::rbf(Part::Instance), 0.1);
  const std::vector<Triple> arms{at(basis(0)), at(basis(1)), at(-basis(0))};
  const auto s = select_arm_ucb(gp, arms, 2.0);
  EXPECT_EQ(s.index, 0u);
  EXPECT_NEAR(s.score, std::sqrt(2.0), 1e-15);
}

TEST(SelectUcb, BetaZeroIsGreedy) {
  const auto gp = GpPosterior::fit(KernelExpr::linear(Part::Instance), {at(basis(0)), at(basis(1))}, {0.2, 0.9}, 0.1);
  const std::vector<Triple> arms{at(basis(0)), at(basis(1))};
  EXPECT_EQ(select_arm_ucb(gp, arms, 0.0).index, 1u);
}

// Arm 1 ends with (μ, σ) = (0.5, 0.1), arm 2 with (0.4, 0.3): independent
// linear-kernel coordinates, each observed once.
TEST(SelectUcb, ExplorationBonusWins) {
  const double s2 = 1.0 / 99.0;
  const double c = std::sqrt((s2 / 0.09) - s2);
  const double r1 = 0.5 * (1 + s2);
  const double r2 = 0.4 * (c * c + s2) / c;
  const auto gp = GpPosterior::fit(KernelExpr::linear(Part::Instance), {at(basis(0)), at(basis(1, c))}, {r1, r2}, s2);
  const std::vector<Triple> arms{at(basis(0)), at(basis(1))};
  ASSERT_NEAR(gp.posterior_mean(arms[0]), 0.5, 1e-12);
  ASSERT_NEAR(std::sqrt(gp.posterior_var(arms[0])), 0.1, 1e-12);
  ASSERT_NEAR(gp.posterior_mean(arms[1]), 0.4, 1e-12);
  ASSERT_NEAR(std::sqrt(gp.posterior_var(arms[1])), 0.3, 1e-12);
  const auto s = select_arm_ucb(gp, arms, 1.0);
  EXPECT_EQ(s.index, 1u);
  EXPECT_NEAR(s.score, 0.7, 1e-12);
  EXPECT_EQ(select_arm_ucb(gp, arms, 0.0).index, 0u);
}

TEST(SelectUcb, BetaZeroOnFullyObservedPoolPicksBest) {
  Rng rng(21);
  const Task task = toy_task();
  for (std::size_t ctx = 0; ctx < 4; ++ctx) {
    const ArmPool pool = build_arm_pool(task, ctx, rng, {});
    std::vector<Triple> triples;
    std::vector<double> rewards;
    double best = -2;
    for (const auto& arm : pool) {
      triples.push_back(make_triple(task.contexts[ctx], arm.explanation, arm.label));
      rewards.push_back(task.oracle(ctx, arm));
      best = std::max(best, rewards.back());
    }
    const auto gp = GpPosterior::fit(prod_kernel(), triples, rewards, 1e-9);
    const auto s = select_arm_ucb(gp, task.contexts[ctx], pool, 0.0);
    EXPECT_NEAR(task.oracle(ctx, pool[s.index]), best, 1e-6);
  }
}

TEST(SelectRandom, SingletonAndDeterminism) {
  Rng a(5), b(5);
  const ArmPool single({{Relevance{{1}}, 0}});
  EXPECT_EQ(select_arm_random(single, a), 0u);
  EXPECT_EQ(select_arm_random(single, b), 0u);
  const ArmPool pool({{Relevance{{1}}, 0}, {Relevance{{1}}, 1}, {Relevance{{0}}, 0}, {Relevance{{0}}, 1}});
  for (int i = 0; i < 50; ++i) ASSERT_EQ(select_arm_random(pool, a), select_arm_random(pool, b));
}

TEST(SelectRandom, UniformFrequencies) {
  Rng rng(22);
  const ArmPool pool({{Relevance{{1}}, 0}, {Relevance{{1}}, 1}, {Relevance{{0}}, 0}, {Relevance{{0}}, 1}});
  std::map<std::size_t, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[select_arm_random(pool, rng)];
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(std::abs(counts[k] - n * 0.25), 5 * sd);
}

TEST(Regret, Examples) {
  const RewardOracle oracle(RewardKind::Hamming, {{Relevance{{1, 1, 1, 1, 1, 1, 1, 1, 1, 1}}, 1}});
  const ArmPool pool({{Relevance{{1, 1, 1, 1, 1, 1, 1, 1, 1, 1}}, 1}, {Relevance{{1, 1, 1, 0, 0, 0, 0, 0, 0, 0}}, 1}});
  EXPECT_EQ(instantaneous_regret(oracle, 0, pool, 0), 0.0);
  EXPECT_NEAR(instantaneous_regret(oracle, 0, pool, 1), 0.7, 1e-15);
  const ArmPool flat({{Relevance{{1, 0, 0, 0, 0, 0, 0, 0, 0, 0}}, 1}, {Relevance{{0, 1, 0, 0, 0, 0, 0, 0, 0, 0}}, 1}});
  EXPECT_EQ(instantaneous_regret(oracle, 0, flat, 1), 0.0);
  EXPECT_THROW(instantaneous_regret(oracle, 0, flat, 2), InputError);
}

TEST(ArmPoolBuilder, ContainsGroundTruthBothLabelsAndDeduplicates) {
  Rng rng(23);
  const Task task = toy_task();
  for (std::size_t ctx = 0; ctx < 4; ++ctx) {
    const ArmPool pool = build_arm_pool(task, ctx, rng, {20, 3});
    EXPECT_EQ(pool.size() % 2, 0u);
    bool has_truth = false;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      has_truth |= pool[i] == task.oracle.truth(ctx);
      for (std::size_t j = i + 1; j < pool.size(); ++j) ASSERT_FALSE(pool[i] == pool[j]);
      if (auto* r = std::get_if<Relevance>(&pool[i].explanation)) {
        ASSERT_GT(std::count(r->mask.begin(), r->mask.end(), 1), 0);  // cosine-scorable
      }
    }
    EXPECT_TRUE(has_truth);
  }
}

TEST(Ledger, PrefixSumsAndMeans) {
  RegretLedger ledger;
  const double regrets[] = {0.5, 0.25, 0.0, 1.0};
  double running = 0;
  for (int i = 0; i < 4; ++i) {
    RoundRecord r;
    r.t = i + 1;
    r.regret = regrets[i];
    ledger.append(r);
    running += regrets[i];
    EXPECT_EQ(ledger[static_cast<std::size_t>(i)].cumulative_regret, running);
  }
  EXPECT_EQ(ledger.total_regret(), 1.75);
  EXPECT_EQ(ledger.mean_regret(1, 2), 0.375);
  EXPECT_THROW(ledger.mean_regret(0, 2), InputError);
  EXPECT_THROW(ledger.mean_regret(2, 5), InputError);
  RoundRecord negative;
  negative.regret = -0.1;
  EXPECT_THROW(ledger.append(negative), InternalError);
}

TEST(Episode, SingleRound) {
  EpisodeSettings s;
  s.rounds = 1;
  const auto ledger = run_episode(toy_task(), s, 1);
  ASSERT_EQ(ledger.size(), 1u);
  EXPECT_EQ(ledger[0].t, 1);
  EXPECT_EQ(ledger.total_regret(), ledger[0].regret);
}

TEST(Episode, InvariantsOverRounds) {
  EpisodeSettings s;
  s.rounds = 60;
  for (auto strategy : {Strategy::Ucb, Strategy::Random}) {
    s.strategy = strategy;
    const auto ledger = run_episode(toy_task(), s, 7);
    double sum = 0;
    for (const auto& r : ledger.records()) {
      ASSERT_GE(r.regret, 0.0);
      ASSERT_EQ(r.regret, r.best_reward - r.true_reward);
      ASSERT_EQ(r.reward, r.true_reward + r.noise);
      sum += r.regret;
      ASSERT_EQ(r.cumulative_regret, sum);
    }
  }
}

TEST(Episode, NoiseFreeUcbReachesZeroRegret) {
  EpisodeSettings s;
  s.rounds = 80;
  s.sigma2 = 0.0;
  const auto ledger = run_episode(toy_task(), s, 3);
  bool zero = false;
  for (const auto& r : ledger.records()) zero |= r.regret == 0.0;
  EXPECT_TRUE(zero);
  EXPECT_EQ(ledger[0].noise, 0.0);
}

TEST(Episode, DeterministicPerSeed) {
  EpisodeSettings s;
  s.rounds = 40;
  EXPECT_EQ(run_episode(toy_task(), s, 11), run_episode(toy_task(), s, 11));
  EXPECT_FALSE(run_episode(toy_task(), s, 11) == run_episode(toy_task(), s, 12));
}

TEST(Episode, StrategiesShareContextsForASeed) {
  EpisodeSettings s;
  s.rounds = 30;
  const auto ucb = run_episode(toy_task(), s, 4);
  s.strategy = Strategy::Random;
  const auto rnd = run_episode(toy_task(), s, 4);
  for (std::size_t i = 0; i < 30; ++i) {
    ASSERT_EQ(ucb[i].context, rnd[i].context);
    ASSERT_EQ(ucb[i].noise, rnd[i].noise);
  }
}

TEST(Episode, NoiseIsCentred) {
  EpisodeSettings s;
  s.rounds = 10000;
  s.strategy = Strategy::Random;
  s.sigma2 = 0.01;
  const auto ledger = run_episode(toy_task(), s, 5);
  double mean = 0, sq = 0;
  for (const auto& r : ledger.records()) {
    mean += r.noise;
    sq += r.noise * r.noise;
  }
  mean /= 10000;
  EXPECT_LE(std::abs(mean), 5 * 0.1 / 100);
  EXPECT_NEAR(sq / 10000, 0.01, 0.001);
}

TEST(Episode, ExhaustionWithoutReplacementIsConfigError) {
  EpisodeSettings s;
  s.rounds = 5;
  s.sampling = Sampling::WithoutReplacement;
  try {
    run_episode(toy_task(), s, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rounds");
  }
  s.rounds = 4;
  const auto ledger = run_episode(toy_task(), s, 1);
  std::set<std::size_t> seen;
  for (const auto& r : ledger.records()) seen.insert(r.context);
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Episode, RejectsBadSettings) {
  EpisodeSettings s;
  s.rounds = 0;
  EXPECT_THROW(run_episode(toy_task(), s, 1), ConfigError);
  s.rounds = 3;
  s.sigma2 = -1;
  EXPECT_THROW(run_episode(toy_task(), s, 1), ConfigError);
}

}  // namespace
}  // namespace xplain
