// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "reliakit/detail/random.hpp"
#include "reliakit/grpo.hpp"

namespace {

using namespace reliakit;
using K = VerdictKind;

TEST(RewardSpec, DefaultsAndOrdering) {
  RewardSpec s;
  EXPECT_EQ(s(K::Correct), 1.0);
  EXPECT_EQ(s(K::Refusal), -0.5);
  EXPECT_EQ(s(K::Wrong), -1.0);
  EXPECT_DOUBLE_EQ(s.indifference_point(), 0.25);
  EXPECT_FALSE(s.ablation());
  EXPECT_THROW(RewardSpec(1, -1, -1), ArgumentError);
  EXPECT_THROW(RewardSpec(1, 1.5, -1), ArgumentError);
  EXPECT_THROW(RewardSpec(1, std::nan(""), -1), ArgumentError);
}

TEST(RewardSpec, AblationIsNamed) {
  auto s = RewardSpec::without_rejection_reward();
  EXPECT_TRUE(s.ablation());
  EXPECT_EQ(s(K::Refusal), s(K::Wrong));
  EXPECT_DOUBLE_EQ(s.indifference_point(), 0.0);
}

TEST(Reward, JudgesResponse) {
  RewardSpec s;
  EXPECT_EQ(reward(make_response("\\boxed{Paris}"), {"paris"}, s), 1.0);
  EXPECT_EQ(reward(make_response("I don't know"), {"paris"}, s), -0.5);
  EXPECT_EQ(reward(make_response("\\boxed{Rome}"), {"paris"}, s), -1.0);
}

TEST(GroupAdvantages, KnownGroup) {
  auto a = group_advantages({1, -0.5, -1, -1});
  // mean -0.375, population sd sqrt(0.671875)
  const double sd = std::sqrt(0.671875);
  EXPECT_NEAR(a[0], 1.375 / sd, 1e-12);
  EXPECT_NEAR(a[1], -0.125 / sd, 1e-12);
  EXPECT_NEAR(a[2], -0.625 / sd, 1e-12);
}

TEST(GroupAdvantages, ZeroMeanUnitStd) {
  detail::Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> r(2 + rng.below(14));
    for (auto& x : r) x = std::vector<double>{1, -0.5, -1}[rng.below(3)];
    auto a = group_advantages(r);
    double m = 0, v = 0;
    for (double x : a) m += x;
    m /= a.size();
    for (double x : a) v += (x - m) * (x - m);
    v /= a.size();
    EXPECT_NEAR(m, 0.0, 1e-12);
    if (std::any_of(a.begin(), a.end(), [](double x) { return x != 0.0; })) {
      EXPECT_NEAR(std::sqrt(v), 1.0, 1e-12);
    }
  }
}

TEST(GroupAdvantages, DegenerateAndMeanOnly) {
  EXPECT_EQ(group_advantages({-1, -1, -1}), std::vector<double>(3, 0.0));
  auto m = group_advantages({1, -1}, AdvantageNormalization::GroupMeanOnly);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], -1.0);
  EXPECT_THROW(group_advantages({}), ArgumentError);
  EXPECT_EQ(normalization_from_string("group_mean"), AdvantageNormalization::GroupMeanOnly);
  EXPECT_THROW(normalization_from_string("none"), ArgumentError);
}

TEST(Surrogate, ClipsBothSides) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, 1.0, 0.2), 0.5);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, -1.0, 0.2), -1.5);
  EXPECT_THROW(clipped_surrogate(0.0, 1.0, 0.2), DomainError);
}

TEST(KlPenalty, ValuesAndDomain) {
  EXPECT_DOUBLE_EQ(kl_penalty(0.3, 0.3), 0.0);
  EXPECT_NEAR(kl_penalty(0.5, 0.25), 0.5 - 1 - std::log(0.5), 1e-15);
  EXPECT_GE(kl_penalty(0.9, 0.1), 0.0);
  EXPECT_THROW(kl_penalty(0.0, 0.5), DomainError);
  EXPECT_THROW(kl_penalty(0.5, 1.5), DomainError);
}

TEST(KlPenalty, MonteCarloMatchesBernoulliKl) {
  detail::Rng rng(4);
  const std::vector<double> pi{0.7, 0.3}, ref{0.4, 0.6};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::size_t a = rng.uniform() < pi[0] ? 0 : 1;
    sum += kl_penalty(pi[a], ref[a]);
  }
  const double exact = oracle::kl_categorical(pi, ref);
  EXPECT_NEAR(sum / n, exact, 0.02 * exact);
}

TEST(Surrogate, GradientMatchesFiniteDifferences) {
  detail::Rng rng(12);
  const ObjectiveTerms terms{0.2, 0.05};
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> old{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
    std::vector<double> ref{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
    std::vector<double> theta{old[0] + (rng.uniform() - 0.5) * 0.6,
                              old[1] + (rng.uniform() - 0.5) * 0.6};
    GroupBatch b;
    std::vector<double> rewards;
    for (int j = 0; j < 8; ++j) {
      b.actions.push_back(rng.below(2));
      rewards.push_back(std::vector<double>{1, -0.5, -1}[rng.below(3)]);
    }
    b.advantages = group_advantages(rewards);
    // Skip configurations sitting on a clip kink.
    const auto pi = softmax(theta), po = softmax(old);
    bool kink = false;
    for (std::size_t a = 0; a < 2; ++a) {
      const double rho = pi[a] / po[a];
      kink |= std::fabs(rho - 1.2) < 1e-4 || std::fabs(rho - 0.8) < 1e-4;
    }
    if (kink) continue;
    auto f = [&](const std::vector<double>& x) {
      return surrogate_objective(x, old, ref, b, terms);
    };
    auto num = oracle::numeric_gradient(f, theta);
    auto ana = surrogate_gradient(theta, old, ref, b, terms);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(ana[i], num[i], 1e-6 + 1e-5 * std::fabs(num[i]));
    }
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

SimEnvironment two_class() {
  SimEnvironment env;
  env.add_class("unknown", 0.05, 16);
  env.add_class("known", 0.9, 16);
  return env;
}

GrpoConfig quick(std::size_t epochs = 100) {
  GrpoConfig c;
  c.epochs = epochs;
  return c;
}

TEST(Simulator, DeterministicPerSeed) {
  auto a = simulate_grpo(two_class(), RewardSpec(), quick(), 5);
  auto b = simulate_grpo(two_class(), RewardSpec(), quick(), 5);
  auto c = simulate_grpo(two_class(), RewardSpec(), quick(), 6);
  EXPECT_EQ(trace_csv(a), trace_csv(b));
  EXPECT_NE(trace_csv(a), trace_csv(c));
}

TEST(Simulator, TraceHasOneRowPerClassPerEpoch) {
  auto cfg = quick(10);
  auto r = simulate_grpo(two_class(), RewardSpec(), cfg, 1);
  EXPECT_EQ(r.trace.size(), 20u);
  EXPECT_EQ(r.trace.front().epoch, 1u);
  EXPECT_NEAR(r.trace.front().refusal_rate, 0.5, 1e-12);
  cfg.trace_every = 4;
  EXPECT_EQ(simulate_grpo(two_class(), RewardSpec(), cfg, 1).trace.size(), 8u);
  const auto csv = trace_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,class,attempt_rate,refusal_rate,mean_reward");
}

TEST(Simulator, MovesInTheRightDirection) {
  auto r = simulate_grpo(two_class(), RewardSpec(), quick(300), 2);
  EXPECT_GT(r.final_state.refusal_rate("unknown"), 0.8);
  EXPECT_LT(r.final_state.refusal_rate("known"), 0.2);
}

TEST(Simulator, StrongKlHoldsPolicyNearReference) {
  auto cfg = quick(300);
  cfg.kl_coefficient = 1000;
  auto r = simulate_grpo(two_class(), RewardSpec(), cfg, 2);
  EXPECT_NEAR(r.final_state.refusal_rate("unknown"), 0.5, 0.05);
  EXPECT_NEAR(r.final_state.refusal_rate("known"), 0.5, 0.05);
}

TEST(Simulator, WarmStartBiasesLowCompetenceClasses) {
  WarmStart w{2.0, 0.5};
  auto s = initial_policy(two_class(), w);
  EXPECT_GT(s.refusal_rate("unknown"), 0.85);
  EXPECT_NEAR(s.refusal_rate("known"), 0.5, 1e-12);
}

TEST(Simulator, ConfigValidation) {
  GrpoConfig c;
  c.group_size = 1;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  SimEnvironment bad;
  EXPECT_THROW(simulate_grpo(bad, RewardSpec(), quick(), 0), ArgumentError);
  bad.add_class("x", 1.5, 1);
  EXPECT_THROW(simulate_grpo(bad, RewardSpec(), quick(), 0), ArgumentError);
}

TEST(ExpectedTally, MatchesPolicy) {
  auto env = two_class();
  auto s = initial_policy(env, {});
  auto t = expected_tally(env, s);
  EXPECT_NEAR(t.total(), 32.0, 1e-12);
  EXPECT_NEAR(t.n_refusal, 16.0, 1e-12);
  EXPECT_NEAR(t.n_correct, 16 * 0.5 * 0.05 + 16 * 0.5 * 0.9, 1e-12);
}

TEST(RewardSweep, FlagsAblation) {
  auto rows = reward_sweep(two_class(), {-1.0, -0.5}, quick(50), 3);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].ablation);
  EXPECT_FALSE(rows[1].ablation);
  EXPECT_EQ(rows[0].class_abstain.size(), 2u);
  EXPECT_THROW(reward_sweep(two_class(), {0.5, 2.0}, quick(5), 3), ArgumentError);
}

TEST(BoundaryScan, FindsCrossingByInterpolation) {
  auto scan = scan_decision_boundary(RewardSpec(), quick(300), {0.0, 1.0}, 1, 4);
  ASSERT_EQ(scan.points.size(), 2u);
  EXPECT_GT(scan.points[0].second, 0.5);
  EXPECT_LT(scan.points[1].second, 0.5);
  ASSERT_TRUE(scan.boundary);
  EXPECT_GT(*scan.boundary, 0.0);
  EXPECT_LT(*scan.boundary, 1.0);
}

}  // namespace
