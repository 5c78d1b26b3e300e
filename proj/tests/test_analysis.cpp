#include <gtest/gtest.h>

#include <random>

#include "frontguard/analysis.hpp"
#include "support/random_spec.hpp"

namespace fg = frontguard;

namespace {

fg::GameSpec g1(fg::CostParams k = {1.0, 2.0, 0.5, 0.9}) {
  return fg::GameSpec::tabulate(
      {"s1", "s2"}, {"m1", "m2"}, {0.5, 0.5}, k, [](std::size_t m, std::size_t s) { return m == s ? 10.0 : 0.0; },
      [](std::size_t b, std::size_t, std::size_t s) { return b == s ? 8.0 : 0.0; });
}

}  // namespace

TEST(Guessing, G1IsHard) {
  const auto r = fg::guessing_value(g1());
  EXPECT_DOUBLE_EQ(r.pi, 1.0);
  EXPECT_DOUBLE_EQ(r.threshold, 1.0 / 0.9);
  EXPECT_EQ(r.regime, fg::GuessingRegime::Hard);
  EXPECT_EQ(r.best_commit, 0u);
}

TEST(Guessing, CheapCommitsMakeItEasy) {
  const auto r = fg::guessing_value(g1({0.5, 2.0, 0.5, 0.9}));
  EXPECT_EQ(r.regime, fg::GuessingRegime::Easy);
}

TEST(Guessing, EqualityIsHard) { EXPECT_EQ(fg::classify_regime(2.0, 2.0), fg::GuessingRegime::Hard); }

TEST(Guessing, NoParticipation) {
  const auto g = fg::GameSpec::tabulate({"s1"}, {"m1"}, {1.0}, fg::CostParams{5.0, 6.0, 0.5, 0.9},
                                        [](auto, auto) { return 1.0; }, [](auto, auto, auto) { return 8.0; });
  EXPECT_FALSE(fg::detail::try_guessing_table(g));
  EXPECT_THROW(fg::guessing_value(g), fg::NoParticipation);
}

TEST(HonestPayoff, G1) {
  EXPECT_NEAR(fg::honest_protocol_payoff(g1(), 0), 7.1, 1e-12);
  EXPECT_DOUBLE_EQ(fg::honest_protocol_payoff(g1({1.0, 2.0, 0.5, 0.0}), 0), 0.0);
}

TEST(StrongCondition, G1Holds) {
  const auto sc = fg::check_strong_condition(g1());
  EXPECT_TRUE(sc.holds);
  EXPECT_DOUBLE_EQ(sc.max_lhs, 2.0);
  EXPECT_NEAR(sc.rhs, 2.0 + 1.0 / 0.9, 1e-12);
}

TEST(MultiCommit, G1) {
  const auto plan = fg::plan_multi_commit(g1(), 2);
  ASSERT_GE(plan.pi_of_k.size(), 2u);
  EXPECT_DOUBLE_EQ(plan.pi_of_k[0], 1.0);
  EXPECT_DOUBLE_EQ(plan.pi_of_k[1], 2.0);
  EXPECT_EQ(plan.k_star, 2u);
  EXPECT_FALSE(plan.approximate);
}

TEST(MultiCommit, ZeroPayoffB) {
  const auto g = g1().with_scaled_payoff_b(0.0);
  const auto plan = fg::plan_multi_commit(g, 2);
  EXPECT_EQ(plan.k_star, 1u);
  EXPECT_DOUBLE_EQ(plan.pi_of_k[0], 0.0);
  EXPECT_FALSE(plan.worth_committing);
}

TEST(MultiCommit, SingleProfitableMessage) {
  const auto g = fg::GameSpec::tabulate(
      {"s1", "s2", "s3"}, {"m1", "m2", "m3"}, {0.3, 0.3, 0.4}, fg::CostParams{1.0, 2.0, 0.5, 0.9},
      [](std::size_t m, std::size_t s) { return m == s ? 10.0 : 0.0; },
      [](std::size_t b, std::size_t, std::size_t) { return b == 2 ? 9.0 : 0.0; });
  const auto plan = fg::plan_multi_commit(g, 3);
  EXPECT_EQ(plan.k_star, 1u);
  EXPECT_DOUBLE_EQ(plan.pi_of_k[1], plan.pi_of_k[0]);
}

TEST(MultiCommit, ExactOptimumNeedNotBeConcave) {
  // Net counter values per state: a, b, c pay 12 in their own state, d pays 7 everywhere.
  // pi(1) = 7 ({d}), pi(2) = 26/3 ({a, d}), pi(3) = 12 ({a, b, c}).
  const auto g = fg::GameSpec::tabulate(
      {"s1", "s2", "s3"}, {"a", "b", "c", "d"}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, fg::CostParams{0.01, 0.02, 1.0, 1.0},
      [](std::size_t m, std::size_t s) { return m == s ? 10.0 : 0.0; },
      [](std::size_t b, std::size_t, std::size_t s) {
        if (b == 3) return 7.02;
        return b == s ? 12.02 : 0.0;
      });
  const auto plan = fg::plan_multi_commit(g, 4);
  ASSERT_GE(plan.pi_of_k.size(), 3u);
  EXPECT_NEAR(plan.pi_of_k[0], 7.0, 1e-9);
  EXPECT_NEAR(plan.pi_of_k[1], 26.0 / 3, 1e-9);
  EXPECT_NEAR(plan.pi_of_k[2], 12.0, 1e-9);
  EXPECT_GT(plan.pi_of_k[2] - plan.pi_of_k[1], plan.pi_of_k[1] - plan.pi_of_k[0]);
}

TEST(MultiCommitProperty, PiOfKIsNondecreasing) {
  std::mt19937_64 rng(21);
  fg::testing::SpecFamily fam;
  fam.max_messages = 8;
  for (int i = 0; i < 100; ++i) {
    const auto spec = fg::testing::random_spec(rng, fam);
    if (!fg::detail::try_guessing_table(spec)) continue;
    const auto plan = fg::plan_multi_commit(spec, spec.num_messages());
    for (std::size_t k = 1; k < plan.pi_of_k.size(); ++k) EXPECT_GE(plan.pi_of_k[k] + 1e-12, plan.pi_of_k[k - 1]);
    EXPECT_LE(plan.k_star, spec.num_messages());
  }
}

TEST(Hiding, G1) {
  const auto g = g1();
  const auto h = fg::assess_hiding(g, 0.5, 4);
  EXPECT_DOUBLE_EQ(h.pi, 1.0);
  EXPECT_TRUE(h.attack_deterred);
  EXPECT_TRUE(fg::assess_hiding(g, 1.0).attack_deterred);
  EXPECT_THROW(fg::assess_hiding(g, 1.5), fg::Error);
}

TEST(Hiding, FlipsAtThreshold) {
  const auto g = g1({0.5, 2.0, 0.5, 0.9});
  EXPECT_TRUE(fg::assess_hiding(g, 0.5).attack_deterred);
  EXPECT_FALSE(fg::assess_hiding(g, 0.6).attack_deterred);
}

TEST(HidingProperty, MonotoneInTau) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto spec = fg::testing::random_spec(rng);
    bool deterred = true;
    for (int t = 0; t <= 20; ++t) {
      const bool now = fg::assess_hiding(spec, t / 20.0).attack_deterred;
      if (!deterred) {
        EXPECT_FALSE(now);
      }
      deterred = now;
    }
  }
}
