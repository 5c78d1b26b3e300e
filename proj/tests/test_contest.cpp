#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frontguard/contest.hpp"
#include "frontguard/oracle.hpp"
#include "support/random_spec.hpp"

namespace fg = frontguard;

namespace {

fg::ContestSpec overlap(double gamma2 = 0.8) {
  fg::ContestSpec spec;
  spec.prize = 8.0;
  spec.gamma1 = 1.0;
  spec.gamma2 = gamma2;
  spec.curve = fg::SuccessCurve::exponential(1.0, 1.0);
  spec.c = 2.0;
  spec.beta = 0.9;
  return spec;
}

// Root of prize * gamma * (1 - e^-f) = f by fixed-point iteration.
double fixed_point_upper(double k) {
  double f = k;
  for (int i = 0; i < 500; ++i) f = k * (1.0 - std::exp(-f));
  return f;
}

}  // namespace

TEST(Curve, ExponentialShape) {
  const auto q = fg::SuccessCurve::exponential(0.9, 2.0);
  EXPECT_DOUBLE_EQ(q(0.0), 0.0);
  EXPECT_NEAR(q.derivative(0.0), 1.8, 1e-15);
  EXPECT_LT(q(100.0), 0.9 + 1e-12);
  EXPECT_THROW(fg::SuccessCurve::exponential(1.5, 1.0), fg::Error);
}

TEST(Curve, PowerCaps) {
  const auto q = fg::SuccessCurve::power(0.5, 0.5);
  EXPECT_DOUBLE_EQ(q(q.saturation()), 1.0);
  EXPECT_DOUBLE_EQ(q(100.0), 1.0);
  EXPECT_DOUBLE_EQ(q.derivative(100.0), 0.0);
}

TEST(FLower, LogOfPrize) {
  EXPECT_NEAR(fg::f_lower(overlap(), 1), std::log(8.0), 1e-12);
  // Grid check of the first-order condition.
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double f = i * 1e-4 * 5;
    const double v = 8.0 * (1.0 - std::exp(-f)) - f;
    if (v > best) best = v, arg = f;
  }
  EXPECT_NEAR(fg::f_lower(overlap(), 1), arg, 1e-3);
}

TEST(FLower, InactiveWhenMarginalTooSmall) {
  auto spec = overlap(0.1);
  spec.prize = 5.0;  // 5 * 0.1 * q'(0) = 0.5 <= 1
  EXPECT_DOUBLE_EQ(fg::f_lower(spec, 2), 0.0);
  EXPECT_DOUBLE_EQ(fg::f_upper(spec, 2), 0.0);
}

TEST(FLower, OnlyProductMatters) {
  auto a = overlap();
  auto b = overlap();
  b.prize = 16.0;
  b.gamma1 = 0.5;
  EXPECT_NEAR(fg::f_lower(a, 1), fg::f_lower(b, 1), 1e-12);
}

TEST(FUpper, WeakAttacker) {
  const double f = fg::f_upper(overlap(), 2);
  EXPECT_NEAR(f, fixed_point_upper(6.4), 1e-9);
  EXPECT_NEAR(f, 6.389, 1e-3);
  EXPECT_NEAR(6.4 * (1.0 - std::exp(-f)) - f, 0.0, 1e-7 * 8.0);
}

TEST(SolveContest, MixedOverlap) {
  const auto sol = fg::solve_contest(overlap());
  EXPECT_EQ(sol.regime, fg::ContestRegime::MixedOverlap);
  const double f2 = fixed_point_upper(6.4);
  EXPECT_NEAR(sol.payoff1, 8.0 * (1.0 - std::exp(-f2)) - f2, 1e-9);
  EXPECT_NEAR(sol.payoff1, 1.598, 1e-3);
  EXPECT_DOUBLE_EQ(sol.payoff2, 0.0);
  EXPECT_LE(sol.payoff1, sol.value[0]);
}

TEST(SolveContest, PureStrong) {
  const auto sol = fg::solve_contest(overlap(0.01));
  EXPECT_EQ(sol.regime, fg::ContestRegime::PureStrong);
  EXPECT_NEAR(sol.payoff1, 7.0 - std::log(8.0), 1e-12);
  EXPECT_NEAR(sol.payoff1, 4.921, 1e-3);
}

TEST(SolveContest, SymmetricFullDissipation) {
  const auto sol = fg::solve_contest(overlap(1.0));
  EXPECT_NEAR(sol.payoff1, 0.0, 1e-7 * 8.0);
}

TEST(ContestProperty, OrderingAndMonotonicity) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const auto spec = fg::testing::random_contest(rng);
    for (int who : {1, 2}) {
      const double lo = fg::f_lower(spec, who), hi = fg::f_upper(spec, who);
      EXPECT_LE(lo, hi + 1e-9);
      const auto bigger = spec.with_prize(spec.prize * 1.3);
      EXPECT_GE(fg::f_lower(bigger, who) + 1e-7, lo);
      EXPECT_GE(fg::f_upper(bigger, who) + 1e-7, hi);
    }
    const auto sol = fg::solve_contest(spec);
    if (sol.regime == fg::ContestRegime::MixedOverlap) {
      EXPECT_DOUBLE_EQ(sol.payoff2, 0.0);
      EXPECT_LE(sol.payoff1, sol.value[0] + 1e-12);
    }
  }
}

TEST(ContestProperty, StrongPayoffFallsWithWeakStrength) {
  double last = std::numeric_limits<double>::infinity();
  for (double g2 = 0.3; g2 <= 1.0; g2 += 0.05) {
    const auto sol = fg::solve_contest(overlap(g2));
    ASSERT_EQ(sol.regime, fg::ContestRegime::MixedOverlap);
    EXPECT_LT(sol.payoff1, last);
    last = sol.payoff1;
  }
}

TEST(CommitmentStage, CoordinationCase) {
  const auto stage = fg::commitment_stage(overlap());
  EXPECT_EQ(stage.kind, fg::CommitmentCase::Coordination);
  ASSERT_EQ(stage.equilibria.size(), 3u);
  const auto& mixed = stage.equilibria[2];
  EXPECT_TRUE(mixed.mixed);
  EXPECT_NEAR(0.9 * stage.values.solo_strong, 4.43, 1e-2);
  EXPECT_NEAR(0.9 * stage.values.shared_strong, 1.44, 1e-2);
  EXPECT_GT(0.9 * stage.values.solo_weak, 2.0);
  EXPECT_NEAR(fg::commit_payoff(stage.values, 2.0, 0.9, 1, mixed.alpha2), 0.0, 1e-12);
  EXPECT_NEAR(fg::commit_payoff(stage.values, 2.0, 0.9, 2, mixed.alpha1), 0.0, 1e-12);
}

TEST(CommitmentStage, NoCommitmentWhenTooExpensive) {
  auto spec = overlap();
  spec.c = 10.0;
  const auto stage = fg::commitment_stage(spec);
  EXPECT_EQ(stage.kind, fg::CommitmentCase::NoCommitment);
  EXPECT_DOUBLE_EQ(stage.equilibria[0].alpha1, 0.0);
}

TEST(CommitmentStage, StrongOnlyWhenSharedStillPays) {
  auto spec = overlap();
  spec.c = 1.0;  // beta * V_lower = 1.44 > 1
  const auto stage = fg::commitment_stage(spec);
  EXPECT_EQ(stage.kind, fg::CommitmentCase::StrongOnly);
  ASSERT_EQ(stage.equilibria.size(), 1u);
  EXPECT_DOUBLE_EQ(stage.equilibria[0].alpha1, 1.0);
  EXPECT_DOUBLE_EQ(stage.equilibria[0].alpha2, 0.0);
  // Attacker 2 joining would face the contest and earn nothing net of the commit.
  EXPECT_LE(fg::commit_payoff(stage.values, spec.c, spec.beta, 2, 1.0), 0.0);
}

TEST(CommitmentStage, ProtocolRaisesSpendWhenOneAttackerDominates) {
  // Without the protocol only attacker 1 spends f_lower. With it he also pays the commit.
  const auto spec = overlap(0.01);
  const auto sol = fg::solve_contest(spec);
  const auto stage = fg::commitment_stage(spec);
  ASSERT_EQ(stage.kind, fg::CommitmentCase::StrongOnly);
  const double without = sol.f_lower[0];
  const double with = spec.c + sol.f_lower[0];
  EXPECT_GT(with, without);
}

TEST(CommitmentStageProperty, NeverBothCommitForSure) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    const auto spec = fg::testing::random_contest(rng);
    for (const auto& p : fg::commitment_stage(spec).equilibria) EXPECT_FALSE(p.alpha1 == 1.0 && p.alpha2 == 1.0);
  }
}

TEST(FictitiousPlay, OverlapPayoffs) {
  const auto fp = fg::oracle_fictitious_play(overlap());
  const auto sol = fg::solve_contest(overlap());
  EXPECT_NEAR(fp.payoff1, sol.payoff1, 0.05 * sol.payoff1);
  EXPECT_NEAR(fp.payoff2, 0.0, 0.05 * 8.0);
  EXPECT_NEAR(fp.mix1.sum(), 1.0, 1e-12);
}

TEST(FictitiousPlay, DominantStrongAttacker) {
  const auto fp = fg::oracle_fictitious_play(overlap(0.01));
  EXPECT_NEAR(fp.payoff1, 4.921, 0.05 * 4.921);
  EXPECT_NEAR(fp.payoff2, 0.0, 0.05 * 8.0);
}

TEST(FictitiousPlay, SymmetricDissipates) {
  const auto fp = fg::oracle_fictitious_play(overlap(1.0));
  EXPECT_NEAR(fp.payoff1, 0.0, 0.05 * 8.0);
  EXPECT_NEAR(fp.payoff2, 0.0, 0.05 * 8.0);
}
