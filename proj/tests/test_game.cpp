#include <gtest/gtest.h>

#include <random>

#include "frontguard/game.hpp"
#include "frontguard/oracle.hpp"
#include "support/random_spec.hpp"

namespace fg = frontguard;

namespace {

fg::GameSpec g1(fg::CostParams k = {1.0, 2.0, 0.5, 0.9}) {
  return fg::GameSpec::tabulate(
      {"s1", "s2"}, {"m1", "m2"}, {0.5, 0.5}, k, [](std::size_t m, std::size_t s) { return m == s ? 10.0 : 0.0; },
      [](std::size_t b, std::size_t, std::size_t s) { return b == s ? 8.0 : 0.0; });
}

bool has(const fg::ValidationReport& r, fg::ViolationKind kind) {
  for (const auto& v : r.violations)
    if (v.kind == kind) return true;
  return false;
}

}  // namespace

TEST(Validation, G1IsValid) { EXPECT_TRUE(fg::validate_spec(g1()).ok()); }

TEST(Validation, RejectsBadPriorAndCosts) {
  auto bad = fg::GameSpec({"s1", "s2"}, {"m1", "m2"}, {0.5, 0.6}, {{10, 0}, {0, 10}},
                          {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}, fg::CostParams{1, 0.5, 0.5, 0.9});
  const auto r = fg::validate_spec(bad);
  EXPECT_TRUE(has(r, fg::ViolationKind::PriorSum));
  EXPECT_TRUE(has(r, fg::ViolationKind::InvalidCost));
}

TEST(Validation, BijectionAndTies) {
  auto shared = fg::GameSpec({"s1", "s2"}, {"m1", "m2"}, {0.5, 0.5}, {{10, 10}, {0, 0}},
                             {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}, fg::CostParams{1, 2, 0.5, 0.9});
  EXPECT_TRUE(has(fg::validate_spec(shared), fg::ViolationKind::BijectionViolation));
  auto tied = fg::GameSpec({"s1"}, {"m1", "m2"}, {1.0}, {{10}, {10}}, {{{0}, {0}}, {{0}, {0}}},
                           fg::CostParams{1, 2, 0.5, 0.9});
  EXPECT_TRUE(has(fg::validate_spec(tied), fg::ViolationKind::AmbiguousArgmax));
  EXPECT_THROW(fg::require_valid(tied), fg::SpecError);
}

TEST(Validation, GapAssumption) {
  // P_A = 1.5 lies in [c, c + c/beta] = [1, 2.11].
  auto gap = fg::GameSpec({"s1"}, {"m1"}, {1.0}, {{1.5}}, {{{0}}}, fg::CostParams{1, 2, 0.5, 0.9});
  EXPECT_TRUE(has(fg::validate_spec(gap), fg::ViolationKind::GapAssumptionViolation));
}

TEST(Validation, LabelsMustBeUniqueAndNulFree) {
  auto dup = fg::GameSpec({"s", "s"}, {"m1", "m2"}, {0.5, 0.5}, {{10, 0}, {0, 10}},
                          {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}, fg::CostParams{1, 2, 0.5, 0.9});
  EXPECT_TRUE(has(fg::validate_spec(dup), fg::ViolationKind::DuplicateLabel));
  auto nul = fg::GameSpec({"s1"}, {std::string("m\0x", 3)}, {1.0}, {{10}}, {{{0}}}, fg::CostParams{1, 2, 0.5, 0.9});
  EXPECT_TRUE(has(fg::validate_spec(nul), fg::ViolationKind::InvalidLabel));
}

TEST(BestResponse, G1Messages) {
  const auto g = g1();
  EXPECT_EQ(fg::honest_message(g, 0), 0u);
  EXPECT_EQ(fg::honest_message(g, 1), 1u);
  EXPECT_EQ(fg::attacker_counter(g, 0), 0u);
  EXPECT_EQ(fg::attacker_counter(g, 1), 1u);
  EXPECT_DOUBLE_EQ(fg::honest_value(g, 0), 10.0);
  EXPECT_DOUBLE_EQ(fg::attacker_value(g, 0), 8.0);
}

TEST(Benchmark, G1Profile) {
  const auto g = g1();
  const auto out = fg::solve_benchmark(g);
  EXPECT_EQ(out.classification, fg::Classification::Attack);
  for (fg::StateIndex s = 0; s < 2; ++s) {
    EXPECT_EQ(out.a_action[s], s);
    EXPECT_EQ(out.b_action[s], s);
    EXPECT_DOUBLE_EQ(out.per_state_payoffs[s].a, 0.5 * 10 - 1);
    EXPECT_DOUBLE_EQ(out.per_state_payoffs[s].b, 0.5 * 8 - 2);
  }
  EXPECT_DOUBLE_EQ(out.expected_payoff_a(g), 4.0);
  EXPECT_DOUBLE_EQ(out.expected_payoff_b(g), 2.0);
}

TEST(Benchmark, BoundaryResolvesToNoAttack) {
  // q * P_B = 0.5 * 8 = f exactly.
  const auto g = g1({1.0, 4.0, 0.5, 0.9});
  const auto closed = fg::solve_benchmark(g);
  const auto tree = fg::oracle_backward_induction(g);
  EXPECT_FALSE(closed.b_action[0].has_value());
  EXPECT_FALSE(tree.b_action[0].has_value());
  EXPECT_EQ(closed.classification, fg::Classification::NoEngagement);
}

TEST(Benchmark, LegitimateCompetition) {
  // B's counter pays in every state, so a blind counter beats f.
  const auto g = fg::GameSpec::tabulate(
      {"s1", "s2"}, {"m1", "m2"}, {0.5, 0.5}, fg::CostParams{1.0, 2.0, 0.5, 0.9},
      [](std::size_t m, std::size_t s) { return m == s ? 10.0 : 0.0; },
      [](std::size_t b, std::size_t, std::size_t) { return b == 0 ? 12.0 : 0.0; });
  EXPECT_EQ(fg::classify_interaction(g), fg::Classification::LegitimateCompetition);
}

TEST(Benchmark, UninformedValuesG1) {
  const auto v = fg::uninformed_counter_values(g1());
  EXPECT_DOUBLE_EQ(v[0], 2.0);
  EXPECT_DOUBLE_EQ(v[1], 2.0);
}

TEST(BenchmarkProperty, MatchesBackwardInductionOnRandomGames) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto spec = fg::testing::random_spec(rng);
    const auto closed = fg::solve_benchmark(spec);
    const auto tree = fg::oracle_backward_induction(spec);
    for (fg::StateIndex s = 0; s < spec.num_states(); ++s) {
      ASSERT_EQ(closed.a_action[s], tree.a_action[s]) << "draw " << i;
      ASSERT_EQ(closed.b_action[s], tree.b_action[s]) << "draw " << i;
      ASSERT_EQ(closed.per_state_payoffs[s], tree.per_state_payoffs[s]) << "draw " << i;
    }
  }
}

TEST(BenchmarkProperty, AttackerNeverLosesInEquilibrium) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    const auto spec = fg::testing::random_spec(rng);
    const auto out = fg::solve_benchmark(spec);
    for (const auto& p : out.per_state_payoffs) {
      EXPECT_GE(p.a, 0.0);
      EXPECT_GE(p.b, 0.0);
    }
  }
}

TEST(Oracle, SizeLimit) {
  std::vector<std::string> states, messages;
  for (int i = 0; i < 9; ++i) {
    states.push_back("s" + std::to_string(i));
    messages.push_back("m" + std::to_string(i));
  }
  std::vector<double> prior(9, 1.0 / 9);
  const auto g = fg::GameSpec::tabulate(states, messages, prior, fg::CostParams{}, [](auto m, auto s) { return m == s ? 10.0 : 0.0; },
                                        [](auto, auto, auto) { return 0.0; });
  EXPECT_THROW(fg::oracle_backward_induction(g), fg::SizeLimit);
}

TEST(Oracle, BackwardInductionPicksFirstOnTies) {
  fg::GameTree t;
  const auto root = t.add_decision(0);
  t.connect(root, std::nullopt, t.add_leaf(1.0, 0.0));
  t.connect(root, 0, t.add_leaf(1.0, 5.0));
  const auto sol = fg::backward_induction(t);
  EXPECT_EQ(sol.choice[root], 0u);
}
