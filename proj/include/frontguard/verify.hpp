#pragma once

// Solver-vs-oracle checks run by `frontguard verify`.

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "frontguard/bimatrix.hpp"
#include "frontguard/contest.hpp"
#include "frontguard/game.hpp"
#include "frontguard/oracle.hpp"
#include "frontguard/protocol_equilibrium.hpp"
#include "frontguard/scenario.hpp"

namespace frontguard {

struct CheckResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline CheckResult check_benchmark_oracle(const GameSpec& spec) {
  CheckResult r{"benchmark_vs_backward_induction", true, false, {}};
  if (spec.num_states() > 8 || spec.num_messages() > 8) {
    r.skipped = true;
    r.detail = "game larger than the oracle limit";
    return r;
  }
  const auto closed = solve_benchmark(spec);
  const auto tree = oracle_backward_induction(spec);
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    if (closed.a_action[s] != tree.a_action[s] || closed.b_action[s] != tree.b_action[s] ||
        !(closed.per_state_payoffs[s] == tree.per_state_payoffs[s])) {
      r.passed = false;
      r.detail = "profiles differ in state '" + spec.states()[s] + "'";
      return r;
    }
  }
  r.detail = std::to_string(spec.num_states()) + " states agree";
  return r;
}

// Every agent-form equilibrium, spread over subsets as a product
// distribution, must be a Nash equilibrium of the reduced normal form.
inline CheckResult check_protocol_normal_form(const GameSpec& spec, const MessageMask& mask, double tol = 1e-9) {
  CheckResult r{"protocol_equilibria_vs_normal_form", true, false, {}};
  const auto sol = solve_protocol_equilibrium(spec, mask);
  const auto& g = sol.game;
  if (g.states.size() > 10) {
    r.skipped = true;
    r.detail = "too many protocol states for the normal form";
    return r;
  }
  const auto [honest, attacker] = reduced_normal_form(g);
  const std::size_t np = g.states.size();
  for (std::size_t e = 0; e < sol.equilibria.size(); ++e) {
    const auto& eq = sol.equilibria[e];
    Eigen::VectorXd row(honest.rows());
    for (Eigen::Index t = 0; t < honest.rows(); ++t) {
      double p = 1.0;
      for (std::size_t i = 0; i < np; ++i) {
        const double x = eq.commit_probability[g.states[i]];
        p *= (t >> i & 1) ? x : 1.0 - x;
      }
      row(t) = p;
    }
    Eigen::VectorXd col(honest.cols());
    for (Eigen::Index a = 0; a < honest.cols(); ++a) col(a) = eq.attacker_mix[static_cast<std::size_t>(a)];
    const double ua = row.dot(honest * col);
    const double ub = row.dot(attacker * col);
    const double best_row = (honest * col).maxCoeff();
    const double best_col = (attacker.transpose() * row).maxCoeff();
    if (best_row > ua + tol || best_col > ub + tol) {
      std::ostringstream msg;
      msg << "equilibrium " << e << " admits a profitable deviation (" << best_row - ua << ", " << best_col - ub << ")";
      r.passed = false;
      r.detail = msg.str();
      return r;
    }
  }
  r.detail = std::to_string(sol.equilibria.size()) + " equilibria are normal-form best responses";
  return r;
}

inline std::vector<double> contest_prizes(const ScenarioConfig& cfg) {
  if (cfg.contest->prize) return {*cfg.contest->prize};
  std::set<double> prizes;
  for (StateIndex s = 0; s < cfg.game.num_states(); ++s) {
    const double p = cfg.game.payoff_b(attacker_counter(cfg.game, s), honest_message(cfg.game, s), s);
    if (p > 0.0) prizes.insert(p);
  }
  return {prizes.begin(), prizes.end()};
}

// Attacker 1 within 5% (0.05 prize when the analytic value is 0), attacker 2 within 0.05 prize of 0.
inline CheckResult check_contest_oracle(const ContestSpec& spec) {
  CheckResult r{"contest_vs_fictitious_play", true, false, {}};
  const auto sol = solve_contest(spec);
  const auto fp = oracle_fictitious_play(spec);
  const double expected1 = sol.payoff1;
  const double tol1 = std::abs(expected1) > 1e-9 * spec.prize ? 0.05 * std::abs(expected1) : 0.05 * spec.prize;
  const bool ok1 = std::abs(fp.payoff1 - expected1) <= tol1;
  const bool ok2 = std::abs(fp.payoff2) <= 0.05 * spec.prize;
  std::ostringstream msg;
  msg << "prize " << spec.prize << ": analytic (" << expected1 << ", " << sol.payoff2 << "), oracle (" << fp.payoff1
      << ", " << fp.payoff2 << ")";
  if (fp.non_convergence) msg << " [oracle flagged non-convergence]";
  r.passed = ok1 && ok2;
  r.detail = msg.str();
  return r;
}

inline CheckResult check_commitment_stage(const ContestSpec& spec, double tol = 1e-9) {
  CheckResult r{"commitment_stage_indifference", true, false, {}};
  const auto stage = commitment_stage(spec);
  for (const auto& p : stage.equilibria) {
    if (p.alpha1 == 1.0 && p.alpha2 == 1.0) {
      r.passed = false;
      r.detail = "both attackers commit with probability 1";
      return r;
    }
    if (!p.mixed) continue;
    const double u1 = commit_payoff(stage.values, spec.c, spec.beta, 1, p.alpha2);
    const double u2 = commit_payoff(stage.values, spec.c, spec.beta, 2, p.alpha1);
    if (std::abs(u1) > tol || std::abs(u2) > tol) {
      std::ostringstream msg;
      msg << "mixed profile not indifferent: " << u1 << ", " << u2;
      r.passed = false;
      r.detail = msg.str();
      return r;
    }
  }
  r.detail = std::string(to_string(stage.kind)) + ", " + std::to_string(stage.equilibria.size()) + " equilibria";
  return r;
}

inline VerifyReport verify_scenario(const ScenarioConfig& cfg) {
  VerifyReport rep;
  rep.checks.push_back(check_benchmark_oracle(cfg.game));
  if (cfg.protocol != ProtocolMode::None) rep.checks.push_back(check_protocol_normal_form(cfg.game, cfg.message_mask()));
  if (cfg.contest) {
    for (double prize : contest_prizes(cfg)) {
      const ContestSpec spec = cfg.contest_spec(prize);
      rep.checks.push_back(check_contest_oracle(spec));
      rep.checks.push_back(check_commitment_stage(spec));
    }
  }
  return rep;
}

}  // namespace frontguard
