#pragma once

// Equilibria of the commit-reveal game.
//
// B observes that A committed (not what), picks a blind commit, and after
// seeing A's reveal fast-reveals iff that is profitable in the revealed state.
// When guessing is hard the no-attack profile is returned directly. Otherwise
// the game is solved by support enumeration on its agent form: one binary
// "commit or not" agent per state for A (her payoff is additive across
// states) against B's {abstain, commit sigma} choice. The literal reduced
// normal form (A's pure strategies = subsets of states) is exposed as well so
// the two can be cross-checked on small games.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "frontguard/analysis.hpp"
#include "frontguard/bimatrix.hpp"
#include "frontguard/error.hpp"
#include "frontguard/game.hpp"

namespace frontguard {

// mask[m] == true: message m is only valid through commit-reveal.
using MessageMask = std::vector<bool>;

inline MessageMask all_messages(const GameSpec& spec) { return MessageMask(spec.num_messages(), true); }

enum class HonestPath { Abstain, Direct, CommitReveal };

inline const char* to_string(HonestPath p) {
  switch (p) {
    case HonestPath::Abstain: return "abstain";
    case HonestPath::Direct: return "direct";
    case HonestPath::CommitReveal: return "commit_reveal";
  }
  return "unknown";
}

// B's best fast follow-up after seeing A's reveal, given what he committed.
struct FollowUp {
  double value = 0.0;  // q * prize - f
  MessageIndex message = 0;
  bool via_commit = false;
  bool attacks() const noexcept { return value > 0.0; }
};

struct ProtocolGame {
  std::vector<MessageIndex> commit_messages;  // action k >= 1 commits commit_messages[k-1]
  std::vector<StateIndex> states;             // states where A's message needs commit-reveal
  std::vector<double> weight;                 // prior of those states
  std::vector<std::vector<FollowUp>> follow_up;         // [action][i]
  std::vector<std::vector<double>> attacker_gain;       // [action][i]
  std::vector<double> honest_base;  // -c + beta (P_A - c): A's commit payoff if never attacked
  std::vector<double> honest_loss;  // beta q P_A: lost when attacked

  std::size_t num_actions() const noexcept { return commit_messages.size() + 1; }

  double attack_probability(std::size_t i, const std::vector<double>& mix) const {
    double p = 0.0;
    for (std::size_t a = 0; a < mix.size(); ++a)
      if (follow_up[a][i].attacks()) p += mix[a];
    return p;
  }
  double honest_commit_payoff(std::size_t i, const std::vector<double>& mix) const {
    return honest_base[i] - honest_loss[i] * attack_probability(i, mix);
  }
  double attacker_payoff(std::size_t action, const std::vector<double>& commit_prob) const {
    double u = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) u += weight[i] * commit_prob[i] * attacker_gain[action][i];
    return u;
  }
};

struct DirectOutcome {
  bool sends = false;
  std::optional<MessageIndex> counter;  // B's fast counter, if he attacks
  double payoff_a = 0.0;
  double payoff_b = 0.0;
};

struct ProtocolEquilibrium {
  std::vector<double> commit_probability;  // per state, CommitReveal states only
  std::vector<double> attacker_mix;        // [0] abstain, [k] commit commit_messages[k-1]
  double attacker_commit_probability = 0.0;  // unconditional
  double attack_probability = 0.0;           // unconditional
  double honest_payoff = 0.0;
  double attacker_payoff = 0.0;
};

struct ProtocolSolution {
  GuessingRegime regime = GuessingRegime::Hard;
  double pi = 0.0;
  double threshold = 0.0;
  std::vector<HonestPath> path;  // per state
  std::vector<DirectOutcome> direct;  // per state, meaningful for Direct paths
  ProtocolGame game;
  std::vector<ProtocolEquilibrium> equilibria;
};

inline ProtocolGame build_protocol_game(const GameSpec& spec, const MessageMask& protocol_messages) {
  const auto& k = spec.costs();
  ProtocolGame g;
  for (MessageIndex m = 0; m < spec.num_messages(); ++m)
    if (protocol_messages[m]) g.commit_messages.push_back(m);
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    auto sent = unthreatened_message(spec, s);
    if (!sent || !protocol_messages[*sent]) continue;
    g.states.push_back(s);
    g.weight.push_back(spec.prior(s));
    const double value_a = spec.payoff_a(*sent, s);
    g.honest_base.push_back(-k.c + k.beta * (value_a - k.c));
    g.honest_loss.push_back(k.beta * k.q * value_a);
  }
  const std::size_t na = g.num_actions();
  g.follow_up.assign(na, std::vector<FollowUp>(g.states.size()));
  g.attacker_gain.assign(na, std::vector<double>(g.states.size()));
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    const StateIndex s = g.states[i];
    const MessageIndex a_msg = honest_message(spec, s);
    std::optional<FollowUp> direct;
    for (MessageIndex b = 0; b < spec.num_messages(); ++b) {
      if (protocol_messages[b]) continue;
      const double v = k.q * spec.payoff_b(b, a_msg, s) - k.f;
      if (!direct || v > direct->value) direct = FollowUp{v, b, false};
    }
    for (std::size_t action = 0; action < na; ++action) {
      std::optional<FollowUp> best;
      if (action > 0) {
        const MessageIndex b = g.commit_messages[action - 1];
        best = FollowUp{k.q * spec.payoff_b(b, a_msg, s) - k.f, b, true};
      }
      if (direct && (!best || direct->value > best->value)) best = direct;
      FollowUp chosen = best.value_or(FollowUp{-k.f, 0, false});
      g.follow_up[action][i] = chosen;
      g.attacker_gain[action][i] = (action > 0 ? -k.c : 0.0) + k.beta * std::max(chosen.value, 0.0);
    }
  }
  return g;
}

// Reduced normal form: rows are subsets of the protocol states (bit i set =
// A commits in states[i]), columns are B's actions.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> reduced_normal_form(const ProtocolGame& g) {
  const std::size_t np = g.states.size();
  if (np > 12) throw SizeLimit("reduced normal form limited to 12 protocol states");
  const std::size_t rows = std::size_t{1} << np;
  Eigen::MatrixXd honest(rows, g.num_actions());
  Eigen::MatrixXd attacker(rows, g.num_actions());
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t a = 0; a < g.num_actions(); ++a) {
      double ua = 0.0, ub = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        if (!(t >> i & 1u)) continue;
        const double attacked = g.follow_up[a][i].attacks() ? 1.0 : 0.0;
        ua += g.weight[i] * (g.honest_base[i] - g.honest_loss[i] * attacked);
        ub += g.weight[i] * g.attacker_gain[a][i];
      }
      honest(t, a) = ua;
      attacker(t, a) = ub;
    }
  }
  return {honest, attacker};
}

namespace detail {

// Least-squares solve that reports whether the system is actually consistent.
inline bool solve_consistent(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, Eigen::VectorXd& out,
                             double tol) {
  if (m.rows() == m.cols()) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.isInvertible()) {
      out = lu.solve(rhs);
      return true;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  out = cod.solve(rhs);
  return (m * out - rhs).cwiseAbs().maxCoeff() <= tol;
}

inline void fill_summary(const ProtocolGame& g, const std::vector<double>& x, ProtocolEquilibrium& eq) {
  eq.attacker_commit_probability = 0.0;
  eq.attack_probability = 0.0;
  eq.honest_payoff = 0.0;
  eq.attacker_payoff = 0.0;
  const double commit_mass = 1.0 - eq.attacker_mix[0];
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    const double w = g.weight[i] * x[i];
    eq.attacker_commit_probability += w * commit_mass;
    eq.attack_probability += w * g.attack_probability(i, eq.attacker_mix);
    eq.honest_payoff += w * g.honest_commit_payoff(i, eq.attacker_mix);
  }
  for (std::size_t a = 0; a < g.num_actions(); ++a) eq.attacker_payoff += eq.attacker_mix[a] * g.attacker_payoff(a, x);
}

}  // namespace detail

inline std::vector<ProtocolEquilibrium> enumerate_agent_equilibria(const ProtocolGame& g, std::size_t num_states,
                                                                   double tol = 1e-9) {
  const std::size_t na = g.num_actions();
  const std::size_t np = g.states.size();
  if (na > 13 || np > 12) throw SizeLimit("protocol game too large for support enumeration");

  std::vector<ProtocolEquilibrium> found;
  auto duplicate = [&](const std::vector<double>& x, const std::vector<double>& y) {
    for (const auto& e : found) {
      bool same = true;
      for (std::size_t i = 0; i < np && same; ++i)
        same = std::abs(e.commit_probability[g.states[i]] - x[i]) < 1e-7;
      for (std::size_t a = 0; a < na && same; ++a) same = std::abs(e.attacker_mix[a] - y[a]) < 1e-7;
      if (same) return true;
    }
    return false;
  };

  for (std::uint32_t ymask = 1; ymask < (1u << na); ++ymask) {
    const auto support = detail::mask_members(ymask);
    const std::size_t ky = support.size();
    for (std::size_t ki = 0; ki < ky && ki <= np; ++ki) {
      auto visit = [&](const std::vector<std::size_t>& mixed) {
        // B's mix must leave every mixed-state agent of A indifferent.
        Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ki + 1), static_cast<Eigen::Index>(ky));
        Eigen::VectorXd r1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ki + 1));
        for (std::size_t j = 0; j < ky; ++j) m1(0, j) = 1.0;
        r1(0) = 1.0;
        for (std::size_t r = 0; r < ki; ++r) {
          const std::size_t i = mixed[r];
          if (g.honest_loss[i] <= 0.0) return;
          for (std::size_t j = 0; j < ky; ++j) m1(r + 1, j) = g.follow_up[support[j]][i].attacks() ? 1.0 : 0.0;
          r1(r + 1) = g.honest_base[i] / g.honest_loss[i];
        }
        Eigen::VectorXd ys;
        if (!detail::solve_consistent(m1, r1, ys, tol)) return;
        if (ys.minCoeff() < -tol) return;
        std::vector<double> y(na, 0.0);
        for (std::size_t j = 0; j < ky; ++j) y[support[j]] = std::max(0.0, ys(j));

        std::vector<double> x(np, 0.0);
        std::vector<bool> is_mixed(np, false);
        for (std::size_t i : mixed) is_mixed[i] = true;
        for (std::size_t i = 0; i < np; ++i) {
          if (is_mixed[i]) continue;
          const double h = g.honest_commit_payoff(i, y);
          if (h > tol) x[i] = 1.0;
          else if (h < -tol) x[i] = 0.0;
          else return;  // indifferent state outside the mixed set: covered by another candidate
        }

        // A's mixing must leave B indifferent across his support.
        Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ky), static_cast<Eigen::Index>(ki + 1));
        Eigen::VectorXd r2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ky));
        for (std::size_t j = 0; j < ky; ++j) {
          const std::size_t a = support[j];
          for (std::size_t r = 0; r < ki; ++r) m2(j, r) = g.weight[mixed[r]] * g.attacker_gain[a][mixed[r]];
          m2(j, ki) = -1.0;
          r2(j) = -g.attacker_payoff(a, x);
        }
        Eigen::VectorXd xs;
        if (!detail::solve_consistent(m2, r2, xs, tol)) return;
        for (std::size_t r = 0; r < ki; ++r) {
          if (xs(r) < -tol || xs(r) > 1.0 + tol) return;
          x[mixed[r]] = std::clamp(xs(r), 0.0, 1.0);
        }
        const double v = xs(ki);
        for (std::size_t a = 0; a < na; ++a) {
          const double u = g.attacker_payoff(a, x);
          if (u > v + tol) return;
        }
        for (std::size_t i : mixed)
          if (std::abs(g.honest_commit_payoff(i, y)) > tol) return;
        if (duplicate(x, y)) return;

        ProtocolEquilibrium eq;
        eq.commit_probability.assign(num_states, 0.0);
        for (std::size_t i = 0; i < np; ++i) eq.commit_probability[g.states[i]] = x[i];
        eq.attacker_mix = y;
        detail::fill_summary(g, x, eq);
        found.push_back(std::move(eq));
      };
      if (ki == 0) {
        visit({});
      } else {
        detail::for_each_combination(np, ki, visit);
      }
    }
  }
  return found;
}

// Profile where B never commits and A commits in every state where the
// protocol still pays: -c + beta (P_A - c) > 0.
inline ProtocolEquilibrium no_attack_profile(const ProtocolGame& g, std::size_t num_states) {
  ProtocolEquilibrium eq;
  eq.commit_probability.assign(num_states, 0.0);
  std::vector<double> x(g.states.size(), 0.0);
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    x[i] = g.honest_base[i] > 0.0 ? 1.0 : 0.0;
    eq.commit_probability[g.states[i]] = x[i];
  }
  eq.attacker_mix.assign(g.num_actions(), 0.0);
  eq.attacker_mix[0] = 1.0;
  detail::fill_summary(g, x, eq);
  return eq;
}

inline ProtocolSolution solve_protocol_equilibrium(const GameSpec& spec, const MessageMask& protocol_messages) {
  if (protocol_messages.size() != spec.num_messages()) throw Error("protocol message mask has the wrong size");
  const auto& k = spec.costs();
  ProtocolSolution out;
  out.threshold = discount_threshold(k);
  if (detail::try_guessing_table(spec)) out.pi = guessing_value(spec).pi;
  out.regime = classify_regime(out.pi, out.threshold);
  out.game = build_protocol_game(spec, protocol_messages);

  const std::size_t ns = spec.num_states();
  out.path.assign(ns, HonestPath::Abstain);
  out.direct.assign(ns, DirectOutcome{});
  for (StateIndex s : out.game.states) out.path[s] = HonestPath::CommitReveal;

  double direct_a = 0.0, direct_b = 0.0, direct_attack = 0.0;
  for (StateIndex s = 0; s < ns; ++s) {
    if (out.path[s] == HonestPath::CommitReveal) continue;
    const MessageIndex a = honest_message(spec, s);
    if (protocol_messages[a]) continue;  // below the participation bar
    const double value_a = spec.payoff_a(a, s);
    auto counter = attacker_counter_among(spec, s, [&](MessageIndex b) { return !protocol_messages[b]; });
    const bool threatened = counter && k.q * spec.payoff_b(*counter, a, s) > k.f;
    const bool sends = threatened ? (1.0 - k.q) * value_a > k.c : value_a > k.c;
    if (!sends) continue;
    DirectOutcome& d = out.direct[s];
    d.sends = true;
    out.path[s] = HonestPath::Direct;
    if (threatened) {
      d.counter = counter;
      d.payoff_a = (1.0 - k.q) * value_a - k.c;
      d.payoff_b = k.q * spec.payoff_b(*counter, a, s) - k.f;
      direct_attack += spec.prior(s);
    } else {
      d.payoff_a = value_a - k.c;
    }
    direct_a += spec.prior(s) * d.payoff_a;
    direct_b += spec.prior(s) * d.payoff_b;
  }

  const bool full_protocol = std::all_of(protocol_messages.begin(), protocol_messages.end(), [](bool b) { return b; });
  if (full_protocol && out.regime == GuessingRegime::Hard) {
    out.equilibria.push_back(no_attack_profile(out.game, ns));
  } else {
    out.equilibria = enumerate_agent_equilibria(out.game, ns);
    if (out.equilibria.empty()) throw Error("support enumeration found no equilibrium (degenerate protocol game)");
  }
  for (auto& eq : out.equilibria) {
    eq.honest_payoff += direct_a;
    eq.attacker_payoff += direct_b;
    eq.attack_probability += direct_attack;
  }
  return out;
}

inline ProtocolSolution solve_protocol_equilibrium(const GameSpec& spec) {
  return solve_protocol_equilibrium(spec, all_messages(spec));
}

// The equilibrium in which B commits most often (first one on ties).
inline std::size_t most_aggressive_equilibrium(const ProtocolSolution& solution) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < solution.equilibria.size(); ++i)
    if (solution.equilibria[i].attacker_commit_probability >
        solution.equilibria[best].attacker_commit_probability + 1e-12)
      best = i;
  return best;
}

}  // namespace frontguard
