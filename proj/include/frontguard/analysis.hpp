#pragma once

// Commit-reveal equilibrium objects: the guessing value of a blind commit,
// the hard/easy regime split, honest payoffs under the protocol, the
// strengthened participation condition, multi-message commits and the
// obfuscation threshold.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "frontguard/error.hpp"
#include "frontguard/game.hpp"

namespace frontguard {

enum class GuessingRegime { Hard, Easy };

inline const char* to_string(GuessingRegime r) { return r == GuessingRegime::Hard ? "GuessingHard" : "GuessingEasy"; }

struct ProtocolRegime {
  double pi = 0.0;
  double threshold = 0.0;  // c / beta
  GuessingRegime regime = GuessingRegime::Hard;
  MessageIndex best_commit = 0;
};

// Equality counts as hard.
inline GuessingRegime classify_regime(double pi, double threshold) {
  return pi <= threshold ? GuessingRegime::Hard : GuessingRegime::Easy;
}

namespace detail {

// Per-message net values of a blind commit, restricted to the states where A
// commits and weighted by the prior renormalized to that event.
struct GuessingTable {
  std::vector<StateIndex> states;
  std::vector<double> weight;
  std::vector<std::vector<double>> value;  // [message][i]
};

inline std::optional<GuessingTable> try_guessing_table(const GameSpec& spec) {
  const auto& k = spec.costs();
  GuessingTable table;
  double mass = 0.0;
  std::vector<MessageIndex> sent;
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    if (auto m = unthreatened_message(spec, s)) {
      table.states.push_back(s);
      sent.push_back(*m);
      mass += spec.prior(s);
    }
  }
  if (table.states.empty() || mass <= 0.0) return std::nullopt;
  for (StateIndex s : table.states) table.weight.push_back(spec.prior(s) / mass);
  table.value.assign(spec.num_messages(), std::vector<double>(table.states.size()));
  for (MessageIndex b = 0; b < spec.num_messages(); ++b)
    for (std::size_t i = 0; i < table.states.size(); ++i)
      table.value[b][i] = std::max(k.q * spec.payoff_b(b, sent[i], table.states[i]) - k.f, 0.0);
  return table;
}

inline GuessingTable guessing_table(const GameSpec& spec) {
  auto table = try_guessing_table(spec);
  if (!table) throw NoParticipation("A never commits, so the guessing value is undefined");
  return std::move(*table);
}

// Expected value of committing every message in `chosen` and revealing the
// best one after A's reveal.
template <class Messages>
double committed_set_value(const GuessingTable& table, const Messages& chosen) {
  double total = 0.0;
  for (std::size_t i = 0; i < table.states.size(); ++i) {
    double best = 0.0;
    for (MessageIndex b : chosen) best = std::max(best, table.value[b][i]);
    total += table.weight[i] * best;
  }
  return total;
}

inline std::vector<MessageIndex> mask_members(std::uint32_t mask) {
  std::vector<MessageIndex> out;
  for (MessageIndex b = 0; mask != 0; ++b, mask >>= 1)
    if (mask & 1u) out.push_back(b);
  return out;
}

}  // namespace detail

// B's best expected continuation from one blind commit, conditional on A committing.
inline ProtocolRegime guessing_value(const GameSpec& spec) {
  const auto table = detail::guessing_table(spec);
  ProtocolRegime out;
  out.threshold = discount_threshold(spec.costs());
  out.pi = -1.0;
  for (MessageIndex b = 0; b < spec.num_messages(); ++b) {
    const MessageIndex single[] = {b};
    const double v = detail::committed_set_value(table, single);
    if (v > out.pi) {
      out.pi = v;
      out.best_commit = b;
    }
  }
  out.regime = classify_regime(out.pi, out.threshold);
  return out;
}

// A's payoff from commit + reveal when nobody front-runs her.
inline double honest_protocol_payoff(const GameSpec& spec, StateIndex s) {
  const auto& k = spec.costs();
  return std::max(-k.c + k.beta * (honest_value(spec, s) - k.c), 0.0);
}

struct StrongCondition {
  bool holds = true;
  std::optional<MessageIndex> violated_by;
  double max_lhs = 0.0;
  double rhs = 0.0;  // f + c / beta
};

// Does every uninformed counter stay unprofitable once it has to pay for the
// protocol as well? Reports the first violating message.
inline StrongCondition check_strong_condition(const GameSpec& spec) {
  StrongCondition out;
  out.rhs = spec.costs().f + discount_threshold(spec.costs());
  const auto values = uninformed_counter_values(spec);
  out.max_lhs = *std::max_element(values.begin(), values.end());
  for (MessageIndex b = 0; b < values.size(); ++b) {
    if (values[b] > out.rhs) {
      out.holds = false;
      out.violated_by = b;
      break;
    }
  }
  return out;
}

struct MultiCommitPlan {
  std::size_t k_star = 1;
  std::vector<double> pi_of_k;  // pi(1) .. pi(k_star + 1)
  std::vector<MessageIndex> chosen_set;
  bool approximate = false;      // greedy selection was used
  bool worth_committing = false;  // beta * pi(k_star) > k_star * c
};

inline constexpr std::size_t kExactSubsetLimit = 12;

// pi(k) for k = 1..k_max+1 (or fewer if the stopping rule fires first) and
// the smallest k whose next marginal falls below c.
inline MultiCommitPlan plan_multi_commit(const GameSpec& spec, std::size_t k_max) {
  if (k_max < 1) throw Error("k_max must be at least 1");
  const auto table = detail::guessing_table(spec);
  const std::size_t nm = spec.num_messages();
  const double c = spec.costs().c;

  MultiCommitPlan plan;
  std::vector<double> best_value(nm + 1, -1.0);
  std::vector<std::vector<MessageIndex>> best_set(nm + 1);

  if (nm <= kExactSubsetLimit) {
    const std::uint32_t full = (1u << nm) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      const auto members = detail::mask_members(mask);
      const double v = detail::committed_set_value(table, members);
      const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
      if (v > best_value[size]) {
        best_value[size] = v;
        best_set[size] = members;
      }
    }
  } else {
    plan.approximate = true;
    std::vector<MessageIndex> chain;
    std::vector<bool> used(nm, false);
    for (std::size_t size = 1; size <= nm; ++size) {
      double gain = -1.0;
      MessageIndex pick = 0;
      for (MessageIndex b = 0; b < nm; ++b) {
        if (used[b]) continue;
        chain.push_back(b);
        const double v = detail::committed_set_value(table, chain);
        chain.pop_back();
        if (v > gain) {
          gain = v;
          pick = b;
        }
      }
      used[pick] = true;
      chain.push_back(pick);
      best_value[size] = gain;
      best_set[size] = chain;
    }
  }

  auto pi = [&](std::size_t k) { return best_value[std::min(k, nm)]; };
  std::size_t k = 1;
  plan.pi_of_k.push_back(pi(1));
  while (true) {
    plan.pi_of_k.push_back(pi(k + 1));
    if (pi(k + 1) - pi(k) < c || k >= k_max) break;
    ++k;
  }
  plan.k_star = k;
  plan.chosen_set = best_set[std::min(k, nm)];
  plan.worth_committing = spec.costs().beta * pi(k) > static_cast<double>(k) * c;
  return plan;
}

struct HidingAssessment {
  std::size_t n = 1;
  double tau = 0.0;
  double pi = 0.0;
  double threshold = 0.0;
  bool attack_deterred = true;
};

// With obfuscated commits B only sees that some fraction tau of the n
// contracts received a commitment; a blind commit to one of them is worth
// tau * pi.
inline HidingAssessment assess_hiding(const GameSpec& spec, double tau, std::size_t n = 1) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must lie in [0, 1]");
  HidingAssessment out;
  out.n = n;
  out.tau = tau;
  out.threshold = discount_threshold(spec.costs());
  if (detail::try_guessing_table(spec)) out.pi = guessing_value(spec).pi;
  out.attack_deterred = tau * out.pi <= out.threshold;
  return out;
}

}  // namespace frontguard
