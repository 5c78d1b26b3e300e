#pragma once

// Game primitives and the benchmark (no-protocol) front-running game.
//
// A honest sender (A) privately learns a state and, if she sends, sends the
// message maximizing her own benefit. An observer (B) sees that message in the
// mempool and may answer with a fast counter-message that lands first with
// probability q. Everything here is a pure function of an immutable GameSpec.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "frontguard/error.hpp"

namespace frontguard {

using StateIndex = std::size_t;
using MessageIndex = std::size_t;

// A message choice; std::nullopt means "send nothing".
using Action = std::optional<MessageIndex>;

struct CostParams {
  double c = 1.0;     // regular message fee
  double f = 2.0;     // fast message fee
  double q = 0.5;     // probability a fast message lands ahead of its victim
  double beta = 1.0;  // one-block discount factor
};

// c / beta, with beta == 0 mapped to +infinity (a fully discounted future is
// never worth a commit).
inline double discount_threshold(const CostParams& costs) {
  if (costs.beta <= 0.0) return std::numeric_limits<double>::infinity();
  return costs.c / costs.beta;
}

class GameSpec {
 public:
  GameSpec() = default;

  // payoff_a is indexed [message][state]; payoff_b is [b_message][a_message][state].
  GameSpec(std::vector<std::string> states, std::vector<std::string> messages,
           std::vector<double> prior, const std::vector<std::vector<double>>& payoff_a,
           const std::vector<std::vector<std::vector<double>>>& payoff_b, CostParams costs)
      : states_(std::move(states)),
        messages_(std::move(messages)),
        prior_(std::move(prior)),
        costs_(costs) {
    const std::size_t ns = states_.size();
    const std::size_t nm = messages_.size();
    if (payoff_a.size() != nm) throw SpecError("payoff_a must have one row per message");
    payoff_a_.reserve(nm * ns);
    for (const auto& row : payoff_a) {
      if (row.size() != ns) throw SpecError("payoff_a rows must have one entry per state");
      payoff_a_.insert(payoff_a_.end(), row.begin(), row.end());
    }
    if (payoff_b.size() != nm) throw SpecError("payoff_b must have one block per counter-message");
    payoff_b_.reserve(nm * nm * ns);
    for (const auto& block : payoff_b) {
      if (block.size() != nm) throw SpecError("payoff_b blocks must have one row per message");
      for (const auto& row : block) {
        if (row.size() != ns) throw SpecError("payoff_b rows must have one entry per state");
        payoff_b_.insert(payoff_b_.end(), row.begin(), row.end());
      }
    }
  }

  // Builds dense tables from callables fa(m, s) and fb(b, a, s).
  template <class FA, class FB>
  static GameSpec tabulate(std::vector<std::string> states, std::vector<std::string> messages,
                           std::vector<double> prior, CostParams costs, FA&& fa, FB&& fb) {
    const std::size_t ns = states.size();
    const std::size_t nm = messages.size();
    std::vector<std::vector<double>> pa(nm, std::vector<double>(ns));
    std::vector<std::vector<std::vector<double>>> pb(
        nm, std::vector<std::vector<double>>(nm, std::vector<double>(ns)));
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t s = 0; s < ns; ++s) pa[m][s] = fa(m, s);
    for (std::size_t b = 0; b < nm; ++b)
      for (std::size_t a = 0; a < nm; ++a)
        for (std::size_t s = 0; s < ns; ++s) pb[b][a][s] = fb(b, a, s);
    return GameSpec(std::move(states), std::move(messages), std::move(prior), pa, pb, costs);
  }

  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_messages() const noexcept { return messages_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<std::string>& messages() const noexcept { return messages_; }
  const std::vector<double>& prior() const noexcept { return prior_; }
  double prior(StateIndex s) const { return prior_[s]; }
  const CostParams& costs() const noexcept { return costs_; }

  double payoff_a(MessageIndex m, StateIndex s) const { return payoff_a_[m * num_states() + s]; }
  double payoff_b(MessageIndex b, MessageIndex a, StateIndex s) const {
    return payoff_b_[(b * num_messages() + a) * num_states() + s];
  }

  std::optional<StateIndex> find_state(const std::string& label) const { return find(states_, label); }
  std::optional<MessageIndex> find_message(const std::string& label) const {
    return find(messages_, label);
  }

  GameSpec with_costs(CostParams costs) const {
    GameSpec copy = *this;
    copy.costs_ = costs;
    return copy;
  }

  // Multiplies every payoff_b entry by `factor`.
  GameSpec with_scaled_payoff_b(double factor) const {
    GameSpec copy = *this;
    for (double& v : copy.payoff_b_) v *= factor;
    return copy;
  }

 private:
  static std::optional<std::size_t> find(const std::vector<std::string>& labels,
                                         const std::string& label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
  }

  std::vector<std::string> states_;
  std::vector<std::string> messages_;
  std::vector<double> prior_;
  std::vector<double> payoff_a_;
  std::vector<double> payoff_b_;
  CostParams costs_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  EmptyStates,
  EmptyMessages,
  InvalidLabel,
  DuplicateLabel,
  PriorShape,
  PriorRange,
  PriorSum,
  NonFinitePayoff,
  InvalidCost,
  AmbiguousArgmax,
  BijectionViolation,
  GapAssumptionViolation,
};

inline const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptyStates: return "EmptyStates";
    case ViolationKind::EmptyMessages: return "EmptyMessages";
    case ViolationKind::InvalidLabel: return "InvalidLabel";
    case ViolationKind::DuplicateLabel: return "DuplicateLabel";
    case ViolationKind::PriorShape: return "PriorShape";
    case ViolationKind::PriorRange: return "PriorRange";
    case ViolationKind::PriorSum: return "PriorSum";
    case ViolationKind::NonFinitePayoff: return "NonFinitePayoff";
    case ViolationKind::InvalidCost: return "InvalidCost";
    case ViolationKind::AmbiguousArgmax: return "AmbiguousArgmax";
    case ViolationKind::BijectionViolation: return "BijectionViolation";
    case ViolationKind::GapAssumptionViolation: return "GapAssumptionViolation";
  }
  return "Unknown";
}

struct Violation {
  ViolationKind kind;
  std::string detail;
  std::vector<StateIndex> states;
  std::vector<MessageIndex> messages;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
  }
  const Violation* first(ViolationKind kind) const {
    for (const auto& v : violations)
      if (v.kind == kind) return &v;
    return nullptr;
  }
  std::string summary() const {
    std::ostringstream out;
    for (const auto& v : violations) out << to_string(v.kind) << ": " << v.detail << '\n';
    return out.str();
  }
};

inline constexpr double kPriorSumTolerance = 1e-12;

namespace detail {

inline void check_labels(const std::vector<std::string>& labels, const char* what,
                         ValidationReport& report) {
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (label.empty() || label.find('\0') != std::string::npos) {
      report.violations.push_back({ViolationKind::InvalidLabel,
                                   std::string(what) + " labels must be non-empty and NUL-free",
                                   {}, {}});
    }
    if (!seen.insert(label).second) {
      report.violations.push_back(
          {ViolationKind::DuplicateLabel, std::string("duplicate ") + what + " label '" + label + "'", {}, {}});
    }
  }
}

// Index of the unique maximum, or nullopt on a tie for the maximum.
template <class F>
std::optional<std::size_t> unique_argmax(std::size_t n, F&& value) {
  std::size_t best = 0;
  bool tied = false;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = value(i);
    const double b = value(best);
    if (v > b) {
      best = i;
      tied = false;
    } else if (v == b) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

// Index of the maximum, first index winning ties.
template <class F>
std::size_t first_argmax(std::size_t n, F&& value) {
  std::size_t best = 0;
  double best_value = value(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = value(i);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

}  // namespace detail

inline ValidationReport validate_spec(const GameSpec& spec) {
  ValidationReport report;
  const std::size_t ns = spec.num_states();
  const std::size_t nm = spec.num_messages();
  if (ns == 0) report.violations.push_back({ViolationKind::EmptyStates, "state set is empty", {}, {}});
  if (nm == 0) report.violations.push_back({ViolationKind::EmptyMessages, "message set is empty", {}, {}});
  detail::check_labels(spec.states(), "state", report);
  detail::check_labels(spec.messages(), "message", report);

  const auto& k = spec.costs();
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(k.c) || k.c <= 0.0)
    report.violations.push_back({ViolationKind::InvalidCost, "c must be finite and > 0", {}, {}});
  if (!finite(k.f) || !(k.f > k.c))
    report.violations.push_back({ViolationKind::InvalidCost, "f must be finite and > c", {}, {}});
  if (!finite(k.q) || k.q < 0.0 || k.q > 1.0)
    report.violations.push_back({ViolationKind::InvalidCost, "q must lie in [0, 1]", {}, {}});
  if (!finite(k.beta) || k.beta < 0.0 || k.beta > 1.0)
    report.violations.push_back({ViolationKind::InvalidCost, "beta must lie in [0, 1]", {}, {}});

  if (spec.prior().size() != ns) {
    report.violations.push_back({ViolationKind::PriorShape, "prior must have one weight per state", {}, {}});
  } else if (ns > 0) {
    double sum = 0.0;
    for (StateIndex s = 0; s < ns; ++s) {
      const double p = spec.prior(s);
      if (!finite(p) || p < 0.0 || p > 1.0) {
        report.violations.push_back({ViolationKind::PriorRange,
                                     "prior weight of '" + spec.states()[s] + "' outside [0, 1]", {s}, {}});
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPriorSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "prior sums to " << sum;
      report.violations.push_back({ViolationKind::PriorSum, msg.str(), {}, {}});
    }
  }

  if (ns == 0 || nm == 0) return report;

  bool payoffs_finite = true;
  for (MessageIndex m = 0; m < nm; ++m)
    for (StateIndex s = 0; s < ns; ++s) {
      if (!finite(spec.payoff_a(m, s))) payoffs_finite = false;
      for (MessageIndex a = 0; a < nm; ++a)
        if (!finite(spec.payoff_b(m, a, s))) payoffs_finite = false;
    }
  if (!payoffs_finite) {
    report.violations.push_back({ViolationKind::NonFinitePayoff, "payoff tables contain non-finite entries", {}, {}});
    return report;
  }

  std::vector<std::optional<MessageIndex>> best(ns);
  for (StateIndex s = 0; s < ns; ++s) {
    best[s] = detail::unique_argmax(nm, [&](MessageIndex m) { return spec.payoff_a(m, s); });
    if (!best[s]) {
      report.violations.push_back({ViolationKind::AmbiguousArgmax,
                                   "A's best message in state '" + spec.states()[s] + "' is not unique", {s}, {}});
    }
  }
  for (MessageIndex m = 0; m < nm; ++m) {
    std::vector<StateIndex> sharing;
    for (StateIndex s = 0; s < ns; ++s)
      if (best[s] == m) sharing.push_back(s);
    if (sharing.size() > 1) {
      std::string names;
      for (StateIndex s : sharing) names += (names.empty() ? "'" : ", '") + spec.states()[s] + "'";
      report.violations.push_back({ViolationKind::BijectionViolation,
                                   "states " + names + " share best message '" + spec.messages()[m] + "'",
                                   sharing, {m}});
    }
  }

  if (k.c > 0.0 && k.beta >= 0.0) {
    const double upper = k.c + discount_threshold(k);
    for (StateIndex s = 0; s < ns; ++s) {
      if (!best[s]) continue;
      const double value = spec.payoff_a(*best[s], s);
      if (value >= k.c && value <= upper) {
        std::ostringstream msg;
        msg << "P_A('" << spec.states()[s] << "') = " << value << " lies in [" << k.c << ", " << upper << "]";
        report.violations.push_back({ViolationKind::GapAssumptionViolation, msg.str(), {s}, {*best[s]}});
      }
    }
  }
  return report;
}

inline void require_valid(const GameSpec& spec) {
  const auto report = validate_spec(spec);
  if (!report.ok()) throw SpecError("invalid game spec:\n" + report.summary());
}

// ---------------------------------------------------------------------------
// Best responses

// A's payoff-maximizing message in state s (she is naive about which message,
// strategic about whether to send).
inline MessageIndex honest_message(const GameSpec& spec, StateIndex s) {
  auto best = detail::unique_argmax(spec.num_messages(), [&](MessageIndex m) { return spec.payoff_a(m, s); });
  if (!best) throw AmbiguousArgmax("A's best message in state '" + spec.states()[s] + "' is not unique");
  return *best;
}

// B's best counter after learning s from A's message; ties go to the earlier message.
inline MessageIndex attacker_counter(const GameSpec& spec, StateIndex s) {
  const MessageIndex a = honest_message(spec, s);
  return detail::first_argmax(spec.num_messages(), [&](MessageIndex b) { return spec.payoff_b(b, a, s); });
}

// Best counter restricted to the messages allowed by `allowed` (empty result if none).
template <class Allowed>
std::optional<MessageIndex> attacker_counter_among(const GameSpec& spec, StateIndex s, Allowed&& allowed) {
  const MessageIndex a = honest_message(spec, s);
  std::optional<MessageIndex> best;
  for (MessageIndex b = 0; b < spec.num_messages(); ++b) {
    if (!allowed(b)) continue;
    if (!best || spec.payoff_b(b, a, s) > spec.payoff_b(*best, a, s)) best = b;
  }
  return best;
}

// Benefit to A when her best message executes unopposed.
inline double honest_value(const GameSpec& spec, StateIndex s) {
  return spec.payoff_a(honest_message(spec, s), s);
}

// B's gross prize from a successful best counter.
inline double attacker_value(const GameSpec& spec, StateIndex s) {
  const MessageIndex a = honest_message(spec, s);
  return spec.payoff_b(attacker_counter(spec, s), a, s);
}

// What A sends when she expects no front-running: her best message iff its
// benefit covers the fee (weakly).
inline Action unthreatened_message(const GameSpec& spec, StateIndex s) {
  const MessageIndex m = honest_message(spec, s);
  if (spec.payoff_a(m, s) >= spec.costs().c) return m;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Benchmark equilibrium

enum class Classification { Attack, LegitimateCompetition, NoEngagement };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Attack: return "Attack";
    case Classification::LegitimateCompetition: return "LegitimateCompetition";
    case Classification::NoEngagement: return "NoEngagement";
  }
  return "Unknown";
}

struct StatePayoff {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const StatePayoff&, const StatePayoff&) = default;
};

struct EquilibriumOutcome {
  std::vector<Action> a_action;
  std::vector<Action> b_action;
  Classification classification = Classification::NoEngagement;
  std::vector<StatePayoff> per_state_payoffs;

  double expected_payoff_a(const GameSpec& spec) const {
    double total = 0.0;
    for (StateIndex s = 0; s < per_state_payoffs.size(); ++s) total += spec.prior(s) * per_state_payoffs[s].a;
    return total;
  }
  double expected_payoff_b(const GameSpec& spec) const {
    double total = 0.0;
    for (StateIndex s = 0; s < per_state_payoffs.size(); ++s) total += spec.prior(s) * per_state_payoffs[s].b;
    return total;
  }
};

// q * E_s[payoff_b(b, unthreatened(s), s)] for every counter b, i.e. what B
// could expect from each message if he had to send it without looking.
inline std::vector<double> uninformed_counter_values(const GameSpec& spec) {
  const std::size_t nm = spec.num_messages();
  std::vector<double> values(nm, 0.0);
  std::vector<Action> unthreatened(spec.num_states());
  for (StateIndex s = 0; s < spec.num_states(); ++s) unthreatened[s] = unthreatened_message(spec, s);
  for (MessageIndex b = 0; b < nm; ++b) {
    double expectation = 0.0;
    for (StateIndex s = 0; s < spec.num_states(); ++s)
      if (unthreatened[s]) expectation += spec.prior(s) * spec.payoff_b(b, *unthreatened[s], s);
    values[b] = spec.costs().q * expectation;
  }
  return values;
}

namespace detail {

struct BenchmarkProfile {
  std::vector<Action> a_action;
  std::vector<Action> b_action;
  std::vector<StatePayoff> payoffs;
};

inline BenchmarkProfile benchmark_profile(const GameSpec& spec) {
  const auto& k = spec.costs();
  BenchmarkProfile out;
  const std::size_t ns = spec.num_states();
  out.a_action.resize(ns);
  out.b_action.resize(ns);
  out.payoffs.resize(ns);
  for (StateIndex s = 0; s < ns; ++s) {
    const MessageIndex a = honest_message(spec, s);
    const MessageIndex b = attacker_counter(spec, s);
    const double value_a = spec.payoff_a(a, s);
    const double value_b = spec.payoff_b(b, a, s);
    const bool threatened = k.q * value_b > k.f;
    const bool sends = threatened ? (1.0 - k.q) * value_a > k.c : value_a > k.c;
    if (!sends) continue;
    out.a_action[s] = a;
    if (threatened) {
      out.b_action[s] = b;
      out.payoffs[s] = {(1.0 - k.q) * value_a - k.c, k.q * value_b - k.f};
    } else {
      out.payoffs[s] = {value_a - k.c, 0.0};
    }
  }
  return out;
}

}  // namespace detail

inline Classification classify_interaction(const GameSpec& spec) {
  const auto profile = detail::benchmark_profile(spec);
  const bool b_engages = std::any_of(profile.b_action.begin(), profile.b_action.end(),
                                     [](const Action& a) { return a.has_value(); });
  if (!b_engages) return Classification::NoEngagement;
  const auto values = uninformed_counter_values(spec);
  const double best = *std::max_element(values.begin(), values.end());
  return best <= spec.costs().f ? Classification::Attack : Classification::LegitimateCompetition;
}

// Subgame-perfect profile of the benchmark game. All action conditions are
// strict: equalities resolve to sending nothing.
inline EquilibriumOutcome solve_benchmark(const GameSpec& spec) {
  auto profile = detail::benchmark_profile(spec);
  EquilibriumOutcome out;
  out.a_action = std::move(profile.a_action);
  out.b_action = std::move(profile.b_action);
  out.per_state_payoffs = std::move(profile.payoffs);
  out.classification = classify_interaction(spec);
  return out;
}

}  // namespace frontguard
