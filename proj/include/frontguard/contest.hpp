#pragma once

// Two attackers competing for the same victim. Each spends f_i; the bigger
// spender wins the right to attack and succeeds with probability
// gamma_i * q(f_i). Spending is sunk either way.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frontguard/error.hpp"

namespace frontguard {

enum class CurveFamily { Exponential, Power, Custom };

inline const char* to_string(CurveFamily f) {
  switch (f) {
    case CurveFamily::Exponential: return "exponential";
    case CurveFamily::Power: return "power";
    case CurveFamily::Custom: return "custom";
  }
  return "unknown";
}

// Success probability of a front-run as a function of spending.
class SuccessCurve {
 public:
  // q(f) = q_max (1 - exp(-lambda f))
  static SuccessCurve exponential(double q_max, double lambda) {
    if (!(q_max > 0.0 && q_max <= 1.0)) throw Error("exponential curve needs q_max in (0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("exponential curve needs lambda > 0");
    SuccessCurve c;
    c.family_ = CurveFamily::Exponential;
    c.p1_ = q_max;
    c.p2_ = lambda;
    return c;
  }

  // q(f) = min(1, scale f^exponent). Not differentiable where the cap starts to bind.
  static SuccessCurve power(double scale, double exponent) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("power curve needs scale > 0");
    if (!(exponent > 0.0 && exponent < 1.0)) throw Error("power curve needs exponent in (0, 1)");
    SuccessCurve c;
    c.family_ = CurveFamily::Power;
    c.p1_ = scale;
    c.p2_ = exponent;
    return c;
  }

  // Caller promises q(0) = 0, increasing, concave, bounded by sup.
  static SuccessCurve custom(std::function<double(double)> q, std::function<double(double)> dq, double sup) {
    SuccessCurve c;
    c.family_ = CurveFamily::Custom;
    c.q_ = std::move(q);
    c.dq_ = std::move(dq);
    c.p1_ = sup;
    return c;
  }

  CurveFamily family() const noexcept { return family_; }
  double q_max() const noexcept { return family_ == CurveFamily::Power ? 1.0 : p1_; }
  double lambda() const noexcept { return p2_; }
  double scale() const noexcept { return p1_; }
  double exponent() const noexcept { return p2_; }

  double operator()(double f) const {
    if (f <= 0.0) return 0.0;
    switch (family_) {
      case CurveFamily::Exponential: return p1_ * -std::expm1(-p2_ * f);
      case CurveFamily::Power: return std::min(1.0, p1_ * std::pow(f, p2_));
      case CurveFamily::Custom: return q_(f);
    }
    return 0.0;
  }

  double derivative(double f) const {
    switch (family_) {
      case CurveFamily::Exponential: return p1_ * p2_ * std::exp(-p2_ * std::max(f, 0.0));
      case CurveFamily::Power:
        if (f <= 0.0) return std::numeric_limits<double>::infinity();
        if (f >= saturation()) return 0.0;
        return p1_ * p2_ * std::pow(f, p2_ - 1.0);
      case CurveFamily::Custom: return dq_(f);
    }
    return 0.0;
  }

  // Spending level at which the power curve reaches 1.
  double saturation() const { return std::pow(p1_, -1.0 / p2_); }

 private:
  CurveFamily family_ = CurveFamily::Exponential;
  double p1_ = 1.0;
  double p2_ = 1.0;
  std::function<double(double)> q_;
  std::function<double(double)> dq_;
};

struct ContestSpec {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double prize = 1.0;
  SuccessCurve curve = SuccessCurve::exponential(1.0, 1.0);
  double c = 1.0;
  double beta = 1.0;

  double gamma(int i) const { return i == 1 ? gamma1 : gamma2; }

  ContestSpec with_prize(double p) const {
    ContestSpec copy = *this;
    copy.prize = p;
    return copy;
  }
};

inline void validate_contest(const ContestSpec& spec) {
  if (!(spec.gamma2 > 0.0)) throw SpecError("gamma2 must be positive");
  if (!(spec.gamma1 >= spec.gamma2)) throw SpecError("gamma1 must be at least gamma2 (attacker 1 is the strong one)");
  if (!(spec.prize > 0.0) || !std::isfinite(spec.prize)) throw SpecError("prize must be positive");
  if (spec.gamma1 * spec.curve.q_max() > 1.0 + 1e-12)
    throw SpecError("gamma1 * q(f) can exceed 1; success must stay a probability");
  if (!(spec.c > 0.0)) throw SpecError("c must be positive");
  if (!(spec.beta >= 0.0 && spec.beta <= 1.0)) throw SpecError("beta must lie in [0, 1]");
}

namespace detail {

// Maximizer of a unimodal function on [lo, hi].
template <class F>
double golden_section_max(F&& fn, double lo, double hi, double tol = 1e-9) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    }
  }
  return 0.5 * (a + b);
}

inline double initial_bracket(const ContestSpec& spec) {
  return spec.prize * std::max(spec.gamma1, spec.gamma2) * spec.curve.q_max() + 1.0;
}

}  // namespace detail

// Net value of spending f when unopposed.
inline double solo_net(const ContestSpec& spec, int i, double f) {
  return spec.prize * spec.gamma(i) * spec.curve(f) - f;
}

// Optimal spending of attacker i when the other one is absent.
inline double f_lower(const ContestSpec& spec, int i) {
  const double scale = spec.prize * spec.gamma(i);
  const auto& curve = spec.curve;
  switch (curve.family()) {
    case CurveFamily::Exponential: {
      const double slope0 = scale * curve.q_max() * curve.lambda();
      if (slope0 <= 1.0) return 0.0;
      return std::log(slope0) / curve.lambda();
    }
    case CurveFamily::Power: {
      const double b = curve.exponent();
      const double interior = std::pow(scale * curve.scale() * b, 1.0 / (1.0 - b));
      return std::min(interior, curve.saturation());
    }
    case CurveFamily::Custom: {
      if (scale * curve.derivative(0.0) <= 1.0) return 0.0;
      const double hi = detail::initial_bracket(spec);
      return detail::golden_section_max([&](double f) { return solo_net(spec, i, f); }, 0.0, hi);
    }
  }
  return 0.0;
}

// Spending at which attacker i's unopposed net value falls back to zero.
inline double f_upper(const ContestSpec& spec, int i) {
  const double lo0 = f_lower(spec, i);
  if (lo0 <= 0.0) return 0.0;
  double hi = detail::initial_bracket(spec);
  const double cap = std::ldexp(spec.prize, 20);
  while (solo_net(spec, i, hi) >= 0.0) {
    hi *= 2.0;
    if (hi > cap) throw RootBracketFailure("no sign change of prize*gamma*q(f) - f below 2^20 * prize");
  }
  double lo = lo0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (solo_net(spec, i, mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// V(gamma_i): payoff of attacker i as the only attacker.
inline double solo_value(const ContestSpec& spec, int i) { return solo_net(spec, i, f_lower(spec, i)); }

enum class ContestRegime { PureStrong, MixedOverlap };

inline const char* to_string(ContestRegime r) { return r == ContestRegime::PureStrong ? "PureStrong" : "MixedOverlap"; }

struct ContestSolution {
  double f_lower[2] = {0.0, 0.0};
  double f_upper[2] = {0.0, 0.0};
  double value[2] = {0.0, 0.0};  // V(gamma_1), V(gamma_2)
  double value_contested1 = 0.0; // attacker 1's payoff when both are in the contest
  ContestRegime regime = ContestRegime::PureStrong;
  double payoff1 = 0.0;
  double payoff2 = 0.0;
};

inline ContestSolution solve_contest(const ContestSpec& spec) {
  validate_contest(spec);
  ContestSolution out;
  for (int i = 1; i <= 2; ++i) {
    out.f_lower[i - 1] = f_lower(spec, i);
    out.f_upper[i - 1] = f_upper(spec, i);
    out.value[i - 1] = solo_net(spec, i, out.f_lower[i - 1]);
  }
  if (out.f_lower[0] >= out.f_upper[1]) {
    out.regime = ContestRegime::PureStrong;
    out.payoff1 = out.value[0];
  } else {
    out.regime = ContestRegime::MixedOverlap;
    out.payoff1 = solo_net(spec, 1, out.f_upper[1]);
  }
  out.payoff2 = 0.0;
  out.value_contested1 = out.payoff1;
  return out;
}

// Continuation values feeding the commitment stage.
struct CommitmentValues {
  double solo_strong = 0.0;    // V(gamma_1)
  double solo_weak = 0.0;      // V(gamma_2)
  double shared_strong = 0.0;  // attacker 1 when both committed
  double shared_weak = 0.0;    // attacker 2 when both committed
};

inline CommitmentValues commitment_values(const ContestSolution& s) {
  return {s.value[0], s.value[1], s.value_contested1, s.payoff2};
}

// Expected payoff of attacker `who` (1 or 2) from committing when the other
// commits with probability other_prob. Not committing pays 0.
inline double commit_payoff(const CommitmentValues& v, double c, double beta, int who, double other_prob) {
  const double solo = who == 1 ? v.solo_strong : v.solo_weak;
  const double shared = who == 1 ? v.shared_strong : v.shared_weak;
  return -c + beta * ((1.0 - other_prob) * solo + other_prob * shared);
}

enum class CommitmentCase { StrongOnly, Coordination, NoCommitment };

inline const char* to_string(CommitmentCase k) {
  switch (k) {
    case CommitmentCase::StrongOnly: return "StrongOnly";
    case CommitmentCase::Coordination: return "Coordination";
    case CommitmentCase::NoCommitment: return "NoCommitment";
  }
  return "unknown";
}

struct CommitProfile {
  double alpha1 = 0.0;  // probability attacker 1 commits
  double alpha2 = 0.0;
  bool mixed = false;
};

struct CommitmentStage {
  CommitmentCase kind = CommitmentCase::NoCommitment;
  CommitmentValues values;
  std::vector<CommitProfile> equilibria;
  bool degenerate_indifference = false;  // mixed system had no solution in [0,1]^2
};

inline CommitmentStage commitment_stage(const CommitmentValues& v, double c, double beta) {
  CommitmentStage out;
  out.values = v;
  const double b1 = beta * v.solo_strong;
  const double b2 = beta * v.solo_weak;
  const double bl = beta * v.shared_strong;
  if (bl > c || (b1 > c && c > bl && c > b2)) {
    out.kind = CommitmentCase::StrongOnly;
    out.equilibria.push_back({1.0, 0.0, false});
  } else if (b1 > c && c > bl && b2 > c) {
    out.kind = CommitmentCase::Coordination;
    out.equilibria.push_back({1.0, 0.0, false});
    out.equilibria.push_back({0.0, 1.0, false});
    // Attacker 2 indifferent: beta (1 - a1) V2 = c. Attacker 1: beta ((1 - a2) V1 + a2 VL) = c.
    const double a1 = 1.0 - c / b2;
    const double a2 = (b1 - c) / (b1 - bl);
    if (std::isfinite(a1) && std::isfinite(a2) && a1 >= 0.0 && a1 <= 1.0 && a2 >= 0.0 && a2 <= 1.0)
      out.equilibria.push_back({a1, a2, true});
    else
      out.degenerate_indifference = true;
  } else {
    out.kind = CommitmentCase::NoCommitment;
    out.equilibria.push_back({0.0, 0.0, false});
  }
  return out;
}

inline CommitmentStage commitment_stage(const ContestSpec& spec) {
  return commitment_stage(commitment_values(solve_contest(spec)), spec.c, spec.beta);
}

}  // namespace frontguard
