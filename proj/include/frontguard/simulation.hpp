#pragma once

// Monte Carlo harness. Agents play the solvers' equilibrium strategies on
// the chain model; episodes are aggregated and compared against the
// analytic predictions.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "frontguard/analysis.hpp"
#include "frontguard/chain.hpp"
#include "frontguard/contest.hpp"
#include "frontguard/digest.hpp"
#include "frontguard/game.hpp"
#include "frontguard/oracle.hpp"
#include "frontguard/protocol_equilibrium.hpp"
#include "frontguard/scenario.hpp"

namespace frontguard {

// Episode i draws from SHA-256(seed || i), both big-endian, truncated to 64 bits.
inline std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
  std::array<std::uint8_t, 16> buf{};
  for (int k = 0; k < 8; ++k) {
    buf[k] = static_cast<std::uint8_t>(seed >> (56 - 8 * k));
    buf[8 + k] = static_cast<std::uint8_t>(index >> (56 - 8 * k));
  }
  const Digest d = sha256(buf);
  std::uint64_t out = 0;
  for (int k = 0; k < 8; ++k) out = out << 8 | d[k];
  return out;
}

struct EpisodeResult {
  std::uint64_t episode = 0;
  StateIndex state = 0;
  std::string a_action = "none";
  std::string b_action = "none";
  bool attack_attempted = false;   // some attacker sent a commit or a counter
  bool front_run_occurred = false;  // an attacker's message executed instead of A's
  double payoff_a = 0.0;  // discounted to A's decision block
  double payoff_b = 0.0;  // summed over attackers
  double fees_a = 0.0;
  double fees_b = 0.0;
  std::optional<double> realized_tau;  // obfuscated runs only
};

// Contest data for one realized state.
struct StateContest {
  bool active = false;
  MessageIndex counter = 0;
  double prize = 0.0;
  ContestSolution solution;
  const FictitiousPlayResult* play = nullptr;  // set for MixedOverlap

  // Expected total spend when both attackers are in.
  double contested_spend() const {
    if (!active) return 0.0;
    if (solution.regime == ContestRegime::PureStrong) return solution.f_lower[0];
    return play->mean_spend1 + play->mean_spend2;
  }
};

struct Metric {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::optional<double> analytic;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mean"] = mean;
    j["stderr"] = stderr_;
    j["analytic"] = analytic ? nlohmann::json(*analytic) : nlohmann::json(nullptr);
    j["z"] = nullptr;
    j["exact_match"] = nullptr;
    if (analytic) {
      if (stderr_ > 0.0) j["z"] = (mean - *analytic) / stderr_;
      else j["exact_match"] = std::abs(mean - *analytic) <= 1e-12 * std::max(1.0, std::abs(*analytic));
    }
    return j;
  }
};

struct Predictions {
  std::optional<double> payoff_a, payoff_b, fees_a, attacker_spend, attack_frequency, front_run_frequency;
};

struct AggregateReport {
  std::string scenario;
  ProtocolMode protocol = ProtocolMode::None;
  std::uint64_t episodes = 0;
  std::uint64_t seed = 0;
  Classification classification = Classification::NoEngagement;
  std::optional<ProtocolRegime> regime;
  Metric payoff_a, payoff_b, fees_a, attacker_spend, attack_frequency, front_run_frequency;
  std::optional<double> realized_tau_mean;
  nlohmann::json details;  // solver-side context (equilibrium, contest stage)

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["protocol"] = to_string(protocol);
    j["episodes"] = episodes;
    j["seed"] = seed;
    j["classification"] = to_string(classification);
    if (regime) {
      j["regime"] = to_string(regime->regime);
      j["pi"] = regime->pi;
      j["threshold"] = std::isfinite(regime->threshold) ? nlohmann::json(regime->threshold) : nlohmann::json("inf");
    } else {
      j["regime"] = nullptr;
    }
    j["metrics"] = {{"payoff_a", payoff_a.to_json()},
                    {"payoff_b", payoff_b.to_json()},
                    {"fees_a", fees_a.to_json()},
                    {"attacker_spend", attacker_spend.to_json()},
                    {"attack_frequency", attack_frequency.to_json()},
                    {"front_run_frequency", front_run_frequency.to_json()}};
    j["realized_tau_mean"] = realized_tau_mean ? nlohmann::json(*realized_tau_mean) : nlohmann::json(nullptr);
    j["details"] = details;
    return j;
  }
};

class ScenarioModel {
 public:
  explicit ScenarioModel(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    const GameSpec& g = cfg_.game;
    require_valid(g);
    benchmark_ = solve_benchmark(g);
    if (detail::try_guessing_table(g)) regime_ = guessing_value(g);
    if (cfg_.protocol != ProtocolMode::None) {
      mask_ = cfg_.message_mask();
      protocol_ = solve_protocol_equilibrium(g, mask_);
      if (cfg_.equilibrium) {
        if (*cfg_.equilibrium >= protocol_->equilibria.size())
          throw ScenarioError("/protocol/equilibrium", "only " + std::to_string(protocol_->equilibria.size()) +
                                                           " protocol equilibria exist");
        eq_index_ = *cfg_.equilibrium;
      } else {
        eq_index_ = most_aggressive_equilibrium(*protocol_);
      }
      no_attack_ = no_attack_profile(protocol_->game, g.num_states());
      for (std::size_t i = 0; i < protocol_->game.states.size(); ++i) slot_[protocol_->game.states[i]] = i;
    } else {
      mask_.assign(g.num_messages(), false);
    }
    if (cfg_.contest) prepare_contest();
  }

  const ScenarioConfig& config() const noexcept { return cfg_; }
  const EquilibriumOutcome& benchmark() const noexcept { return benchmark_; }
  const std::optional<ProtocolRegime>& regime() const noexcept { return regime_; }
  const std::optional<ProtocolSolution>& protocol() const noexcept { return protocol_; }
  const ProtocolEquilibrium& equilibrium() const { return protocol_->equilibria.at(eq_index_); }
  const std::optional<CommitmentStage>& commitment() const noexcept { return stage_; }
  const CommitProfile& commit_profile() const noexcept { return profile_; }

  // Expected total attacker spend when both attackers contest state s (contest scenarios).
  const std::vector<StateContest>& direct_contests() const noexcept { return direct_contest_; }
  const std::vector<StateContest>& committed_contests() const noexcept { return commit_contest_; }

  EpisodeResult run_episode(std::uint64_t index, std::vector<std::string>* events = nullptr) const {
    ChainConfig cc;
    cc.c = cfg_.game.costs().c;
    cc.f = cfg_.game.costs().f;
    cc.delay_prob = cfg_.delay_prob;
    cc.event_log = events != nullptr;
    Chain chain(cc, episode_seed(cfg_.seed, index));
    EpisodeResult r;
    r.episode = index;
    r.state = sample_state(chain.rng());
    if (cfg_.contest) {
      if (cfg_.protocol == ProtocolMode::None) contest_direct_episode(chain, r);
      else contest_protocol_episode(chain, r);
    } else {
      switch (cfg_.protocol) {
        case ProtocolMode::None: benchmark_episode(chain, r); break;
        case ProtocolMode::Plain: plain_episode(chain, r); break;
        case ProtocolMode::Obfuscated: obfuscated_episode(chain, r); break;
      }
    }
    if (events) events->insert(events->end(), chain.event_log().begin(), chain.event_log().end());
    return r;
  }

  Predictions predictions() const {
    if (cfg_.contest) return contest_predictions();
    Predictions p;
    switch (cfg_.protocol) {
      case ProtocolMode::None: p = benchmark_predictions(); break;
      case ProtocolMode::Plain: p = plain_predictions(); break;
      case ProtocolMode::Obfuscated: p = obfuscated_predictions(); break;
    }
    // Closed-form payoffs assume commit and reveal land in consecutive blocks.
    if (cfg_.protocol != ProtocolMode::None &&
        (cfg_.schedule.kind() != PeriodSchedule::Kind::Unrestricted || cfg_.delay_prob > 0.0)) {
      p.payoff_a.reset();
      p.payoff_b.reset();
    }
    return p;
  }

 private:
  const std::string& label(MessageIndex m) const { return cfg_.game.messages()[m]; }

  StateIndex sample_state(Rng& rng) const {
    const auto& prior = cfg_.game.prior();
    const double u = rng.uniform();
    double acc = 0.0;
    StateIndex last = 0;
    for (StateIndex s = 0; s < prior.size(); ++s) {
      if (prior[s] <= 0.0) continue;
      acc += prior[s];
      last = s;
      if (u < acc) return s;
    }
    return last;
  }

  static std::size_t sample_index(Rng& rng, const std::vector<double>& weights) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  }

  static void include(Chain& chain, TxId tx) {
    for (int guard = 0; !chain.record(tx).included; ++guard) {
      if (guard > 4096) throw EngineFault("transaction never left the mempool");
      chain.build_block();
    }
  }

  static void advance_to_reveal(Chain& chain, const PeriodSchedule& schedule) {
    while (!schedule.accepts_reveals(chain.current_block())) chain.build_block();
  }

  static void advance_to_commit(Chain& chain, const PeriodSchedule& schedule) {
    const BlockNumber target = schedule.next_commit_block(chain.current_block());
    while (chain.current_block() < target) chain.build_block();
  }

  // sum_k beta^k (benefit_k - fees_k) over the blocks where `owners` paid or earned.
  double discounted(const Chain& chain, const std::vector<Address>& owners,
                    std::optional<std::pair<BlockNumber, double>> benefit, double& fees) const {
    std::map<BlockNumber, double> net;
    for (const auto& a : owners)
      for (const auto& [block, fee] : chain.fees_by_block(a)) {
        net[block] -= fee;
        fees += fee;
      }
    if (benefit) net[benefit->first] += benefit->second;
    double total = 0.0;
    for (const auto& [block, v] : net) total += std::pow(cfg_.game.costs().beta, static_cast<double>(block)) * v;
    return total;
  }

  // Books payoffs from whichever message executed at `target`.
  void settle(const Chain& chain, EpisodeResult& r, TargetId target, const std::vector<Address>& honest,
              const std::vector<Address>& attackers, MessageIndex a_msg,
              std::optional<double> prize = std::nullopt) const {
    const auto& exec = chain.target(target).executed;
    std::optional<std::pair<BlockNumber, double>> a_benefit;
    std::vector<std::optional<std::pair<BlockNumber, double>>> b_benefit(attackers.size());
    if (exec) {
      for (const auto& h : honest)
        if (exec->sender == h) a_benefit = std::make_pair(exec->block, cfg_.game.payoff_a(a_msg, r.state));
      for (std::size_t k = 0; k < attackers.size(); ++k) {
        if (exec->sender != attackers[k]) continue;
        const MessageIndex b = *cfg_.game.find_message(exec->payload);
        b_benefit[k] = std::make_pair(exec->block, prize ? *prize : cfg_.game.payoff_b(b, a_msg, r.state));
        r.front_run_occurred = true;
      }
    }
    r.payoff_a = discounted(chain, honest, a_benefit, r.fees_a);
    r.payoff_b = 0.0;
    for (std::size_t k = 0; k < attackers.size(); ++k)
      r.payoff_b += discounted(chain, {attackers[k]}, b_benefit[k], r.fees_b);
  }

  TargetConfig target_config() const {
    TargetConfig tc;
    if (cfg_.protocol != ProtocolMode::None) tc.protocol_messages = cfg_.protocol_labels();
    tc.schedule = cfg_.schedule;
    tc.commit_validity = cfg_.commit_validity;
    return tc;
  }

  // -- single attacker ------------------------------------------------------

  void benchmark_episode(Chain& chain, EpisodeResult& r) const {
    const StateIndex s = r.state;
    const Action a = benchmark_.a_action[s];
    if (!a) return;
    const TargetId t = chain.add_target(target_config());
    const Address A = chain.new_address(), B = chain.new_address();
    const TxId ta = chain.submit_message(A, t, label(*a));
    r.a_action = "send:" + label(*a);
    if (const Action b = benchmark_.b_action[s]) {
      chain.submit_message(B, t, label(*b), std::nullopt, Priority{ta, cfg_.game.costs().f, cfg_.game.costs().q});
      r.b_action = "counter:" + label(*b);
      r.attack_attempted = true;
    }
    include(chain, ta);
    settle(chain, r, t, {A}, {B}, *a);
  }

  void direct_path(Chain& chain, EpisodeResult& r, TargetId t, const Address& A, const Address& B) const {
    const StateIndex s = r.state;
    const MessageIndex a = honest_message(cfg_.game, s);
    const auto& d = protocol_->direct[s];
    const TxId ta = chain.submit_message(A, t, label(a));
    r.a_action = "send:" + label(a);
    if (d.counter) {
      chain.submit_message(B, t, label(*d.counter), std::nullopt, Priority{ta, cfg_.game.costs().f, cfg_.game.costs().q});
      r.b_action = "counter:" + label(*d.counter);
      r.attack_attempted = true;
    }
    include(chain, ta);
    settle(chain, r, t, {A}, {B}, a);
  }

  void plain_episode(Chain& chain, EpisodeResult& r) const {
    const StateIndex s = r.state;
    const auto& sol = *protocol_;
    const HonestPath path = sol.path[s];
    if (path == HonestPath::Abstain) return;
    const TargetId t = chain.add_target(target_config());
    const Address A = chain.new_address(), B = chain.new_address();
    if (path == HonestPath::Direct) {
      direct_path(chain, r, t, A, B);
      return;
    }
    const auto& eq = equilibrium();
    if (!(chain.rng().uniform() < eq.commit_probability[s])) return;
    const auto& k = cfg_.game.costs();
    const MessageIndex a = honest_message(cfg_.game, s);
    const std::size_t i = slot_.at(s);

    advance_to_commit(chain, cfg_.schedule);
    const TxId ta_commit = chain.submit_commit(A, t, make_commit(A, label(a)));
    r.a_action = "commit:" + label(a);
    const std::size_t action = sample_index(chain.rng(), eq.attacker_mix);
    if (action > 0) {
      const MessageIndex guess = sol.game.commit_messages[action - 1];
      chain.submit_commit(B, t, make_commit(B, label(guess)));
      r.b_action = "commit:" + label(guess);
      r.attack_attempted = true;
    }
    include(chain, ta_commit);
    advance_to_reveal(chain, cfg_.schedule);
    const TxId ta_reveal = chain.submit_message(A, t, label(a));
    const FollowUp& follow = sol.game.follow_up[action][i];
    if (follow.attacks()) {
      chain.submit_message(B, t, label(follow.message), std::nullopt, Priority{ta_reveal, k.f, k.q});
      r.b_action += std::string(r.b_action == "none" ? "" : "+") + "counter:" + label(follow.message);
      if (r.b_action.rfind("none+", 0) == 0) r.b_action = r.b_action.substr(5);
      r.attack_attempted = true;
    }
    include(chain, ta_reveal);
    settle(chain, r, t, {A}, {B}, a);
  }

  void obfuscated_episode(Chain& chain, EpisodeResult& r) const {
    const StateIndex s = r.state;
    const auto& sol = *protocol_;
    const auto& k = cfg_.game.costs();
    const std::size_t n = cfg_.replicas;
    const Address B = chain.new_address();
    struct User {
      TargetId target = 0;
      Address commit_from{}, reveal_from{};
      bool commits = false;
      TxId container = 0, reveal = 0;
    };
    std::vector<User> users(n);
    for (auto& u : users) u.target = chain.add_target(target_config());
    const MessageIndex a = honest_message(cfg_.game, s);
    const bool protocol_state = sol.path[s] == HonestPath::CommitReveal;
    const double x = protocol_state ? no_attack_.commit_probability[s] : 0.0;

    advance_to_commit(chain, cfg_.schedule);
    for (auto& u : users) {
      const bool observes = chain.rng().bernoulli(cfg_.observation_prob);
      u.commits = observes && chain.rng().uniform() < x;
      if (!u.commits) continue;
      u.commit_from = chain.new_address();
      u.reveal_from = chain.new_address();
      u.container = chain.submit_container_commit(u.commit_from,
                                                  make_commit(u.reveal_from, label(a), chain.target(u.target).address));
    }
    if (users[0].commits) r.a_action = "commit:" + label(a);

    std::size_t containers = 0;
    for (const auto& e : chain.attacker_view(B))
      if (e.kind == TxKind::ContainerCommit) ++containers;
    const double tau = static_cast<double>(containers) / static_cast<double>(n);
    r.realized_tau = tau;

    std::optional<std::size_t> victim;
    const double pi = regime_ ? regime_->pi : 0.0;
    if (regime_ && tau * pi > discount_threshold(k)) {
      victim = chain.rng().index(n);
      chain.submit_commit(B, users[*victim].target, make_commit(B, label(regime_->best_commit)));
      r.b_action = "commit:" + label(regime_->best_commit);
      r.attack_attempted = true;
    }
    for (const auto& u : users)
      if (u.commits) include(chain, u.container);
    if (chain.pending() > 0) chain.build_block();
    advance_to_reveal(chain, cfg_.schedule);
    for (auto& u : users)
      if (u.commits) u.reveal = chain.submit_message(u.reveal_from, u.target, label(a), u.container);

    if (victim && users[*victim].commits) {
      const MessageIndex guess = regime_->best_commit;
      if (k.q * cfg_.game.payoff_b(guess, a, s) - k.f > 0.0) {
        chain.submit_message(B, users[*victim].target, label(guess), std::nullopt,
                             Priority{users[*victim].reveal, k.f, k.q});
        r.b_action += "+counter:" + label(guess);
      }
    }
    for (const auto& u : users)
      if (u.commits) include(chain, u.reveal);

    // A is replica 0; the attacker's take is summed over every target.
    std::vector<Address> a_addrs;
    if (users[0].commits) a_addrs = {users[0].commit_from, users[0].reveal_from};
    EpisodeResult tmp = r;
    settle(chain, r, users[0].target, a_addrs, {B}, a);
    if (victim && *victim != 0) {
      settle(chain, tmp, users[*victim].target, {}, {B}, a);
      r.payoff_b = tmp.payoff_b;
      r.fees_b = tmp.fees_b;
      r.front_run_occurred = tmp.front_run_occurred;
    }
  }

  // -- two attackers --------------------------------------------------------

  void prepare_contest() {
    const GameSpec& g = cfg_.game;
    const std::size_t ns = g.num_states();
    auto state_contest = [&](StateIndex s, MessageIndex counter) {
      StateContest sc;
      sc.counter = counter;
      const MessageIndex a = honest_message(g, s);
      sc.prize = cfg_.contest->prize.value_or(g.payoff_b(counter, a, s));
      if (!(sc.prize > 0.0)) return sc;
      const ContestSpec spec = cfg_.contest_spec(sc.prize);
      sc.solution = solve_contest(spec);
      sc.active = sc.solution.f_lower[0] > 0.0;
      if (sc.active && sc.solution.regime == ContestRegime::MixedOverlap) {
        auto it = plays_.find(sc.prize);
        if (it == plays_.end()) it = plays_.emplace(sc.prize, oracle_fictitious_play(spec)).first;
        sc.play = &it->second;
      }
      return sc;
    };

    direct_contest_.resize(ns);
    for (StateIndex s = 0; s < ns; ++s) {
      MessageIndex counter = attacker_counter(g, s);
      if (protocol_ && protocol_->path[s] == HonestPath::Direct) {
        auto c = attacker_counter_among(g, s, [&](MessageIndex b) { return !mask_[b]; });
        if (!c) continue;
        counter = *c;
      }
      direct_contest_[s] = state_contest(s, counter);
    }
    if (!protocol_) return;

    // Blind commit: attackers pick the protocol message with the best expected solo value.
    const auto& pg = protocol_->game;
    double mass = 0.0;
    for (std::size_t i = 0; i < pg.states.size(); ++i) mass += pg.weight[i] * no_attack_.commit_probability[pg.states[i]];
    if (mass <= 0.0 || pg.commit_messages.empty()) {
      stage_ = commitment_stage(CommitmentValues{}, cfg_.game.costs().c, cfg_.game.costs().beta);
      profile_ = stage_->equilibria.front();
      return;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<StateContest> best_contests;
    CommitmentValues best_values;
    for (MessageIndex m : pg.commit_messages) {
      std::vector<StateContest> contests(ns);
      CommitmentValues v;
      for (std::size_t i = 0; i < pg.states.size(); ++i) {
        const StateIndex s = pg.states[i];
        const double w = pg.weight[i] * no_attack_.commit_probability[s] / mass;
        contests[s] = state_contest(s, m);
        if (!contests[s].active) continue;
        const auto& cs = contests[s].solution;
        v.solo_strong += w * cs.value[0];
        v.solo_weak += w * cs.value[1];
        v.shared_strong += w * cs.payoff1;
        v.shared_weak += w * cs.payoff2;
      }
      if (v.solo_strong > best) {
        best = v.solo_strong;
        commit_message_ = m;
        best_contests = std::move(contests);
        best_values = v;
      }
    }
    commit_contest_ = std::move(best_contests);
    stage_ = commitment_stage(best_values, cfg_.game.costs().c, cfg_.game.costs().beta);
    std::size_t pick = 0;
    if (cfg_.equilibrium) {
      if (*cfg_.equilibrium >= stage_->equilibria.size())
        throw ScenarioError("/protocol/equilibrium", "only " + std::to_string(stage_->equilibria.size()) +
                                                         " commitment-stage equilibria exist");
      pick = *cfg_.equilibrium;
    } else {
      for (std::size_t e = 1; e < stage_->equilibria.size(); ++e) {
        const auto& p = stage_->equilibria[e];
        const auto& q = stage_->equilibria[pick];
        if (p.alpha1 + p.alpha2 > q.alpha1 + q.alpha2 + 1e-12) pick = e;
      }
    }
    profile_ = stage_->equilibria[pick];
  }

  // Spends of the attackers taking part; zero means the attacker stays out.
  std::array<double, 2> draw_spends(Rng& rng, const StateContest& sc, bool in1, bool in2) const {
    std::array<double, 2> spend{0.0, 0.0};
    if (!sc.active) return spend;
    if (in1 && in2) {
      if (sc.solution.regime == ContestRegime::PureStrong) {
        spend[0] = sc.solution.f_lower[0];
      } else {
        const auto& play = *sc.play;
        spend[0] = play.grid[sample_index(rng, std::vector<double>(play.mix1.data(), play.mix1.data() + play.mix1.size()))];
        spend[1] = play.grid[sample_index(rng, std::vector<double>(play.mix2.data(), play.mix2.data() + play.mix2.size()))];
      }
    } else if (in1) {
      spend[0] = sc.solution.f_lower[0];
    } else if (in2) {
      spend[1] = sc.solution.f_lower[1];
    }
    return spend;
  }

  void send_counters(Chain& chain, EpisodeResult& r, TargetId t, TxId victim, const StateContest& sc,
                     const std::array<Address, 2>& attackers, const std::array<double, 2>& spend) const {
    const ContestSpec spec = cfg_.contest_spec(sc.prize);
    for (int i = 0; i < 2; ++i) {
      if (!(spend[i] > 0.0)) continue;
      const double success = spec.gamma(i + 1) * spec.curve(spend[i]);
      chain.submit_message(attackers[i], t, label(sc.counter), std::nullopt, Priority{victim, spend[i], success});
      const std::string tag = std::string(i == 0 ? "b1" : "b2") + ":counter:" + label(sc.counter);
      r.b_action = r.b_action == "none" ? tag : r.b_action + "+" + tag;
      r.attack_attempted = true;
    }
  }

  void contest_direct_episode(Chain& chain, EpisodeResult& r) const {
    const StateIndex s = r.state;
    const MessageIndex a = honest_message(cfg_.game, s);
    if (!(cfg_.game.payoff_a(a, s) > cfg_.game.costs().c)) return;
    const TargetId t = chain.add_target(target_config());
    const Address A = chain.new_address();
    const std::array<Address, 2> attackers{chain.new_address(), chain.new_address()};
    const TxId ta = chain.submit_message(A, t, label(a));
    r.a_action = "send:" + label(a);
    const auto& sc = direct_contest_[s];
    send_counters(chain, r, t, ta, sc, attackers, draw_spends(chain.rng(), sc, true, true));
    include(chain, ta);
    settle(chain, r, t, {A}, {attackers[0], attackers[1]}, a, sc.prize);
  }

  void contest_protocol_episode(Chain& chain, EpisodeResult& r) const {
    const StateIndex s = r.state;
    const HonestPath path = protocol_->path[s];
    if (path == HonestPath::Abstain) return;
    if (path == HonestPath::Direct) {
      contest_direct_episode(chain, r);
      return;
    }
    if (!(chain.rng().uniform() < no_attack_.commit_probability[s])) return;
    const TargetId t = chain.add_target(target_config());
    const Address A = chain.new_address();
    const std::array<Address, 2> attackers{chain.new_address(), chain.new_address()};
    const MessageIndex a = honest_message(cfg_.game, s);

    advance_to_commit(chain, cfg_.schedule);
    const TxId ta_commit = chain.submit_commit(A, t, make_commit(A, label(a)));
    r.a_action = "commit:" + label(a);
    const bool in1 = chain.rng().bernoulli(profile_.alpha1);
    const bool in2 = chain.rng().bernoulli(profile_.alpha2);
    const bool in[2] = {in1, in2};
    for (int i = 0; i < 2; ++i) {
      if (!in[i]) continue;
      chain.submit_commit(attackers[i], t, make_commit(attackers[i], label(commit_message_)));
      const std::string tag = std::string(i == 0 ? "b1" : "b2") + ":commit:" + label(commit_message_);
      r.b_action = r.b_action == "none" ? tag : r.b_action + "+" + tag;
      r.attack_attempted = true;
    }
    include(chain, ta_commit);
    advance_to_reveal(chain, cfg_.schedule);
    const TxId ta_reveal = chain.submit_message(A, t, label(a));
    const auto& sc = commit_contest_[s];
    send_counters(chain, r, t, ta_reveal, sc, attackers, draw_spends(chain.rng(), sc, in1, in2));
    include(chain, ta_reveal);
    settle(chain, r, t, {A}, {attackers[0], attackers[1]}, a, sc.prize);
  }

  // -- analytic side --------------------------------------------------------

  Predictions benchmark_predictions() const {
    const GameSpec& g = cfg_.game;
    const auto& k = g.costs();
    Predictions p;
    p.payoff_a = benchmark_.expected_payoff_a(g);
    p.payoff_b = benchmark_.expected_payoff_b(g);
    double sends = 0.0, attacks = 0.0;
    for (StateIndex s = 0; s < g.num_states(); ++s) {
      if (benchmark_.a_action[s]) sends += g.prior(s);
      if (benchmark_.b_action[s]) attacks += g.prior(s);
    }
    p.fees_a = k.c * sends;
    p.attack_frequency = attacks;
    p.front_run_frequency = k.q * attacks;
    p.attacker_spend = k.f * attacks;
    return p;
  }

  Predictions plain_predictions() const {
    const GameSpec& g = cfg_.game;
    const auto& k = g.costs();
    const auto& sol = *protocol_;
    const auto& eq = equilibrium();
    const auto& pg = sol.game;
    Predictions p;
    p.payoff_a = eq.honest_payoff;
    p.payoff_b = eq.attacker_payoff;
    double fees_a = 0.0, attempts = 0.0, front = 0.0, spend = 0.0;
    for (std::size_t i = 0; i < pg.states.size(); ++i) {
      const double w = pg.weight[i] * eq.commit_probability[pg.states[i]];
      const double y0 = eq.attacker_mix[0];
      const double atk = pg.attack_probability(i, eq.attacker_mix);
      fees_a += w * 2.0 * k.c;
      attempts += w * ((1.0 - y0) + y0 * (pg.follow_up[0][i].attacks() ? 1.0 : 0.0));
      front += w * k.q * atk;
      spend += w * (k.c * (1.0 - y0) + k.f * atk);
    }
    for (StateIndex s = 0; s < g.num_states(); ++s) {
      if (sol.path[s] != HonestPath::Direct) continue;
      fees_a += g.prior(s) * k.c;
      if (sol.direct[s].counter) {
        attempts += g.prior(s);
        front += g.prior(s) * k.q;
        spend += g.prior(s) * k.f;
      }
    }
    p.fees_a = fees_a;
    p.attack_frequency = attempts;
    p.front_run_frequency = front;
    p.attacker_spend = spend;
    return p;
  }

  Predictions obfuscated_predictions() const {
    Predictions p;
    const auto& k = cfg_.game.costs();
    const double pi = regime_ ? regime_->pi : 0.0;
    if (pi > discount_threshold(k)) return p;  // depends on the realized tau distribution
    const auto& pg = protocol_->game;
    double payoff = 0.0, fees = 0.0;
    for (std::size_t i = 0; i < pg.states.size(); ++i) {
      const double w = pg.weight[i] * no_attack_.commit_probability[pg.states[i]] * cfg_.observation_prob;
      payoff += w * pg.honest_base[i];
      fees += w * 2.0 * k.c;
    }
    p.payoff_a = payoff;
    p.payoff_b = 0.0;
    p.fees_a = fees;
    p.attack_frequency = 0.0;
    p.front_run_frequency = 0.0;
    p.attacker_spend = 0.0;
    return p;
  }

  Predictions contest_predictions() const {
    const GameSpec& g = cfg_.game;
    const double c = g.costs().c;
    Predictions p;
    double spend = 0.0;
    for (StateIndex s = 0; s < g.num_states(); ++s) {
      const MessageIndex a = honest_message(g, s);
      if (!protocol_) {
        if (g.payoff_a(a, s) > c) spend += g.prior(s) * direct_contest_[s].contested_spend();
        continue;
      }
      if (protocol_->path[s] == HonestPath::Direct) {
        spend += g.prior(s) * direct_contest_[s].contested_spend();
      } else if (protocol_->path[s] == HonestPath::CommitReveal) {
        const double x = no_attack_.commit_probability[s];
        const auto& sc = commit_contest_[s];
        const double a1 = profile_.alpha1, a2 = profile_.alpha2;
        double v = c * (a1 + a2);
        if (sc.active)
          v += a1 * (1.0 - a2) * sc.solution.f_lower[0] + a2 * (1.0 - a1) * sc.solution.f_lower[1] +
               a1 * a2 * sc.contested_spend();
        spend += g.prior(s) * x * v;
      }
    }
    p.attacker_spend = spend;
    return p;
  }

  ScenarioConfig cfg_;
  EquilibriumOutcome benchmark_;
  std::optional<ProtocolRegime> regime_;
  MessageMask mask_;
  std::optional<ProtocolSolution> protocol_;
  std::size_t eq_index_ = 0;
  ProtocolEquilibrium no_attack_;
  std::map<StateIndex, std::size_t> slot_;

  std::map<double, FictitiousPlayResult> plays_;
  std::vector<StateContest> direct_contest_;
  std::vector<StateContest> commit_contest_;
  MessageIndex commit_message_ = 0;
  std::optional<CommitmentStage> stage_;
  CommitProfile profile_;
};

namespace detail {

inline Metric summarize(const std::vector<EpisodeResult>& results, double EpisodeResult::*field,
                        std::optional<double> analytic) {
  Metric m;
  m.analytic = analytic;
  const double n = static_cast<double>(results.size());
  const double first = results.front().*field;
  if (std::all_of(results.begin(), results.end(), [&](const EpisodeResult& r) { return r.*field == first; })) {
    m.mean = first;
    return m;
  }
  double sum = 0.0;
  for (const auto& r : results) sum += r.*field;
  m.mean = sum / n;
  if (results.size() > 1) {
    double ss = 0.0;
    for (const auto& r : results) ss += (r.*field - m.mean) * (r.*field - m.mean);
    m.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

}  // namespace detail

// Runs every episode of the scenario. Results come back in episode order no
// matter how many threads ran them.
inline std::vector<EpisodeResult> run_episodes(const ScenarioModel& model, unsigned threads = 0) {
  const std::uint64_t n = model.config().episodes;
  std::vector<EpisodeResult> results(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) results[i] = model.run_episode(i);
    return results;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t i = t; i < n; i += threads) results[i] = model.run_episode(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

inline AggregateReport aggregate(const ScenarioModel& model, const std::vector<EpisodeResult>& results) {
  std::vector<EpisodeResult> view = results;
  for (auto& r : view) {
    // Booleans are folded as 0/1 through the payoff slots of a scratch copy.
    r.payoff_a = r.attack_attempted ? 1.0 : 0.0;
    r.payoff_b = r.front_run_occurred ? 1.0 : 0.0;
    r.fees_a = r.realized_tau.value_or(0.0);
  }
  const auto& cfg = model.config();
  const Predictions p = model.predictions();
  AggregateReport rep;
  rep.scenario = cfg.name;
  rep.protocol = cfg.protocol;
  rep.episodes = results.size();
  rep.seed = cfg.seed;
  rep.classification = model.benchmark().classification;
  rep.regime = model.regime();
  rep.payoff_a = detail::summarize(results, &EpisodeResult::payoff_a, p.payoff_a);
  rep.payoff_b = detail::summarize(results, &EpisodeResult::payoff_b, p.payoff_b);
  rep.fees_a = detail::summarize(results, &EpisodeResult::fees_a, p.fees_a);
  rep.attacker_spend = detail::summarize(results, &EpisodeResult::fees_b, p.attacker_spend);
  rep.attack_frequency = detail::summarize(view, &EpisodeResult::payoff_a, p.attack_frequency);
  rep.front_run_frequency = detail::summarize(view, &EpisodeResult::payoff_b, p.front_run_frequency);
  if (cfg.protocol == ProtocolMode::Obfuscated) rep.realized_tau_mean = detail::summarize(view, &EpisodeResult::fees_a, {}).mean;

  nlohmann::json d = nlohmann::json::object();
  if (const auto& sol = model.protocol(); sol && !cfg.contest) {
    const auto& eq = model.equilibrium();
    d["equilibria_found"] = sol->equilibria.size();
    d["attacker_commit_probability"] = eq.attacker_commit_probability;
    d["attack_probability"] = eq.attack_probability;
    nlohmann::json mix = nlohmann::json::object();
    mix["abstain"] = eq.attacker_mix[0];
    for (std::size_t a = 1; a < eq.attacker_mix.size(); ++a)
      mix["commit:" + cfg.game.messages()[sol->game.commit_messages[a - 1]]] = eq.attacker_mix[a];
    d["attacker_mix"] = mix;
  }
  if (const auto& stage = model.commitment()) {
    d["commitment_case"] = to_string(stage->kind);
    d["alpha1"] = model.commit_profile().alpha1;
    d["alpha2"] = model.commit_profile().alpha2;
    d["degenerate_indifference"] = stage->degenerate_indifference;
  }
  rep.details = d;
  return rep;
}

inline AggregateReport run_monte_carlo(const ScenarioModel& model, unsigned threads = 0) {
  return aggregate(model, run_episodes(model, threads));
}

inline void write_episode_csv(std::ostream& out, const ScenarioModel& model, const std::vector<EpisodeResult>& results) {
  out << "episode,state,a_action,b_action,front_run,payoff_a,payoff_b,fees_a,fees_b\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : results) {
    out << r.episode << ',' << model.config().game.states()[r.state] << ',' << r.a_action << ',' << r.b_action << ','
        << (r.front_run_occurred ? 1 : 0) << ',' << num(r.payoff_a) << ',' << num(r.payoff_b) << ',' << num(r.fees_a)
        << ',' << num(r.fees_b) << '\n';
  }
}

}  // namespace frontguard
