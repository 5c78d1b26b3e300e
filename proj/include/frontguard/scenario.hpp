#pragma once

// Scenario files: one JSON document describing the game, an optional
// two-attacker contest, the protocol variant, the block schedule and the
// Monte Carlo run. Errors carry either line:column (syntax) or a JSON
// pointer to the offending field (content).

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "frontguard/chain.hpp"
#include "frontguard/contest.hpp"
#include "frontguard/error.hpp"
#include "frontguard/game.hpp"
#include "frontguard/protocol_equilibrium.hpp"

namespace frontguard {

enum class ProtocolMode { None, Plain, Obfuscated };

inline const char* to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::None: return "none";
    case ProtocolMode::Plain: return "plain";
    case ProtocolMode::Obfuscated: return "obfuscated";
  }
  return "unknown";
}

struct ContestConfig {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  std::optional<double> prize;  // if unset, each state's on-path counter payoff is the prize
  SuccessCurve curve = SuccessCurve::exponential(1.0, 1.0);
};

struct ScenarioConfig {
  std::string name = "scenario";
  GameSpec game;
  std::optional<ContestConfig> contest;
  ProtocolMode protocol = ProtocolMode::None;
  std::size_t replicas = 1;
  double observation_prob = 1.0;
  std::optional<std::vector<std::string>> protocol_messages;  // default: every message
  std::optional<std::uint64_t> commit_validity;
  std::optional<std::size_t> equilibrium;  // which equilibrium the agents play
  PeriodSchedule schedule = PeriodSchedule::unrestricted();
  double delay_prob = 0.0;
  std::uint64_t episodes = 1000;
  std::uint64_t seed = 0;

  MessageMask message_mask() const {
    MessageMask mask(game.num_messages(), protocol_messages ? false : true);
    if (protocol_messages)
      for (const auto& label : *protocol_messages) mask[*game.find_message(label)] = true;
    return mask;
  }

  std::vector<std::string> protocol_labels() const {
    if (protocol_messages) return *protocol_messages;
    return game.messages();
  }

  ContestSpec contest_spec(double prize) const {
    ContestSpec spec;
    spec.gamma1 = contest->gamma1;
    spec.gamma2 = contest->gamma2;
    spec.prize = prize;
    spec.curve = contest->curve;
    spec.c = game.costs().c;
    spec.beta = game.costs().beta;
    return spec;
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Typed access to a JSON object that remembers where it is and which keys were used.
class Reader {
 public:
  Reader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& message) {
    throw ScenarioError(path.empty() ? "/" : path, message);
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    if (!node_.contains(key)) fail(at(key), "missing required field");
    return node_.at(key);
  }

  Reader object(const std::string& key) { return Reader(raw(key), at(key)); }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  std::uint64_t count(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : (used_.insert(key), fallback);
  }

  std::string text(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  bool flag_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<std::string> labels(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(at(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  static std::vector<double> numbers(const nlohmann::json& v, const std::string& path, std::size_t expected) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    if (v.size() != expected)
      fail(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  static const nlohmann::json& array_of(const nlohmann::json& v, const std::string& path, std::size_t expected) {
    if (!v.is_array()) fail(path, "expected an array");
    if (v.size() != expected)
      fail(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
    return v;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
  }

 private:
  const nlohmann::json& node_;
  std::string path_;
  std::set<std::string> used_;
};

inline CostParams read_costs(Reader r) {
  CostParams k;
  k.c = r.number("c");
  k.f = r.number("f");
  k.q = r.number("q");
  k.beta = r.number("beta");
  r.finish();
  return k;
}

inline GameSpec read_game(Reader r) {
  auto states = r.labels("states");
  auto messages = r.labels("messages");
  const std::size_t ns = states.size(), nm = messages.size();
  if (ns == 0) Reader::fail(r.at("states"), "at least one state is required");
  if (nm == 0) Reader::fail(r.at("messages"), "at least one message is required");
  auto prior = Reader::numbers(r.raw("prior"), r.at("prior"), ns);

  std::vector<std::vector<double>> pa;
  const auto& pa_json = Reader::array_of(r.raw("payoff_a"), r.at("payoff_a"), nm);
  for (std::size_t m = 0; m < nm; ++m)
    pa.push_back(Reader::numbers(pa_json[m], r.at("payoff_a") + "/" + std::to_string(m), ns));

  std::vector<std::vector<std::vector<double>>> pb;
  const auto& pb_json = Reader::array_of(r.raw("payoff_b"), r.at("payoff_b"), nm);
  for (std::size_t b = 0; b < nm; ++b) {
    const std::string pb_path = r.at("payoff_b") + "/" + std::to_string(b);
    const auto& block = Reader::array_of(pb_json[b], pb_path, nm);
    std::vector<std::vector<double>> rows;
    for (std::size_t a = 0; a < nm; ++a) rows.push_back(Reader::numbers(block[a], pb_path + "/" + std::to_string(a), ns));
    pb.push_back(std::move(rows));
  }
  const CostParams costs = read_costs(r.object("costs"));
  r.finish();
  return GameSpec(std::move(states), std::move(messages), std::move(prior), pa, pb, costs);
}

inline SuccessCurve read_curve(Reader r) {
  const std::string family = r.text("family");
  try {
    if (family == "exponential") {
      auto curve = SuccessCurve::exponential(r.number_or("q_max", 1.0), r.number("lambda"));
      r.finish();
      return curve;
    }
    if (family == "power") {
      auto curve = SuccessCurve::power(r.number("scale"), r.number("exponent"));
      r.finish();
      return curve;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    Reader::fail(r.at("family"), e.what());
  }
  Reader::fail(r.at("family"), "unknown curve family '" + family + "' (expected exponential or power)");
}

inline PeriodSchedule read_schedule(Reader r) {
  const std::string kind = r.text("kind");
  PeriodSchedule s;
  if (kind == "unrestricted") {
    s = PeriodSchedule::unrestricted();
  } else if (kind == "alternating") {
    const auto commit = r.count_or("commit_blocks", 1);
    const auto reveal = r.count_or("reveal_blocks", 1);
    if (commit == 0) Reader::fail(r.at("commit_blocks"), "must be positive");
    if (reveal == 0) Reader::fail(r.at("reveal_blocks"), "must be positive");
    s = PeriodSchedule::alternating(commit, reveal, r.flag_or("open_commits", false));
  } else if (kind == "deadline") {
    const auto deadline = r.count("deadline");
    if (deadline == 0) Reader::fail(r.at("deadline"), "must be positive");
    s = PeriodSchedule::deadline(deadline, r.flag_or("open_commits", false));
  } else {
    Reader::fail(r.at("kind"), "unknown schedule kind '" + kind + "'");
  }
  r.finish();
  return s;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ScenarioError("", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }

  using detail::Reader;
  Reader root(doc, "");
  ScenarioConfig cfg;
  if (root.has("name")) cfg.name = root.text("name");
  cfg.game = detail::read_game(root.object("game"));

  const auto report = validate_spec(cfg.game);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::string field = "/game";
    switch (v.kind) {
      case ViolationKind::PriorShape:
      case ViolationKind::PriorSum:
      case ViolationKind::PriorRange: field = "/game/prior"; break;
      case ViolationKind::InvalidCost: field = "/game/costs"; break;
      case ViolationKind::EmptyStates: field = "/game/states"; break;
      case ViolationKind::EmptyMessages: field = "/game/messages"; break;
      case ViolationKind::AmbiguousArgmax:
      case ViolationKind::BijectionViolation:
      case ViolationKind::GapAssumptionViolation:
      case ViolationKind::NonFinitePayoff: field = "/game/payoff_a"; break;
      default: break;
    }
    throw ScenarioError(field, report.summary());
  }

  if (root.has("contest")) {
    Reader r = root.object("contest");
    ContestConfig c;
    c.gamma1 = r.number("gamma1");
    c.gamma2 = r.number("gamma2");
    if (r.has("prize")) c.prize = r.number("prize");
    c.curve = detail::read_curve(r.object("curve"));
    r.finish();
    cfg.contest = c;
    try {
      validate_contest(cfg.contest_spec(c.prize.value_or(1.0)));
    } catch (const SpecError& e) {
      Reader::fail("/contest", e.what());
    }
    if (c.prize && !(*c.prize > 0.0)) Reader::fail("/contest/prize", "must be positive");
  }

  if (root.has("protocol")) {
    Reader r = root.object("protocol");
    const std::string mode = r.text("mode");
    if (mode == "none") cfg.protocol = ProtocolMode::None;
    else if (mode == "plain") cfg.protocol = ProtocolMode::Plain;
    else if (mode == "obfuscated") cfg.protocol = ProtocolMode::Obfuscated;
    else Reader::fail(r.at("mode"), "unknown protocol mode '" + mode + "' (expected none, plain or obfuscated)");
    cfg.replicas = r.count_or("replicas", 1);
    if (cfg.replicas == 0) Reader::fail(r.at("replicas"), "must be at least 1");
    cfg.observation_prob = r.number_or("observation_prob", 1.0);
    if (!(cfg.observation_prob >= 0.0 && cfg.observation_prob <= 1.0))
      Reader::fail(r.at("observation_prob"), "must lie in [0, 1]");
    if (r.has("messages")) {
      auto labels = r.labels("messages");
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (!cfg.game.find_message(labels[i]))
          Reader::fail(r.at("messages") + "/" + std::to_string(i), "unknown message '" + labels[i] + "'");
      cfg.protocol_messages = std::move(labels);
    }
    if (r.has("commit_validity")) cfg.commit_validity = r.count("commit_validity");
    if (r.has("equilibrium")) cfg.equilibrium = r.count("equilibrium");
    r.finish();
  }

  if (root.has("schedule")) cfg.schedule = detail::read_schedule(root.object("schedule"));
  cfg.delay_prob = root.number_or("delay_prob", 0.0);
  if (!(cfg.delay_prob >= 0.0 && cfg.delay_prob < 1.0)) Reader::fail("/delay_prob", "must lie in [0, 1)");
  cfg.episodes = root.count_or("episodes", 1000);
  if (cfg.episodes == 0) Reader::fail("/episodes", "must be at least 1");
  cfg.seed = root.count_or("seed", 0);
  root.finish();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// Seed precedence: explicit override, then FRONTGUARD_SEED, then the file.
inline void apply_seed_override(ScenarioConfig& cfg, std::optional<std::uint64_t> explicit_seed) {
  if (explicit_seed) {
    cfg.seed = *explicit_seed;
    return;
  }
  if (const char* env = std::getenv("FRONTGUARD_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') throw ScenarioError("FRONTGUARD_SEED", "not a 64-bit unsigned integer");
    cfg.seed = v;
  }
}

}  // namespace frontguard
