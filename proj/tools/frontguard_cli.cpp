#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frontguard/frontguard.hpp"

namespace fg = frontguard;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitUsage = 64;

struct Options {
  std::string format = "table";
  bool quiet = false;
};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string action_label(const fg::GameSpec& spec, const fg::Action& a) {
  return a ? spec.messages()[*a] : "none";
}

void print_table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out << std::left << std::setw(static_cast<int>(width[i]) + (i + 1 < cells.size() ? 2 : 0)) << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void emit(const Options& opt, const json& doc, const std::function<void(std::ostream&)>& table) {
  if (opt.quiet) return;
  if (opt.format == "json") std::cout << doc.dump(2) << '\n';
  else table(std::cout);
}

fg::ScenarioConfig load(const std::string& path) { return fg::load_scenario(path); }

int cmd_solve(const Options& opt, const std::string& path) {
  const auto cfg = load(path);
  const auto& g = cfg.game;
  const auto out = fg::solve_benchmark(g);
  json doc;
  doc["scenario"] = cfg.name;
  doc["classification"] = fg::to_string(out.classification);
  doc["expected_payoff_a"] = out.expected_payoff_a(g);
  doc["expected_payoff_b"] = out.expected_payoff_b(g);
  json states = json::array();
  std::vector<std::vector<std::string>> rows;
  for (fg::StateIndex s = 0; s < g.num_states(); ++s) {
    const auto& p = out.per_state_payoffs[s];
    states.push_back({{"state", g.states()[s]},
                      {"a_action", out.a_action[s] ? json(g.messages()[*out.a_action[s]]) : json(nullptr)},
                      {"b_action", out.b_action[s] ? json(g.messages()[*out.b_action[s]]) : json(nullptr)},
                      {"payoff_a", p.a},
                      {"payoff_b", p.b}});
    rows.push_back({g.states()[s], action_label(g, out.a_action[s]), action_label(g, out.b_action[s]), fmt(p.a), fmt(p.b)});
  }
  doc["states"] = states;
  emit(opt, doc, [&](std::ostream& os) {
    os << "classification: " << fg::to_string(out.classification) << '\n';
    print_table(os, {"state", "A", "B", "payoff_a", "payoff_b"}, rows);
    os << "expected payoffs: A " << fmt(out.expected_payoff_a(g)) << ", B " << fmt(out.expected_payoff_b(g)) << '\n';
  });
  return 0;
}

int cmd_pi(const Options& opt, const std::string& path, std::optional<std::size_t> k_max) {
  const auto cfg = load(path);
  const auto& g = cfg.game;
  json doc;
  doc["scenario"] = cfg.name;
  if (!fg::detail::try_guessing_table(g)) {
    doc["pi"] = 0.0;
    doc["regime"] = fg::to_string(fg::GuessingRegime::Hard);
    doc["note"] = "A never sends, so there is nothing to guess";
    emit(opt, doc, [&](std::ostream& os) { os << "pi: 0 (A never sends)\nregime: GuessingHard\n"; });
    return 0;
  }
  const auto reg = fg::guessing_value(g);
  const auto plan = fg::plan_multi_commit(g, k_max.value_or(g.num_messages()));
  doc["pi"] = reg.pi;
  doc["threshold"] = std::isfinite(reg.threshold) ? json(reg.threshold) : json("inf");
  doc["regime"] = fg::to_string(reg.regime);
  doc["best_commit"] = g.messages()[reg.best_commit];
  doc["k_star"] = plan.k_star;
  doc["pi_of_k"] = plan.pi_of_k;
  json set = json::array();
  for (auto m : plan.chosen_set) set.push_back(g.messages()[m]);
  doc["chosen_set"] = set;
  doc["approximate"] = plan.approximate;
  doc["worth_committing"] = plan.worth_committing;
  emit(opt, doc, [&](std::ostream& os) {
    os << "pi: " << fmt(reg.pi) << " (best blind commit " << g.messages()[reg.best_commit] << ")\n";
    os << "threshold c/beta: " << fmt(reg.threshold) << '\n';
    os << "regime: " << fg::to_string(reg.regime) << '\n';
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < plan.pi_of_k.size(); ++k) rows.push_back({std::to_string(k + 1), fmt(plan.pi_of_k[k])});
    print_table(os, {"k", "pi(k)"}, rows);
    os << "k*: " << plan.k_star << (plan.approximate ? " (greedy)" : "") << '\n';
  });
  return 0;
}

json contest_json(const fg::ContestSpec& spec) {
  const auto sol = fg::solve_contest(spec);
  const auto stage = fg::commitment_stage(spec);
  json eqs = json::array();
  for (const auto& p : stage.equilibria) eqs.push_back({{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"mixed", p.mixed}});
  return {{"prize", spec.prize},
          {"f_lower", {sol.f_lower[0], sol.f_lower[1]}},
          {"f_upper", {sol.f_upper[0], sol.f_upper[1]}},
          {"value", {sol.value[0], sol.value[1]}},
          {"value_contested1", sol.value_contested1},
          {"regime", fg::to_string(sol.regime)},
          {"payoff1", sol.payoff1},
          {"payoff2", sol.payoff2},
          {"commitment_case", fg::to_string(stage.kind)},
          {"degenerate_indifference", stage.degenerate_indifference},
          {"commitment_equilibria", eqs}};
}

int cmd_contest(const Options& opt, const std::string& path) {
  const auto cfg = load(path);
  if (!cfg.contest) throw fg::ScenarioError("/contest", "scenario has no contest section");
  json doc;
  doc["scenario"] = cfg.name;
  doc["contests"] = json::array();
  for (double prize : fg::contest_prizes(cfg)) doc["contests"].push_back(contest_json(cfg.contest_spec(prize)));
  emit(opt, doc, [&](std::ostream& os) {
    for (const auto& c : doc["contests"]) {
      os << "prize " << fmt(c["prize"]) << ": " << c["regime"].get<std::string>() << '\n';
      print_table(os, {"attacker", "f_lower", "f_upper", "V"},
                  {{"1", fmt(c["f_lower"][0]), fmt(c["f_upper"][0]), fmt(c["value"][0])},
                   {"2", fmt(c["f_lower"][1]), fmt(c["f_upper"][1]), fmt(c["value"][1])}});
      os << "payoffs: " << fmt(c["payoff1"]) << ", " << fmt(c["payoff2"]) << '\n';
      os << "commitment stage: " << c["commitment_case"].get<std::string>() << '\n';
      for (const auto& e : c["commitment_equilibria"])
        os << "  alpha = (" << fmt(e["alpha1"]) << ", " << fmt(e["alpha2"]) << ")" << (e["mixed"].get<bool>() ? " mixed" : "")
           << '\n';
    }
  });
  return 0;
}

struct SimulateArgs {
  std::optional<std::uint64_t> episodes;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string csv;
  std::string events;
  unsigned threads = 0;
};

void print_metric_rows(std::ostream& os, const fg::AggregateReport& rep) {
  auto row = [](const std::string& name, const fg::Metric& m) {
    return std::vector<std::string>{name, fmt(m.mean), fmt(m.stderr_), m.analytic ? fmt(*m.analytic) : "-"};
  };
  print_table(os, {"metric", "mean", "stderr", "analytic"},
              {row("payoff_a", rep.payoff_a), row("payoff_b", rep.payoff_b), row("fees_a", rep.fees_a),
               row("attacker_spend", rep.attacker_spend), row("attack_frequency", rep.attack_frequency),
               row("front_run_frequency", rep.front_run_frequency)});
}

int cmd_simulate(const Options& opt, const std::string& path, const SimulateArgs& args) {
  auto cfg = load(path);
  if (args.episodes) {
    if (*args.episodes == 0) throw fg::ScenarioError("--episodes", "must be at least 1");
    cfg.episodes = *args.episodes;
  }
  fg::apply_seed_override(cfg, args.seed);
  const fg::ScenarioModel model(cfg);
  const auto results = fg::run_episodes(model, args.threads);
  const auto rep = fg::aggregate(model, results);
  const std::string text = rep.to_json().dump(2) + "\n";
  if (!args.out.empty()) {
    std::ofstream f(args.out, std::ios::binary);
    if (!f) throw fg::Error("cannot write '" + args.out + "'");
    f << text;
  }
  if (!args.csv.empty()) {
    std::ofstream f(args.csv, std::ios::binary);
    if (!f) throw fg::Error("cannot write '" + args.csv + "'");
    fg::write_episode_csv(f, model, results);
  }
  if (!args.events.empty()) {
    std::ofstream f(args.events, std::ios::binary);
    if (!f) throw fg::Error("cannot write '" + args.events + "'");
    for (std::uint64_t i = 0; i < cfg.episodes; ++i) {
      std::vector<std::string> lines;
      model.run_episode(i, &lines);
      for (const auto& l : lines) f << "{\"episode\":" << i << "," << l.substr(1) << '\n';
    }
  }
  if (opt.quiet) return 0;
  if (opt.format == "json") {
    std::cout << text;
    return 0;
  }
  std::cout << "scenario: " << rep.scenario << " (protocol " << fg::to_string(rep.protocol) << ", " << rep.episodes
            << " episodes, seed " << rep.seed << ")\n";
  std::cout << "classification: " << fg::to_string(rep.classification) << '\n';
  if (rep.regime) std::cout << "regime: " << fg::to_string(rep.regime->regime) << " (pi " << fmt(rep.regime->pi) << ")\n";
  if (rep.realized_tau_mean) std::cout << "mean realized tau: " << fmt(*rep.realized_tau_mean) << '\n';
  print_metric_rows(std::cout, rep);
  return 0;
}

int cmd_verify(const Options& opt, const std::string& path) {
  const auto cfg = load(path);
  const auto rep = fg::verify_scenario(cfg);
  json doc;
  doc["scenario"] = cfg.name;
  doc["ok"] = rep.ok();
  doc["checks"] = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : rep.checks) {
    const std::string status = c.skipped ? "skip" : (c.passed ? "ok" : "MISMATCH");
    doc["checks"].push_back({{"name", c.name}, {"status", status}, {"detail", c.detail}});
    rows.push_back({c.name, status, c.detail});
  }
  emit(opt, doc, [&](std::ostream& os) { print_table(os, {"check", "status", "detail"}, rows); });
  return rep.ok() ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Front-running games, commit-reveal protocol analysis and simulation"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_flag("--quiet,-q", opt.quiet, "Suppress normal output");

  std::string scenario;
  auto scenario_arg = [&](CLI::App* sub) { sub->add_option("scenario", scenario, "Scenario JSON file")->required(); };

  auto* solve = app.add_subcommand("solve", "Benchmark equilibrium and classification");
  scenario_arg(solve);
  auto* pi = app.add_subcommand("pi", "Guessing value, regime and k*");
  scenario_arg(pi);
  std::optional<std::size_t> k_max;
  pi->add_option("--k-max", k_max, "Largest commit set to consider");
  auto* contest = app.add_subcommand("contest", "Two-attacker contest and commitment stage");
  scenario_arg(contest);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run against the analytic predictions");
  scenario_arg(simulate);
  SimulateArgs sim;
  simulate->add_option("--episodes", sim.episodes, "Number of episodes");
  simulate->add_option("--seed", sim.seed, "Seed (overrides FRONTGUARD_SEED and the file)");
  simulate->add_option("--out", sim.out, "Write the JSON report here");
  simulate->add_option("--csv", sim.csv, "Write per-episode rows here");
  simulate->add_option("--events", sim.events, "Write the line-delimited event log here");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = hardware)");
  auto* verify = app.add_subcommand("verify", "Cross-check solvers against the brute-force oracles");
  scenario_arg(verify);

  // Subcommand options are accepted before or after the scenario.
  for (auto* sub : {solve, pi, contest, simulate, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(opt, scenario);
    if (*pi) return cmd_pi(opt, scenario, k_max);
    if (*contest) return cmd_contest(opt, scenario);
    if (*simulate) return cmd_simulate(opt, scenario, sim);
    if (*verify) return cmd_verify(opt, scenario);
  } catch (const fg::ScenarioError& e) {
    std::cerr << "error: " << scenario << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const fg::SpecError& e) {
    std::cerr << "error: " << scenario << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const fg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
