#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "frontguard/simulation.hpp"

namespace fg = frontguard;

namespace {

fg::ScenarioConfig fixture(const std::string& name) {
  return fg::load_scenario(std::string(FRONTGUARD_SCENARIO_DIR) + "/" + name + ".json");
}

fg::ScenarioConfig g1_benchmark(std::uint64_t episodes) {
  auto cfg = fixture("g1");
  cfg.protocol = fg::ProtocolMode::None;
  cfg.episodes = episodes;
  return cfg;
}

}  // namespace

TEST(EpisodeSeed, MatchesReferenceVectors) {
  std::ifstream in(std::string(FRONTGUARD_FIXTURE_DIR) + "/digest_vectors.json");
  const auto doc = nlohmann::json::parse(in);
  ASSERT_FALSE(doc["episode_seed"].empty());
  for (const auto& v : doc["episode_seed"]) {
    const auto seed = std::stoull(v["seed"].get<std::string>());
    const auto index = std::stoull(v["index"].get<std::string>());
    EXPECT_EQ(fg::episode_seed(seed, index), std::stoull(v["episode_seed"].get<std::string>())) << v.dump();
  }
}

TEST(Simulation, G1BenchmarkMatchesClosedForm) {
  const fg::ScenarioModel model(g1_benchmark(100000));
  const auto report = fg::run_monte_carlo(model);
  // Front-run: A nets -1, B nets 6. Otherwise A nets 9, B nets -2.
  EXPECT_NEAR(report.payoff_a.mean, 4.0, 3.0 * report.payoff_a.stderr_);
  EXPECT_NEAR(report.payoff_b.mean, 2.0, 3.0 * report.payoff_b.stderr_);
  EXPECT_NEAR(report.front_run_frequency.mean, 0.5, 3.0 * report.front_run_frequency.stderr_);
  EXPECT_DOUBLE_EQ(report.attack_frequency.mean, 1.0);
  EXPECT_DOUBLE_EQ(*report.payoff_a.analytic, 4.0);
}

TEST(Simulation, G1BenchmarkEpisodeValues) {
  const fg::ScenarioModel model(g1_benchmark(200));
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto r = model.run_episode(i);
    EXPECT_EQ(r.a_action, "send:" + model.config().game.messages()[r.state]);
    if (r.front_run_occurred) {
      EXPECT_DOUBLE_EQ(r.payoff_a, -1.0);
      EXPECT_DOUBLE_EQ(r.payoff_b, 6.0);
    } else {
      EXPECT_DOUBLE_EQ(r.payoff_a, 9.0);
      EXPECT_DOUBLE_EQ(r.payoff_b, -2.0);
    }
  }
}

TEST(Simulation, G1PlainIsExactlySevenPointOne) {
  auto cfg = fixture("g1");
  cfg.episodes = 500;
  const fg::ScenarioModel model(cfg);
  const auto results = fg::run_episodes(model);
  for (const auto& r : results) {
    EXPECT_NEAR(r.payoff_a, -1.0 + 0.9 * 9.0, 1e-12);
    EXPECT_FALSE(r.attack_attempted);
    EXPECT_FALSE(r.front_run_occurred);
    EXPECT_DOUBLE_EQ(r.payoff_b, 0.0);
  }
  const auto report = fg::aggregate(model, results);
  EXPECT_DOUBLE_EQ(report.payoff_a.stderr_, 0.0);
  EXPECT_EQ(report.payoff_a.to_json()["exact_match"], true);
  EXPECT_TRUE(report.payoff_a.to_json()["z"].is_null());
}

TEST(Simulation, ObfuscatedHardRegimeIsNeverFrontRun) {
  auto cfg = fixture("g1_obfuscated");
  cfg.episodes = 1000;
  const fg::ScenarioModel model(cfg);
  for (const auto& r : fg::run_episodes(model)) {
    EXPECT_FALSE(r.front_run_occurred);
    ASSERT_TRUE(r.realized_tau.has_value());
    EXPECT_GE(*r.realized_tau, 0.0);
    EXPECT_LE(*r.realized_tau, 1.0);
  }
}

TEST(Simulation, ObfuscationDoesNotHurtPairedEpisodes) {
  // Same episode seeds with and without the protocol.
  auto on = fixture("g1_obfuscated");
  on.episodes = 2000;
  auto off = on;
  off.protocol = fg::ProtocolMode::None;
  const auto with = fg::run_episodes(fg::ScenarioModel(on));
  const auto without = fg::run_episodes(fg::ScenarioModel(off));
  ASSERT_EQ(with.size(), without.size());
  double diff = 0.0;
  int acted = 0;
  for (std::size_t i = 0; i < with.size(); ++i) {
    EXPECT_EQ(with[i].state, without[i].state);
    EXPECT_LE(with[i].front_run_occurred, without[i].front_run_occurred);
    if (with[i].a_action == "none") continue;  // A did not observe the opportunity
    EXPECT_NEAR(with[i].payoff_a, 7.1, 1e-12);
    diff += with[i].payoff_a - without[i].payoff_a;
    ++acted;
  }
  EXPECT_GT(acted, 0);
  EXPECT_GT(diff, 0.0);
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
  auto cfg = fixture("contest_overlap");
  cfg.episodes = 400;
  const fg::ScenarioModel model(cfg);
  const auto one = fg::run_monte_carlo(model, 1).to_json();
  const auto four = fg::run_monte_carlo(model, 4).to_json();
  EXPECT_EQ(one.dump(), four.dump());
}

TEST(Simulation, SeedChangesOutcomes) {
  auto a = g1_benchmark(300);
  auto b = a;
  b.seed += 1;
  EXPECT_NE(fg::run_monte_carlo(fg::ScenarioModel(a)).to_json().dump(),
            fg::run_monte_carlo(fg::ScenarioModel(b)).to_json().dump());
}

TEST(Simulation, CsvLayout) {
  const fg::ScenarioModel model(g1_benchmark(3));
  std::ostringstream out;
  fg::write_episode_csv(out, model, fg::run_episodes(model));
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "episode,state,a_action,b_action,front_run,payoff_a,payoff_b,fees_a,fees_b");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Simulation, EventLogIsLineJson) {
  const fg::ScenarioModel model(fixture("g1"));
  std::vector<std::string> events;
  model.run_episode(0, &events);
  ASSERT_GE(events.size(), 2u);
  const auto first = nlohmann::json::parse(events.front());
  EXPECT_EQ(first["kind"], "commit");
  const auto last = nlohmann::json::parse(events.back());
  EXPECT_EQ(last["kind"], "reveal");
  EXPECT_EQ(last["status"], "executed");
}

TEST(Simulation, ReportJsonShape) {
  const fg::ScenarioModel model(fixture("g1"));
  auto cfg = model.config();
  cfg.episodes = 50;
  const auto j = fg::run_monte_carlo(fg::ScenarioModel(cfg)).to_json();
  for (const char* key : {"scenario", "protocol", "episodes", "seed", "classification", "regime", "pi", "threshold",
                          "metrics", "realized_tau_mean", "details"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["regime"], "GuessingHard");
  EXPECT_EQ(j["metrics"].size(), 6u);
}

TEST(Simulation, ContestProtocolLowersSpend) {
  auto on = fixture("contest_overlap");
  on.episodes = 4000;
  auto off = on;
  off.protocol = fg::ProtocolMode::None;
  const auto a = fg::run_monte_carlo(fg::ScenarioModel(on));
  const auto b = fg::run_monte_carlo(fg::ScenarioModel(off));
  const double se = std::hypot(a.attacker_spend.stderr_, b.attacker_spend.stderr_);
  EXPECT_LE(a.attacker_spend.mean - b.attacker_spend.mean + 3.0 * se, 0.0);
}
