#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "frontguard/scenario.hpp"

namespace fg = frontguard;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string g1_text() { return read_file(std::string(FRONTGUARD_SCENARIO_DIR) + "/g1.json"); }

nlohmann::json g1_json() { return nlohmann::json::parse(g1_text()); }

std::string field_of(const std::string& text) {
  try {
    fg::parse_scenario(text);
  } catch (const fg::ScenarioError& e) {
    return e.field();
  }
  return "<accepted>";
}

struct SeedEnv {
  explicit SeedEnv(const char* v) { ::setenv("FRONTGUARD_SEED", v, 1); }
  ~SeedEnv() { ::unsetenv("FRONTGUARD_SEED"); }
};

}  // namespace

TEST(Scenario, LoadsG1) {
  const auto cfg = fg::load_scenario(std::string(FRONTGUARD_SCENARIO_DIR) + "/g1.json");
  EXPECT_EQ(cfg.name, "g1");
  EXPECT_EQ(cfg.protocol, fg::ProtocolMode::Plain);
  EXPECT_EQ(cfg.episodes, 10000u);
  EXPECT_EQ(cfg.seed, 20240601u);
  EXPECT_DOUBLE_EQ(cfg.game.costs().q, 0.5);
  EXPECT_EQ(cfg.protocol_labels(), (std::vector<std::string>{"m1", "m2"}));
}

TEST(Scenario, SyntaxErrorReportsLineAndColumn) {
  try {
    fg::parse_scenario("{\n  \"game\": {\n    \"states\": [\"s1\",, ]\n}");
    FAIL() << "accepted malformed JSON";
  } catch (const fg::ScenarioError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("column"), std::string::npos) << what;
  }
}

TEST(Scenario, UnknownFieldsAreRejected) {
  auto j = g1_json();
  j["game"]["costs"]["gas"] = 1;
  EXPECT_EQ(field_of(j.dump()), "/game/costs/gas");
  j = g1_json();
  j["extra"] = true;
  EXPECT_EQ(field_of(j.dump()), "/extra");
}

TEST(Scenario, FieldPathsOnBadValues) {
  auto j = g1_json();
  j["game"]["prior"] = {0.5, 0.6};
  EXPECT_EQ(field_of(j.dump()), "/game/prior");
  j = g1_json();
  j["game"]["costs"].erase("beta");
  EXPECT_EQ(field_of(j.dump()), "/game/costs/beta");
  j = g1_json();
  j["protocol"]["mode"] = "stealth";
  EXPECT_EQ(field_of(j.dump()), "/protocol/mode");
  j = g1_json();
  j["protocol"]["messages"] = {"m1", "m9"};
  EXPECT_EQ(field_of(j.dump()), "/protocol/messages/1");
  j = g1_json();
  j["delay_prob"] = 1.0;
  EXPECT_EQ(field_of(j.dump()), "/delay_prob");
  j = g1_json();
  j["episodes"] = 0;
  EXPECT_EQ(field_of(j.dump()), "/episodes");
}

TEST(Scenario, ScheduleAndContestSections) {
  auto j = g1_json();
  j["schedule"] = {{"kind", "alternating"}, {"commit_blocks", 2}, {"reveal_blocks", 1}};
  const auto cfg = fg::parse_scenario(j.dump());
  EXPECT_EQ(cfg.schedule.kind(), fg::PeriodSchedule::Kind::Alternating);
  EXPECT_EQ(cfg.schedule.commit_length(), 2u);

  const auto contest = fg::load_scenario(std::string(FRONTGUARD_SCENARIO_DIR) + "/contest_overlap.json");
  ASSERT_TRUE(contest.contest.has_value());
  EXPECT_DOUBLE_EQ(contest.contest->gamma2, 0.8);
  EXPECT_DOUBLE_EQ(*contest.contest->prize, 8.0);
}

TEST(Scenario, SeedOverridePrecedence) {
  auto cfg = fg::parse_scenario(g1_text());
  {
    SeedEnv env("42");
    fg::apply_seed_override(cfg, std::nullopt);
    EXPECT_EQ(cfg.seed, 42u);
    fg::apply_seed_override(cfg, 7);
    EXPECT_EQ(cfg.seed, 7u);
  }
  {
    SeedEnv env("-3");
    EXPECT_THROW(fg::apply_seed_override(cfg, std::nullopt), fg::ScenarioError);
  }
  auto untouched = fg::parse_scenario(g1_text());
  fg::apply_seed_override(untouched, std::nullopt);
  EXPECT_EQ(untouched.seed, 20240601u);
}

TEST(Scenario, MissingFileIsAScenarioError) {
  EXPECT_THROW(fg::load_scenario("/nonexistent/scenario.json"), fg::ScenarioError);
}
