#include <catch2/catch_amalgamated.hpp>

#include "qsv/run_config.hpp"

using namespace qsv;
using nlohmann::json;

TEST_CASE("run config parses a full document") {
  const json j = {{"theta_deg", 70.0},
                  {"strategy", "uni"},
                  {"direction", "ba"},
                  {"noise", {{"kind", "depolarizing"}, {"visibility", 0.9}}},
                  {"measurements_per_trial", 100},
                  {"trials", 10},
                  {"delta", 0.1},
                  {"master_seed", 77},
                  {"output_dir", "out"},
                  {"curve_csv", "c.csv"}};
  const RunConfig config = RunConfig::from_json(j);
  REQUIRE(config.trial.theta_deg == 70.0);
  REQUIRE(config.trial.strategy == StrategyKind::kUniLocc);
  REQUIRE(config.trial.direction == Direction::kBobToAlice);
  REQUIRE(config.trial.noise.kind() == NoiseModel::Kind::kDepolarizing);
  REQUIRE(config.trial.noise.parameter() == 0.9);
  REQUIRE(config.trial.measurements_per_trial == 100);
  REQUIRE(config.trial.trials == 10);
  REQUIRE(config.trial.delta == 0.1);
  REQUIRE(config.trial.master_seed == 77);
  REQUIRE(config.output_dir.has_value());
  REQUIRE(config.curve_csv == "c.csv");
}

TEST_CASE("run config defaults") {
  const RunConfig config =
      RunConfig::from_json({{"theta_deg", 60.0}, {"strategy", "bi"}});
  REQUIRE(config.trial.measurements_per_trial == 200);
  REQUIRE(config.trial.trials == 50);
  REQUIRE(config.trial.delta == 0.05);
  REQUIRE(config.trial.noise.kind() == NoiseModel::Kind::kIdeal);
  REQUIRE_FALSE(config.output_dir.has_value());
}

TEST_CASE("unknown keys are rejected") {
  REQUIRE_THROWS_AS(
      RunConfig::from_json(
          {{"theta_deg", 60.0}, {"strategy", "bi"}, {"thetadeg", 1.0}}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      RunConfig::from_json({{"theta_deg", 60.0},
                            {"strategy", "bi"},
                            {"noise", {{"kind", "ideal"}, {"v", 1.0}}}}),
      std::invalid_argument);
}

TEST_CASE("schema violations") {
  REQUIRE_THROWS_AS(RunConfig::from_json({{"strategy", "bi"}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      RunConfig::from_json({{"theta_deg", 60.0}, {"strategy", "nope"}}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      RunConfig::from_json({{"theta_deg", 60.0},
                            {"strategy", "bi"},
                            {"noise", {{"kind", "warp"}}}}),
      std::invalid_argument);
  // out-of-range values surface as domain errors from validation
  REQUIRE_THROWS_AS(
      RunConfig::from_json(
          {{"theta_deg", 60.0}, {"strategy", "bi"}, {"delta", 2.0}}),
      std::domain_error);
}

TEST_CASE("config json round trip") {
  const json j = {{"theta_deg", 60.0},
                  {"strategy", "uni"},
                  {"direction", "ab"},
                  {"noise", {{"kind", "dephasing"}, {"p", 0.2}}},
                  {"trials", 5}};
  const RunConfig config = RunConfig::from_json(j);
  const RunConfig reparsed = RunConfig::from_json(config.to_json());
  REQUIRE(reparsed.trial.noise.kind() == NoiseModel::Kind::kDephasing);
  REQUIRE(reparsed.trial.trials == 5);
  REQUIRE(reparsed.trial.strategy == StrategyKind::kUniLocc);
}

TEST_CASE("custom noise state parses from entries") {
  auto entries = json::array();
  for (int i = 0; i < 16; ++i) {
    entries.push_back({i % 5 == 0 ? 0.25 : 0.0, 0.0});
  }
  const RunConfig config = RunConfig::from_json(
      {{"theta_deg", 60.0},
       {"strategy", "bi"},
       {"noise", {{"kind", "custom"}, {"entries", entries}}}});
  REQUIRE(config.trial.noise.kind() == NoiseModel::Kind::kCustom);
}
