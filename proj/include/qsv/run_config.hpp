#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "qsv/simulator.hpp"

namespace qsv {

/// A simulation run description as read from a JSON config file. The schema
/// mirrors TrialConfig plus output locations; unknown keys are rejected so a
/// typo cannot silently fall back to a default.
struct RunConfig {
  TrialConfig trial;
  std::optional<std::filesystem::path> output_dir;
  std::string curve_csv = "curve.csv";

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& file);
  nlohmann::json to_json() const;
};

StrategyKind parse_strategy(const std::string& token);
Direction parse_direction(const std::string& token);

}  // namespace qsv
