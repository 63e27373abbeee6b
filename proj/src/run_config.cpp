#include "qsv/run_config.hpp"

#include <fstream>
#include <stdexcept>

namespace qsv {

StrategyKind parse_strategy(const std::string& token) {
  if (token == "lo") return StrategyKind::kLoOptimal;
  if (token == "uni") return StrategyKind::kUniLocc;
  if (token == "bi") return StrategyKind::kBiLocc;
  if (token == "global") return StrategyKind::kGlobal;
  throw std::invalid_argument("unknown strategy '" + token +
                              "' (expected lo, uni, bi or global)");
}

Direction parse_direction(const std::string& token) {
  if (token == "ab" || token == "alice_to_bob") return Direction::kAliceToBob;
  if (token == "ba" || token == "bob_to_alice") return Direction::kBobToAlice;
  throw std::invalid_argument("unknown direction '" + token +
                              "' (expected ab or ba)");
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: expected a JSON object");
  }
  static const char* const known[] = {
      "theta_deg",  "strategy", "direction",  "noise",     "measurements_per_trial",
      "trials",     "delta",    "master_seed", "output_dir", "curve_csv"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok |= (key == k);
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  RunConfig config;
  try {
    config.trial.theta_deg = j.at("theta_deg").get<double>();
    config.trial.strategy =
        parse_strategy(j.at("strategy").get<std::string>());
    if (j.contains("direction")) {
      config.trial.direction =
          parse_direction(j.at("direction").get<std::string>());
    }
    if (j.contains("noise")) {
      config.trial.noise = NoiseModel::from_json(j.at("noise"));
    }
    if (j.contains("measurements_per_trial")) {
      config.trial.measurements_per_trial =
          j.at("measurements_per_trial").get<std::size_t>();
    }
    if (j.contains("trials")) {
      config.trial.trials = j.at("trials").get<std::size_t>();
    }
    if (j.contains("delta")) config.trial.delta = j.at("delta").get<double>();
    if (j.contains("master_seed")) {
      config.trial.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
      config.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("curve_csv")) {
      config.curve_csv = j.at("curve_csv").get<std::string>();
    }
  } catch (const nlohmann::json::exception& error) {
    throw std::invalid_argument("config: " + std::string(error.what()));
  }
  config.trial.validate();
  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open config file " + file.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& error) {
    throw std::invalid_argument("config: " + std::string(error.what()));
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["theta_deg"] = trial.theta_deg;
  j["strategy"] = to_string(trial.strategy);
  if (trial.strategy == StrategyKind::kUniLocc) {
    j["direction"] = to_string(trial.direction);
  }
  j["noise"] = trial.noise.to_json();
  j["measurements_per_trial"] = trial.measurements_per_trial;
  j["trials"] = trial.trials;
  j["delta"] = trial.delta;
  j["master_seed"] = trial.master_seed;
  if (output_dir) j["output_dir"] = output_dir->string();
  j["curve_csv"] = curve_csv;
  return j;
}

}  // namespace qsv
