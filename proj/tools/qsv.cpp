// qsv: strategy inspection, sample-complexity bounds, Monte Carlo runs,
// feed-forward protocol sessions and record analysis for two-qubit state
// verification.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsv/errors.hpp"
#include "qsv/protocol.hpp"
#include "qsv/run_config.hpp"
#include "qsv/simulator.hpp"
#include "qsv/statistics.hpp"
#include "qsv/strategies.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitProtocol = 4;

std::string g9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("QSV_OUT_DIR")) return env;
  return ".";
}

qsv::Strategy build(const std::string& strategy, double theta,
                    const std::string& direction) {
  const qsv::StrategyKind kind = qsv::parse_strategy(strategy);
  qsv::TrialConfig config;
  config.theta_deg = theta;
  config.strategy = kind;
  config.direction = qsv::parse_direction(direction);
  return config.build_strategy();
}

int cmd_info(const std::string& strategy, double theta,
             const std::string& direction, bool json) {
  const qsv::Strategy s = build(strategy, theta, direction);
  const auto spectrum = qsv::eigh(s.omega()).eigenvalues;
  if (json) {
    nlohmann::json j = s.to_json();
    j["spectrum"] = spectrum;
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "strategy: " << qsv::to_string(s.kind()) << '\n'
            << "theta: " << g9(s.theta_deg()) << " deg\n"
            << "lambda2: " << g9(s.lambda2()) << '\n'
            << "constant factor: " << g9(s.constant_factor()) << '\n';
  if (s.has_settings()) {
    std::cout << "setting priors:";
    for (const auto& setting : s.settings()) {
      std::cout << ' ' << qsv::to_string(setting.label) << '='
                << g9(setting.probability);
    }
    std::cout << '\n';
  }
  std::cout << "omega spectrum:";
  for (double value : spectrum) std::cout << ' ' << g9(value);
  std::cout << '\n';
  if (s.entangled_measurement()) {
    std::cout << "note: entangled measurement; not executable by the "
                 "feed-forward protocol\n";
  }
  return kExitOk;
}

int cmd_bound(double epsilon, double delta, const std::string& strategy,
              double theta, const std::string& direction, bool json) {
  const qsv::StrategyKind kind = qsv::parse_strategy(strategy);
  double lambda2 = 0.0;
  if (kind != qsv::StrategyKind::kGlobal) {
    lambda2 = build(strategy, theta, direction).lambda2();
  }
  const qsv::SampleComplexity bound =
      qsv::required_measurements(epsilon, delta, lambda2);
  if (json) {
    std::cout << nlohmann::json{{"strategy", strategy},
                                {"lambda2", lambda2},
                                {"epsilon", epsilon},
                                {"delta", delta},
                                {"exact", bound.exact},
                                {"minimum", bound.minimum},
                                {"asymptotic", bound.asymptotic}}
                     .dump(2)
              << '\n';
    return kExitOk;
  }
  std::cout << "lambda2: " << g9(lambda2) << '\n'
            << "exact n: " << g9(bound.exact) << " (schedule "
            << bound.minimum << ")\n"
            << "asymptotic n: " << g9(bound.asymptotic) << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& config_file, const std::string& preset,
                 const std::string& out_flag, bool ideal,
                 std::optional<std::uint64_t> seed, bool json) {
  const qsv::NoiseModel preset_noise =
      ideal ? qsv::NoiseModel::ideal()
            : qsv::NoiseModel::depolarizing(qsv::kDemoVisibility);
  if (!preset.empty()) {
    const std::filesystem::path out =
        out_flag.empty() ? default_out_dir() : out_flag;
    const std::uint64_t master_seed = seed.value_or(1);
    qsv::FigureArtifacts artifacts;
    if (preset == "fig3") {
      artifacts = qsv::reproduce_fig3(out, preset_noise, master_seed);
    } else if (preset == "fig4") {
      artifacts = qsv::reproduce_fig4(out, preset_noise, master_seed);
    } else {
      throw std::invalid_argument("unknown preset '" + preset +
                                  "' (expected fig3 or fig4)");
    }
    nlohmann::json j;
    j["preset"] = preset;
    j["noise"] = preset_noise.to_json();
    j["master_seed"] = master_seed;
    auto files = nlohmann::json::array();
    for (const auto& file : artifacts.files) files.push_back(file.string());
    j["files"] = files;
    auto summaries = nlohmann::json::array();
    for (const auto& summary : artifacts.summaries) {
      summaries.push_back(summary.to_json());
    }
    j["summaries"] = summaries;
    std::cout << j.dump(json ? 2 : -1) << '\n';
    return kExitOk;
  }

  qsv::RunConfig config = qsv::RunConfig::from_file(config_file);
  if (seed) config.trial.master_seed = *seed;
  if (ideal) config.trial.noise = qsv::NoiseModel::ideal();
  std::filesystem::path out = default_out_dir();
  if (config.output_dir) out = *config.output_dir;
  if (!out_flag.empty()) out = out_flag;
  std::filesystem::create_directories(out);

  const qsv::RunSummary summary = qsv::run_experiment(config.trial);
  const std::filesystem::path csv = out / config.curve_csv;
  qsv::write_figure_csv(csv, {summary});
  nlohmann::json j = summary.to_json();
  j["curve_csv"] = csv.string();
  j["master_seed"] = config.trial.master_seed;
  std::cout << j.dump(json ? 2 : -1) << '\n';
  return kExitOk;
}

int cmd_protocol(std::size_t rounds, double theta,
                 const std::string& strategy, const std::string& direction,
                 const std::string& noise_kind, double noise_param,
                 std::optional<std::uint64_t> seed, bool serialized,
                 const std::string& out_flag, std::string transcript_file,
                 std::string summary_file, std::string record_file,
                 bool json) {
  qsv::SessionConfig config;
  config.theta_deg = theta;
  config.strategy = qsv::parse_strategy(strategy);
  config.direction = qsv::parse_direction(direction);
  config.rounds = rounds;
  config.master_seed = seed.value_or(1);
  if (noise_kind == "ideal") {
    config.noise = qsv::NoiseModel::ideal();
  } else if (noise_kind == "depolarizing") {
    config.noise = qsv::NoiseModel::depolarizing(noise_param);
  } else if (noise_kind == "dephasing") {
    config.noise = qsv::NoiseModel::dephasing(noise_param);
  } else if (noise_kind == "misalignment") {
    config.noise = qsv::NoiseModel::misalignment(noise_param);
  } else {
    throw std::invalid_argument("unknown noise kind '" + noise_kind + "'");
  }

  const qsv::SessionResult result = qsv::run_session(
      config, serialized ? qsv::ChannelKind::kByteStream
                         : qsv::ChannelKind::kInMemory);

  const std::filesystem::path out =
      out_flag.empty() ? default_out_dir() : out_flag;
  std::filesystem::create_directories(out);
  if (transcript_file.empty()) transcript_file = "transcript.jsonl";
  if (summary_file.empty()) summary_file = "session.json";
  qsv::write_transcript_jsonl(out / transcript_file, result.transcript);
  nlohmann::json summary = result.summary_json();
  summary["theta_deg"] = config.theta_deg;
  summary["strategy"] = qsv::to_string(config.strategy);
  summary["master_seed"] = config.master_seed;
  summary["channel"] = serialized ? "byte_stream" : "in_memory";
  if (result.realized) {
    summary["realized_frobenius_distance"] =
        result.realized->frobenius_distance_to_intended;
    summary["realized_low_confidence"] = result.realized->low_confidence;
  }
  {
    std::ofstream sout(out / summary_file, std::ios::binary);
    if (!sout) {
      throw std::runtime_error("cannot open " +
                               (out / summary_file).string());
    }
    sout << summary.dump(2) << '\n';
  }
  if (!record_file.empty()) {
    std::string bits;
    bits.reserve(result.record.bits.size());
    for (std::uint8_t bit : result.record.bits) bits.push_back(bit ? '1' : '0');
    nlohmann::json record = {{"theta_deg", config.theta_deg},
                             {"strategy", qsv::to_string(config.strategy)},
                             {"direction", qsv::to_string(config.direction)},
                             {"delta", config.delta},
                             {"master_seed", config.master_seed},
                             {"bits", bits}};
    std::ofstream rout(out / record_file, std::ios::binary);
    if (!rout) {
      throw std::runtime_error("cannot open " + (out / record_file).string());
    }
    rout << record.dump(2) << '\n';
  }

  std::cout << summary.dump(json ? 2 : -1) << '\n';
  return result.aborted ? kExitProtocol : kExitOk;
}

int cmd_analyze(const std::string& record_file, std::optional<double> delta,
                std::optional<double> lambda2_flag,
                const std::string& curve_file, bool json) {
  std::ifstream in(record_file);
  if (!in) {
    throw std::runtime_error("cannot open record file " + record_file);
  }
  nlohmann::json record;
  try {
    in >> record;
  } catch (const nlohmann::json::parse_error& error) {
    throw std::runtime_error("unreadable record file: " +
                             std::string(error.what()));
  }

  const std::string bits_str = record.at("bits").get<std::string>();
  std::vector<std::uint8_t> bits;
  bits.reserve(bits_str.size());
  for (char c : bits_str) {
    if (c != '0' && c != '1') {
      throw std::runtime_error("record bits must be a string of 0s and 1s");
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  if (bits.empty()) throw std::runtime_error("record holds no outcomes");

  double lambda2 = 0.0;
  if (lambda2_flag) {
    lambda2 = *lambda2_flag;
  } else {
    const std::string direction =
        record.value("direction", std::string("ab"));
    lambda2 = build(record.at("strategy").get<std::string>(),
                    record.at("theta_deg").get<double>(), direction)
                  .lambda2();
  }
  const double d = delta.value_or(record.value("delta", 0.05));

  const std::size_t n = bits.size();
  std::size_t m = 0;
  for (std::uint8_t bit : bits) m += bit;
  const qsv::VerificationVerdict verdict = qsv::make_verdict(n, m, d, lambda2);

  if (!curve_file.empty()) {
    const auto points = qsv::inverse_infidelity_curve(bits, lambda2, d);
    std::ofstream out(curve_file, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open " + curve_file + " for writing");
    }
    out << "n,inv_epsilon\n";
    for (const auto& point : points) {
      out << point.n << ',' << g9(point.inv_epsilon) << '\n';
    }
  }

  if (json) {
    nlohmann::json j = {{"n", verdict.n},
                        {"m", verdict.m},
                        {"delta", verdict.delta},
                        {"lambda2", lambda2},
                        {"accept_frequency", verdict.accept_frequency()},
                        {"claim", verdict.has_claim()}};
    j["epsilon"] =
        verdict.has_claim() ? nlohmann::json(*verdict.epsilon) : nullptr;
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "n: " << verdict.n << "\nm: " << verdict.m
            << "\naccept frequency: " << g9(verdict.accept_frequency())
            << '\n';
  if (verdict.has_claim()) {
    std::cout << "epsilon: " << g9(*verdict.epsilon) << '\n'
              << "verdict: fidelity >= " << g9(1.0 - *verdict.epsilon)
              << " with confidence " << g9(1.0 - verdict.delta) << '\n';
  } else {
    std::cout << "verdict: no claim (accept frequency below every "
                 "admissible threshold at this confidence)\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-qubit quantum state verification: strategies, bounds, Monte "
      "Carlo simulation and the adaptive feed-forward protocol"};
  app.require_subcommand(1);

  std::string strategy = "bi";
  std::string direction = "ab";
  double theta = 60.0;
  bool as_json = false;

  auto* info = app.add_subcommand("info", "Strategy figures of merit");
  info->add_option("--theta", theta, "Target angle in degrees");
  info->add_option("--strategy", strategy, "lo, uni, bi or global");
  info->add_option("--direction", direction, "uni feed-forward: ab or ba");
  info->add_flag("--json", as_json, "Machine-readable output");

  double epsilon = 0.01;
  double delta = 0.05;
  auto* bound = app.add_subcommand(
      "bound", "Measurements required for an (epsilon, delta) verdict");
  bound->add_option("--epsilon", epsilon, "Infidelity bound")->required();
  bound->add_option("--delta", delta, "1 - confidence")->required();
  bound->add_option("--strategy", strategy, "lo, uni, bi or global");
  bound->add_option("--theta", theta, "Target angle in degrees");
  bound->add_option("--direction", direction, "uni feed-forward: ab or ba");
  bound->add_flag("--json", as_json, "Machine-readable output");

  std::string config_file;
  std::string preset;
  std::string out_dir;
  bool ideal = false;
  std::optional<std::uint64_t> seed;
  auto* simulate =
      app.add_subcommand("simulate", "Monte Carlo verification runs");
  simulate->add_option("config", config_file, "Run config JSON file");
  simulate->add_option("--preset", preset,
                       "fig3 or fig4 (the paper-scale figure bundles)");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_flag("--ideal", ideal, "Ideal source instead of the demo "
                                       "depolarizing profile");
  simulate->add_option("--seed", seed, "Master seed override");
  simulate->add_flag("--json", as_json, "Pretty-print the summary");

  std::size_t rounds = 100;
  std::string noise_kind = "ideal";
  double noise_param = 1.0;
  bool serialized = false;
  std::string transcript_file;
  std::string summary_file;
  std::string record_file;
  auto* protocol = app.add_subcommand(
      "protocol", "Run the adaptive feed-forward session");
  protocol->add_option("--rounds", rounds, "Rounds to execute");
  protocol->add_option("--theta", theta, "Target angle in degrees");
  protocol->add_option("--strategy", strategy, "uni or bi");
  protocol->add_option("--direction", direction, "uni feed-forward: ab or ba");
  protocol->add_option("--noise-kind", noise_kind,
                       "ideal, depolarizing, dephasing or misalignment");
  protocol->add_option("--noise-param", noise_param,
                       "visibility / p / dtheta for the chosen noise");
  protocol->add_option("--seed", seed, "Session master seed");
  protocol->add_flag("--serialized", serialized,
                     "Byte-stream channels instead of in-memory");
  protocol->add_option("--out", out_dir, "Output directory");
  protocol->add_option("--transcript", transcript_file,
                       "Transcript JSONL filename");
  protocol->add_option("--summary", summary_file, "Summary JSON filename");
  protocol->add_option("--record", record_file,
                       "Also write the trial record JSON");
  protocol->add_flag("--json", as_json, "Pretty-print the summary");

  std::string analyze_record;
  std::optional<double> analyze_delta;
  std::optional<double> lambda2_flag;
  std::string curve_file;
  auto* analyze = app.add_subcommand(
      "analyze", "Verdict for a recorded accept/reject sequence");
  analyze->add_option("record", analyze_record, "Trial record JSON file")
      ->required();
  analyze->add_option("--delta", analyze_delta, "1 - confidence");
  analyze->add_option("--lambda2", lambda2_flag,
                      "Override the strategy lambda2");
  analyze->add_option("--curve", curve_file, "Per-prefix 1/epsilon CSV");
  analyze->add_flag("--json", as_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
    if (info->parsed()) return cmd_info(strategy, theta, direction, as_json);
    if (bound->parsed()) {
      return cmd_bound(epsilon, delta, strategy, theta, direction, as_json);
    }
    if (simulate->parsed()) {
      if (config_file.empty() == preset.empty()) {
        throw std::invalid_argument(
            "simulate needs exactly one of a config file or --preset");
      }
      return cmd_simulate(config_file, preset, out_dir, ideal, seed, as_json);
    }
    if (protocol->parsed()) {
      return cmd_protocol(rounds, theta, strategy, direction, noise_kind,
                          noise_param, seed, serialized, out_dir,
                          transcript_file, summary_file, record_file,
                          as_json);
    }
    if (analyze->parsed()) {
      return cmd_analyze(analyze_record, analyze_delta, lambda2_flag,
                         curve_file, as_json);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const qsv::NoClaimError& error) {
    std::cout << "verdict: no claim (" << error.what() << ")\n";
    return kExitOk;
  } catch (const qsv::ProtocolError& error) {
    std::cerr << "protocol error: " << error.what() << '\n';
    return kExitProtocol;
  } catch (const qsv::RangeError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& error) {
    std::cerr << "io error: " << error.what() << '\n';
    return kExitIo;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  }
}
