#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsv/simulator.hpp"

using namespace qsv;
using Catch::Matchers::WithinAbs;

namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path temp_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "qsv_tests" / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("apply_noise fidelities match their closed forms") {
  const PureState psi = target_state(60.0);

  REQUIRE_THAT(fidelity(apply_noise(60.0, NoiseModel::ideal()), psi),
               WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(
      fidelity(apply_noise(60.0, NoiseModel::depolarizing(0.96)), psi),
      WithinAbs(0.97, 1e-12));

  const double d2 = radians(2.0);
  REQUIRE_THAT(
      fidelity(apply_noise(60.0, NoiseModel::misalignment(2.0)), psi),
      WithinAbs(std::cos(d2) * std::cos(d2), 1e-12));

  const double p = 0.3;
  const double s2t = std::sin(2.0 * radians(60.0));
  REQUIRE_THAT(fidelity(apply_noise(60.0, NoiseModel::dephasing(p)), psi),
               WithinAbs(1.0 - p * s2t * s2t / 2.0, 1e-12));

  const DensityMatrix handmade = DensityMatrix::maximally_mixed();
  REQUIRE_THAT(fidelity(apply_noise(60.0, NoiseModel::custom(handmade)), psi),
               WithinAbs(0.25, 1e-12));
}

TEST_CASE("noise parameter validation") {
  REQUIRE_THROWS_AS(NoiseModel::depolarizing(1.2), std::domain_error);
  REQUIRE_THROWS_AS(NoiseModel::dephasing(-0.1), std::domain_error);
  Mat4 junk = Mat4::Identity();  // trace 4
  REQUIRE_THROWS_AS(NoiseModel::custom(DensityMatrix(junk)),
                    std::invalid_argument);
}

TEST_CASE("ideal states are never rejected") {
  const DensityMatrix ideal = apply_noise(60.0, NoiseModel::ideal());
  SplitMix64 rng(19);
  for (StrategyKind kind :
       {StrategyKind::kLoOptimal, StrategyKind::kUniLocc,
        StrategyKind::kBiLocc, StrategyKind::kGlobal}) {
    TrialConfig config;
    config.strategy = kind;
    const Strategy strategy = config.build_strategy();
    for (int i = 0; i < 1000; ++i) {
      REQUIRE(run_round(strategy, ideal, rng).accept);
    }
  }
}

TEST_CASE("marginal accept law on the maximally mixed state") {
  // tr(Omega_uni)/4 = 1/2 at any theta in range.
  const Strategy uni = build_uni_locc(60.0);
  const DensityMatrix mixed = DensityMatrix::maximally_mixed();
  SplitMix64 rng(4);
  const int rounds = 100000;
  int accepts = 0;
  for (int i = 0; i < rounds; ++i) {
    accepts += run_round(uni, mixed, rng).accept ? 1 : 0;
  }
  const double freq = static_cast<double>(accepts) / rounds;
  const double sigma = std::sqrt(0.25 / rounds);
  REQUIRE(std::abs(freq - 0.5) < 3.0 * sigma);
}

TEST_CASE("bi-locc accept probability under depolarizing noise") {
  const Strategy bi = build_bi_locc(60.0);
  const DensityMatrix sigma = apply_noise(60.0, NoiseModel::depolarizing(0.9));
  REQUIRE_THAT(expectation(bi.omega(), sigma), WithinAbs(0.95, 1e-12));
  SplitMix64 rng(6);
  const int rounds = 100000;
  int accepts = 0;
  for (int i = 0; i < rounds; ++i) {
    accepts += run_round(bi, sigma, rng).accept ? 1 : 0;
  }
  const double freq = static_cast<double>(accepts) / rounds;
  REQUIRE(std::abs(freq - 0.95) < 3.0 * std::sqrt(0.95 * 0.05 / rounds));
}

TEST_CASE("setting-level and effective sampling share the accept law") {
  const Strategy uni = build_uni_locc(70.0);
  const DensityMatrix sigma = apply_noise(70.0, NoiseModel::depolarizing(0.92));
  const double p = expectation(uni.omega(), sigma);
  SplitMix64 rng_a(21);
  SplitMix64 rng_b(22);
  const int rounds = 50000;
  int level = 0;
  int effective = 0;
  for (int i = 0; i < rounds; ++i) {
    level +=
        run_round(uni, sigma, rng_a, SamplingMode::kSettingLevel).accept;
    effective +=
        run_round(uni, sigma, rng_b, SamplingMode::kEffectiveOperator).accept;
  }
  const double sigma_diff = std::sqrt(2.0 * p * (1.0 - p) / rounds);
  REQUIRE(std::abs(level - effective) / static_cast<double>(rounds) <
          4.0 * sigma_diff);
}

TEST_CASE("trials replay deterministically") {
  TrialConfig config;
  config.strategy = StrategyKind::kUniLocc;
  config.noise = NoiseModel::depolarizing(0.9);
  config.master_seed = 99;

  const TrialRecord a = run_trial(config, 3);
  const TrialRecord b = run_trial(config, 3);
  REQUIRE(a.bits == b.bits);
  REQUIRE(a.setting_trace == b.setting_trace);
  REQUIRE(a.seed == b.seed);

  const TrialRecord other = run_trial(config, 4);
  REQUIRE(a.seed != other.seed);
  REQUIRE(a.bits != other.bits);
}

TEST_CASE("ideal trials accept everything") {
  TrialConfig config;
  config.strategy = StrategyKind::kBiLocc;
  const TrialRecord record = run_trial(config, 0);
  REQUIRE(record.accept_count() == config.measurements_per_trial);
}

TEST_CASE("depolarized bi trial accept count near its binomial mean") {
  TrialConfig config;
  config.strategy = StrategyKind::kBiLocc;
  config.noise = NoiseModel::depolarizing(0.9);
  config.master_seed = 12;
  const TrialRecord record = run_trial(config, 0);
  const double mean = 0.95 * 200.0;
  const double sd = std::sqrt(200.0 * 0.95 * 0.05);
  REQUIRE(std::abs(static_cast<double>(record.accept_count()) - mean) <
          3.0 * sd);
}

TEST_CASE("ideal experiment reproduces the closed-form curves") {
  TrialConfig config;
  config.strategy = StrategyKind::kBiLocc;
  config.trials = 10;
  const RunSummary summary = run_experiment(config);

  REQUIRE_THAT(summary.accept_frequency, WithinAbs(1.0, 1e-15));
  REQUIRE(summary.all_accept_prefix_slope.has_value());
  REQUIRE_THAT(*summary.all_accept_prefix_slope,
               WithinAbs(0.221006277, 1e-6));
  REQUIRE_THAT(summary.theory_slope, WithinAbs(0.2225388005, 1e-9));

  // no scatter across identical ideal trials
  for (std::size_t i = 0; i < summary.n.size(); ++i) {
    if (summary.claiming_trials[i] > 0) {
      REQUIRE(summary.std_inv_eps[i] == 0.0);
    }
  }
  REQUIRE_THAT(summary.mean_inv_eps.back(),
               WithinAbs(1.0 / 0.0223005588469, 1e-6));
  REQUIRE(summary.std_dev_slope == 0.0);
}

TEST_CASE("noisy averaged curves bend below the ideal line") {
  TrialConfig config;
  config.strategy = StrategyKind::kBiLocc;
  config.noise = NoiseModel::depolarizing(kDemoVisibility);
  config.trials = 20;
  config.master_seed = 31;
  const RunSummary summary = run_experiment(config);
  const std::size_t last = summary.n.size() - 1;
  REQUIRE(summary.claiming_trials[last] > 0);
  REQUIRE(summary.mean_inv_eps[last] < summary.theory_inv_eps[last]);
  // and well below the all-accept value at n = 200
  REQUIRE(summary.mean_inv_eps[last] < 0.9 / 0.0223005588469);
}

TEST_CASE("experiments are deterministic in the master seed") {
  TrialConfig config;
  config.strategy = StrategyKind::kUniLocc;
  config.noise = NoiseModel::depolarizing(0.95);
  config.trials = 5;
  config.master_seed = 7;
  const RunSummary a = run_experiment(config);
  const RunSummary b = run_experiment(config);
  REQUIRE(a.mean_inv_eps == b.mean_inv_eps);
  REQUIRE(a.std_inv_eps == b.std_inv_eps);
  REQUIRE(a.accept_frequency == b.accept_frequency);
}

TEST_CASE("figure csv format and determinism") {
  const auto dir = temp_dir("csv");
  TrialConfig config;
  config.strategy = StrategyKind::kBiLocc;
  config.trials = 3;
  config.measurements_per_trial = 20;
  const RunSummary summary = run_experiment(config);

  write_figure_csv(dir / "a.csv", {summary});
  write_figure_csv(dir / "b.csv", {summary});
  const std::string a = read_file(dir / "a.csv");
  REQUIRE(a == read_file(dir / "b.csv"));
  REQUIRE(a.rfind("strategy,n,mean_inv_eps,std_inv_eps,theory_inv_eps\n", 0) ==
          0);
  // header + 20 rows
  REQUIRE(std::count(a.begin(), a.end(), '\n') == 21);
  // the no-claim cells at n = 1, 2 stay empty rather than clamped
  REQUIRE(a.find("bi,1,,,") != std::string::npos);
}

TEST_CASE("fig3 artifacts") {
  const auto dir = temp_dir("fig3");
  const FigureArtifacts artifacts =
      reproduce_fig3(dir, NoiseModel::ideal(), 1);
  REQUIRE(artifacts.summaries.size() == 3);
  REQUIRE(std::filesystem::exists(dir / "fig3a.csv"));
  REQUIRE(std::filesystem::exists(dir / "fig3b.csv"));

  const std::string b = read_file(dir / "fig3b.csv");
  // header + 25 rows for each of the three strategies
  REQUIRE(std::count(b.begin(), b.end(), '\n') == 76);

  REQUIRE_THAT(artifacts.summaries[0].theory_slope,
               WithinAbs(0.1371995306, 1e-9));
  REQUIRE_THAT(artifacts.summaries[1].theory_slope,
               WithinAbs(0.1907475433, 1e-9));
  REQUIRE_THAT(artifacts.summaries[2].theory_slope,
               WithinAbs(0.2225388005, 1e-9));
}

TEST_CASE("fig4 artifacts order bi above uni") {
  const auto dir = temp_dir("fig4");
  const FigureArtifacts artifacts =
      reproduce_fig4(dir, NoiseModel::ideal(), 1);
  REQUIRE(artifacts.summaries.size() == 4);
  REQUIRE(std::filesystem::exists(dir / "fig4a.csv"));
  REQUIRE(std::filesystem::exists(dir / "fig4b.csv"));
  for (std::size_t pair = 0; pair < 2; ++pair) {
    const RunSummary& uni = artifacts.summaries[2 * pair];
    const RunSummary& bi = artifacts.summaries[2 * pair + 1];
    for (std::size_t i = 0; i < uni.theory_inv_eps.size(); ++i) {
      REQUIRE(bi.theory_inv_eps[i] > uni.theory_inv_eps[i]);
    }
  }
}

TEST_CASE("trial config validation") {
  TrialConfig config;
  config.trials = 0;
  REQUIRE_THROWS_AS(config.validate(), std::domain_error);
  config.trials = 1;
  config.delta = 1.0;
  REQUIRE_THROWS_AS(config.validate(), std::domain_error);
}
