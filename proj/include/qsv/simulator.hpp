#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsv/noise.hpp"
#include "qsv/quantum_core.hpp"
#include "qsv/rng.hpp"
#include "qsv/statistics.hpp"
#include "qsv/strategies.hpp"

namespace qsv {

/// One verification run: which strategy tests which state, how often, and
/// under which seed. Trial i derives its stream as
/// SplitMix64(derive_seed(master_seed, i)); each round consumes uniforms in
/// the order (setting, leader outcome, follower outcome), or a single
/// uniform in effective-operator mode.
struct TrialConfig {
  double theta_deg = 60.0;
  StrategyKind strategy = StrategyKind::kBiLocc;
  Direction direction = Direction::kAliceToBob;  ///< Uni-LOCC only
  NoiseModel noise = NoiseModel::ideal();
  std::size_t measurements_per_trial = 200;
  std::size_t trials = 50;
  double delta = 0.05;
  std::uint64_t master_seed = 1;

  void validate() const;
  Strategy build_strategy() const;
};

/// The accept/reject sequence of one trial, with the chosen setting per
/// round when setting-level sampling was used (-1 otherwise).
struct TrialRecord {
  std::vector<std::uint8_t> bits;
  std::vector<int> setting_trace;
  std::uint64_t seed = 0;

  std::size_t accept_count() const;
};

struct RoundOutcome {
  bool accept = false;
  int setting = -1;
  int leader_outcome = -1;
};

enum class SamplingMode {
  kAuto,              ///< setting-level when the strategy has settings
  kSettingLevel,      ///< draw setting, leader outcome, follower outcome
  kEffectiveOperator  ///< single Bernoulli draw on tr(Omega sigma)
};

/// Plays one verification round. Either sampling path realizes the same
/// marginal accept law tr(Omega sigma).
RoundOutcome run_round(const Strategy& strategy, const DensityMatrix& sigma,
                       SplitMix64& rng,
                       SamplingMode mode = SamplingMode::kAuto);

TrialRecord run_trial(const TrialConfig& config, std::size_t trial_index);

/// Cross-trial aggregation of the per-prefix verdicts, mirroring how the
/// figure panels are assembled.
struct RunSummary {
  double theta_deg = 0.0;
  StrategyKind strategy = StrategyKind::kBiLocc;
  double lambda2 = 0.0;
  double delta = 0.0;

  std::vector<std::size_t> n;              ///< 1..measurements_per_trial
  std::vector<double> mean_inv_eps;        ///< NaN where no trial has a claim
  std::vector<double> std_inv_eps;         ///< sample std over claiming trials
  std::vector<std::size_t> claiming_trials;
  std::vector<double> theory_inv_eps;      ///< ideal line n (1-l2)/ln(1/delta)

  double accept_frequency = 0.0;
  /// Slope of the all-accept closed-form curve over the first prefix_length
  /// measurements; reported when at least one trial accepted them all.
  std::optional<double> all_accept_prefix_slope;
  /// Same-range fit of the averaged curve, rejections included.
  std::optional<double> mean_prefix_slope;
  double theory_slope = 0.0;
  /// s of the std ~ s n model fitted through the origin.
  double std_dev_slope = 0.0;
  std::size_t prefix_length = 25;

  nlohmann::json to_json() const;
};

RunSummary run_experiment(const TrialConfig& config);

/// CSV rows (strategy, n, mean_inv_eps, std_inv_eps, theory_inv_eps) for a
/// set of runs; cells without a claiming trial are left empty. Numbers are
/// printed to 9 significant digits.
void write_figure_csv(const std::filesystem::path& file,
                      const std::vector<RunSummary>& summaries,
                      std::size_t n_limit = 0);

struct FigureArtifacts {
  std::vector<RunSummary> summaries;
  std::vector<std::filesystem::path> files;
};

/// LO, Uni and Bi verification of the 60-degree target: 50 trials of 200
/// measurements at delta = 0.05; writes fig3a.csv (full range) and
/// fig3b.csv (first 25 measurements).
FigureArtifacts reproduce_fig3(const std::filesystem::path& out_dir,
                               const NoiseModel& noise,
                               std::uint64_t master_seed);

/// Uni vs Bi at 70 and 80 degrees; writes fig4a.csv and fig4b.csv.
FigureArtifacts reproduce_fig4(const std::filesystem::path& out_dir,
                               const NoiseModel& noise,
                               std::uint64_t master_seed);

/// The depolarizing visibility used by the demo profile when no noise model
/// is specified: strong enough that the averaged curves visibly bend away
/// from the ideal lines within 200 measurements.
inline constexpr double kDemoVisibility = 0.98;

}  // namespace qsv
