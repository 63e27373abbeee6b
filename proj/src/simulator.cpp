#include "qsv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qsv/errors.hpp"

namespace qsv {

namespace {

/// "%.9g" formatting shared by every CSV cell, so reruns are byte-identical.
std::string g9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double snap_probability(double p) {
  // Certainty is a design property of the strategies (the target is always
  // accepted); trace arithmetic may land a hair below 1.
  if (p > 1.0 - 1e-12) return 1.0;
  if (p < 1e-12) return 0.0;
  return p;
}

/// Projector of `state` acting on one party's side of the pair.
Mat4 one_sided(const SingleQubitState& state, Direction side_of_leader,
               bool leader_side) {
  const bool alice = (side_of_leader == Direction::kAliceToBob) == leader_side;
  return alice ? tensor(state.projector(), Mat2::Identity())
               : tensor(Mat2::Identity(), state.projector());
}

double slope_through_origin(std::span<const double> xs,
                            std::span<const double> ys) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += xs[i] * ys[i];
    den += xs[i] * xs[i];
  }
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

void TrialConfig::validate() const {
  if (measurements_per_trial < 1 || trials < 1) {
    throw std::domain_error("TrialConfig: counts must be at least 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("TrialConfig: delta must lie in (0, 1)");
  }
}

Strategy TrialConfig::build_strategy() const {
  switch (strategy) {
    case StrategyKind::kLoOptimal: return build_lo_optimal(theta_deg);
    case StrategyKind::kUniLocc: return build_uni_locc(theta_deg, direction);
    case StrategyKind::kBiLocc: return build_bi_locc(theta_deg);
    case StrategyKind::kGlobal: return build_global(theta_deg);
  }
  throw std::logic_error("TrialConfig: unreachable strategy kind");
}

std::size_t TrialRecord::accept_count() const {
  return static_cast<std::size_t>(
      std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

RoundOutcome run_round(const Strategy& strategy, const DensityMatrix& sigma,
                       SplitMix64& rng, SamplingMode mode) {
  if (mode == SamplingMode::kAuto) {
    mode = strategy.has_settings() ? SamplingMode::kSettingLevel
                                   : SamplingMode::kEffectiveOperator;
  }
  RoundOutcome outcome;
  if (mode == SamplingMode::kEffectiveOperator) {
    const double p = snap_probability(expectation(strategy.omega(), sigma));
    outcome.accept = rng.bernoulli(p);
    return outcome;
  }
  if (!strategy.has_settings()) {
    throw std::logic_error(
        "run_round: setting-level sampling requires a setting ensemble");
  }

  const std::size_t l = strategy.sample_setting(rng);
  const MeasurementSetting& setting = strategy.settings()[l];
  outcome.setting = static_cast<int>(l);

  // Leader outcome: bit 1 with probability tr((Pi_1 x I) sigma).
  const Mat4 lead1 = one_sided(setting.leader_outcome1, setting.direction,
                               /*leader_side=*/true);
  const Mat4 lead0 = one_sided(setting.leader_outcome0, setting.direction,
                               /*leader_side=*/true);
  double p1 = snap_probability((lead1 * sigma.entries()).trace().real());
  int leader_bit = rng.bernoulli(p1) ? 1 : 0;
  // Numerically impossible branch guard: a branch of probability ~0 cannot
  // physically occur, and conditioning on it would divide by ~0.
  if (leader_bit == 1 && p1 < 1e-14) leader_bit = 0;
  if (leader_bit == 0 && 1.0 - p1 < 1e-14) leader_bit = 1;
  outcome.leader_outcome = leader_bit;

  const Mat4& proj = leader_bit ? lead1 : lead0;
  const double p_branch = leader_bit ? p1 : 1.0 - p1;
  const Mat4 conditioned =
      proj * sigma.entries() * proj / p_branch;  // projector: P = P†

  const SingleQubitState& follower =
      leader_bit ? setting.follower_given1 : setting.follower_given0;
  const Mat4 accept_proj =
      one_sided(follower, setting.direction, /*leader_side=*/false);
  const double q =
      snap_probability((accept_proj * conditioned).trace().real());
  outcome.accept = rng.bernoulli(q);
  return outcome;
}

TrialRecord run_trial(const TrialConfig& config, std::size_t trial_index) {
  config.validate();
  const Strategy strategy = config.build_strategy();
  const DensityMatrix sigma = apply_noise(config.theta_deg, config.noise);

  TrialRecord record;
  record.seed = derive_seed(config.master_seed, trial_index);
  record.bits.reserve(config.measurements_per_trial);
  record.setting_trace.reserve(config.measurements_per_trial);
  SplitMix64 rng(record.seed);
  for (std::size_t i = 0; i < config.measurements_per_trial; ++i) {
    const RoundOutcome outcome = run_round(strategy, sigma, rng);
    record.bits.push_back(outcome.accept ? 1 : 0);
    record.setting_trace.push_back(outcome.setting);
  }
  return record;
}

RunSummary run_experiment(const TrialConfig& config) {
  config.validate();
  const Strategy strategy = config.build_strategy();
  const std::size_t n_max = config.measurements_per_trial;

  RunSummary summary;
  summary.theta_deg = config.theta_deg;
  summary.strategy = config.strategy;
  summary.lambda2 = strategy.lambda2();
  summary.delta = config.delta;
  summary.prefix_length = std::min<std::size_t>(25, n_max);
  summary.theory_slope = asymptotic_slope(strategy.lambda2(), config.delta);

  summary.n.resize(n_max);
  for (std::size_t i = 0; i < n_max; ++i) summary.n[i] = i + 1;
  summary.theory_inv_eps.resize(n_max);
  for (std::size_t i = 0; i < n_max; ++i) {
    summary.theory_inv_eps[i] =
        summary.theory_slope * static_cast<double>(i + 1);
  }

  // Per-trial prefix verdicts; cross-trial moments over claiming trials.
  std::vector<double> sum(n_max, 0.0);
  std::vector<double> sum_sq(n_max, 0.0);
  std::vector<std::size_t> count(n_max, 0);
  std::size_t total_accepts = 0;
  bool any_all_accept_prefix = false;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const TrialRecord record = run_trial(config, t);
    total_accepts += record.accept_count();
    const auto curve =
        inverse_infidelity_curve(record.bits, strategy.lambda2(), config.delta);
    for (const CurvePoint& point : curve) {
      const std::size_t i = point.n - 1;
      sum[i] += point.inv_epsilon;
      sum_sq[i] += point.inv_epsilon * point.inv_epsilon;
      ++count[i];
    }
    any_all_accept_prefix |= std::all_of(
        record.bits.begin(), record.bits.begin() + summary.prefix_length,
        [](std::uint8_t b) { return b == 1; });
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  summary.mean_inv_eps.assign(n_max, nan);
  summary.std_inv_eps.assign(n_max, nan);
  summary.claiming_trials = count;
  for (std::size_t i = 0; i < n_max; ++i) {
    if (count[i] == 0) continue;
    const double k = static_cast<double>(count[i]);
    summary.mean_inv_eps[i] = sum[i] / k;
    double var = 0.0;
    if (count[i] > 1) {
      var = (sum_sq[i] - sum[i] * sum[i] / k) / (k - 1.0);
      var = std::max(var, 0.0);
    }
    summary.std_inv_eps[i] = std::sqrt(var);
  }
  summary.accept_frequency =
      static_cast<double>(total_accepts) /
      static_cast<double>(config.trials * n_max);

  // Every all-accept prefix realizes the same closed-form curve.
  if (any_all_accept_prefix) {
    const auto ideal = inverse_infidelity_curve(
        strategy.lambda2(), config.delta, summary.prefix_length);
    if (ideal.size() >= 2) {
      summary.all_accept_prefix_slope = fit_slope(ideal);
    }
  }
  std::vector<CurvePoint> mean_prefix;
  for (std::size_t i = 0; i < summary.prefix_length; ++i) {
    if (count[i] > 0) mean_prefix.push_back({i + 1, summary.mean_inv_eps[i]});
  }
  if (mean_prefix.size() >= 2) {
    summary.mean_prefix_slope = fit_slope(mean_prefix);
  }

  // Fig. 3/4 caption model: std(n) ~ s n, fitted through the origin.
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n_max; ++i) {
    if (count[i] > 1) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(summary.std_inv_eps[i]);
    }
  }
  summary.std_dev_slope = slope_through_origin(xs, ys);
  return summary;
}

nlohmann::json RunSummary::to_json() const {
  nlohmann::json j;
  j["strategy"] = to_string(strategy);
  j["theta_deg"] = theta_deg;
  j["lambda2"] = lambda2;
  j["delta"] = delta;
  j["accept_frequency"] = accept_frequency;
  j["theory_slope"] = theory_slope;
  if (all_accept_prefix_slope) {
    j["all_accept_prefix_slope"] = *all_accept_prefix_slope;
  } else {
    j["all_accept_prefix_slope"] = nullptr;
  }
  if (mean_prefix_slope) {
    j["mean_prefix_slope"] = *mean_prefix_slope;
  } else {
    j["mean_prefix_slope"] = nullptr;
  }
  j["std_dev_slope"] = std_dev_slope;
  j["prefix_length"] = prefix_length;
  return j;
}

void write_figure_csv(const std::filesystem::path& file,
                      const std::vector<RunSummary>& summaries,
                      std::size_t n_limit) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << "strategy,n,mean_inv_eps,std_inv_eps,theory_inv_eps\n";
  for (const RunSummary& s : summaries) {
    const std::size_t rows =
        n_limit == 0 ? s.n.size() : std::min(n_limit, s.n.size());
    for (std::size_t i = 0; i < rows; ++i) {
      out << to_string(s.strategy) << ',' << s.n[i] << ',';
      if (s.claiming_trials[i] > 0) out << g9(s.mean_inv_eps[i]);
      out << ',';
      if (s.claiming_trials[i] > 0) out << g9(s.std_inv_eps[i]);
      out << ',' << g9(s.theory_inv_eps[i]) << '\n';
    }
  }
  if (!out.flush()) {
    throw std::runtime_error("failed writing " + file.string());
  }
}

namespace {

FigureArtifacts run_figure(const std::filesystem::path& out_dir,
                           const NoiseModel& noise, std::uint64_t master_seed,
                           const std::vector<TrialConfig>& configs,
                           const std::vector<std::pair<std::string, std::size_t>>&
                               panels,
                           const std::vector<std::vector<std::size_t>>&
                               panel_members) {
  FigureArtifacts artifacts;
  for (TrialConfig config : configs) {
    config.noise = noise;
    config.master_seed = master_seed;
    artifacts.summaries.push_back(run_experiment(config));
  }
  std::filesystem::create_directories(out_dir);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    std::vector<RunSummary> group;
    for (std::size_t index : panel_members[p]) {
      group.push_back(artifacts.summaries[index]);
    }
    const std::filesystem::path file = out_dir / panels[p].first;
    write_figure_csv(file, group, panels[p].second);
    artifacts.files.push_back(file);
  }
  return artifacts;
}

}  // namespace

FigureArtifacts reproduce_fig3(const std::filesystem::path& out_dir,
                               const NoiseModel& noise,
                               std::uint64_t master_seed) {
  TrialConfig base;
  base.theta_deg = 60.0;
  base.measurements_per_trial = 200;
  base.trials = 50;
  base.delta = 0.05;
  std::vector<TrialConfig> configs(3, base);
  configs[0].strategy = StrategyKind::kLoOptimal;
  configs[1].strategy = StrategyKind::kUniLocc;
  configs[2].strategy = StrategyKind::kBiLocc;
  return run_figure(out_dir, noise, master_seed, configs,
                    {{"fig3a.csv", 0}, {"fig3b.csv", 25}},
                    {{0, 1, 2}, {0, 1, 2}});
}

FigureArtifacts reproduce_fig4(const std::filesystem::path& out_dir,
                               const NoiseModel& noise,
                               std::uint64_t master_seed) {
  TrialConfig base;
  base.measurements_per_trial = 200;
  base.trials = 50;
  base.delta = 0.05;
  std::vector<TrialConfig> configs(4, base);
  configs[0].theta_deg = 70.0;
  configs[0].strategy = StrategyKind::kUniLocc;
  configs[1].theta_deg = 70.0;
  configs[1].strategy = StrategyKind::kBiLocc;
  configs[2].theta_deg = 80.0;
  configs[2].strategy = StrategyKind::kUniLocc;
  configs[3].theta_deg = 80.0;
  configs[3].strategy = StrategyKind::kBiLocc;
  return run_figure(out_dir, noise, master_seed, configs,
                    {{"fig4a.csv", 0}, {"fig4b.csv", 0}},
                    {{0, 1}, {2, 3}});
}

}  // namespace qsv
