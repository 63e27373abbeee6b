#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsv/quantum_core.hpp"
#include "qsv/rng.hpp"

namespace qsv {

enum class StrategyKind { kLoOptimal, kUniLocc, kBiLocc, kGlobal };

/// Which party measures first and feeds its outcome forward.
enum class Direction { kAliceToBob, kBobToAlice };

enum class SettingLabel { kPauliX, kPauliY, kPauliZ, kCustom };

std::string to_string(StrategyKind kind);
std::string to_string(Direction direction);
std::string to_string(SettingLabel label);

/// One two-outcome local setting: the leading party measures a projector
/// pair, the following party applies a conditional projector selected by the
/// leader's outcome bit. The follower's pass outcome is the round's ACCEPT.
///
/// Outcome bit 1 is the +1 eigenstate of the leader's Pauli operator
/// (|+>, |R>, |H>); bit 0 is the -1 eigenstate.
struct MeasurementSetting {
  SettingLabel label = SettingLabel::kCustom;
  Direction direction = Direction::kAliceToBob;
  SingleQubitState leader_outcome1;   ///< leader projector, outcome bit 1
  SingleQubitState leader_outcome0;   ///< leader projector, outcome bit 0
  SingleQubitState follower_given1;   ///< follower ACCEPT projector after 1
  SingleQubitState follower_given0;   ///< follower ACCEPT projector after 0
  double probability = 0.0;           ///< prior probability of this setting

  /// Effective accept operator sum_a (leader_a x follower(a)), arranged with
  /// Alice as the first tensor factor regardless of direction.
  HermitianOperator effective_operator() const;
};

/// An immutable verification strategy: an optional ensemble of settings plus
/// the effective operator Omega = sum_l p_l M_l and its cached second
/// eigenvalue. Strategies without settings (LO surrogate, Bi-LOCC closed
/// form, global projector) carry only the operator.
class Strategy {
 public:
  StrategyKind kind() const { return kind_; }
  double theta_deg() const { return theta_deg_; }
  const std::vector<MeasurementSetting>& settings() const { return settings_; }
  bool has_settings() const { return !settings_.empty(); }
  const HermitianOperator& omega() const { return omega_; }
  double lambda2() const { return lambda2_; }
  /// Uni-LOCC only: the feed-forward direction.
  std::optional<Direction> direction() const { return direction_; }
  /// Bi-LOCC only: the protocol module realizes this strategy by flipping
  /// the leader role with probability 1/2 each round.
  bool role_switching() const { return role_switching_; }
  /// Global strategy: requires an entangled measurement, so the
  /// message-passing protocol cannot execute it.
  bool entangled_measurement() const { return kind_ == StrategyKind::kGlobal; }

  /// 1 / (1 - lambda2): the measurement-count overhead relative to the
  /// globally optimal bound. Throws std::domain_error when lambda2 >= 1.
  double constant_factor() const;

  /// Draws a setting index with the prior probabilities p_l. Throws
  /// std::logic_error on effective-operator-only strategies; sample the
  /// accept outcome from tr(Omega sigma) instead.
  std::size_t sample_setting(SplitMix64& rng) const;

  /// Machine-readable description: kind, theta, settings, Omega entries
  /// (row-major re/im pairs), lambda2, constant factor.
  nlohmann::json to_json() const;

 private:
  friend Strategy build_uni_locc(double, Direction);
  friend Strategy build_bi_locc(double);
  friend Strategy build_lo_optimal(double);
  friend Strategy build_global(double);
  friend Strategy custom_operator_strategy(StrategyKind, double,
                                           const HermitianOperator&);

  Strategy(StrategyKind kind, double theta_deg,
           std::vector<MeasurementSetting> settings, HermitianOperator omega,
           double lambda2);

  StrategyKind kind_;
  double theta_deg_;
  std::vector<MeasurementSetting> settings_;
  HermitianOperator omega_;
  double lambda2_;
  std::optional<Direction> direction_;
  bool role_switching_ = false;
};

/// The optimal one-way adaptive strategy: Pauli X, Y, Z leader settings with
/// conditional follower projectors and priors
/// {1/(2+2sin^2), 1/(2+2sin^2), sin^2/(1+sin^2)}. Valid for theta in
/// (45, 90) degrees. The Bob-to-Alice direction exchanges the tensor roles,
/// with the follower vectors rebuilt so every setting still accepts the
/// target with certainty.
Strategy build_uni_locc(double theta_deg,
                        Direction direction = Direction::kAliceToBob);

/// The two-way adaptive strategy, represented by its effective operator
/// |Psi><Psi| + (I - |Psi><Psi|)/3 with lambda2 = 1/3. Round statistics
/// depend only on the operator; the explicit switching ensemble is carried
/// by the protocol module's demonstration mode.
Strategy build_bi_locc(double theta_deg);

/// The optimal non-adaptive local strategy, represented by the spectral
/// surrogate |Psi><Psi| + lambda2 (I - |Psi><Psi|) with
/// lambda2 = (2+sin 2theta)/(4+sin 2theta). The surrogate reproduces every
/// lambda2-derived statistic; its response to specific noise need not match
/// the lab ensemble's. Valid for theta in (0, 90).
Strategy build_lo_optimal(double theta_deg);

/// The entangled-measurement optimum: Omega = |Psi><Psi|, lambda2 = 0.
Strategy build_global(double theta_deg);

/// Wraps a caller-supplied effective operator (for example an explicit LO
/// construction) behind the same interface. The operator must accept the
/// target with certainty.
Strategy custom_operator_strategy(StrategyKind kind, double theta_deg,
                                  const HermitianOperator& omega);

}  // namespace qsv
