#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "qsv/quantum_core.hpp"

namespace qsv {

/// Source imperfection models for the tested states. The paper's lab states
/// are non-ideal in unpublished ways; these profiles stand in for them.
class NoiseModel {
 public:
  enum class Kind { kIdeal, kDepolarizing, kDephasing, kMisalignment, kCustom };

  static NoiseModel ideal();
  /// sigma = v |Psi><Psi| + (1-v) I/4, visibility v in [0, 1].
  static NoiseModel depolarizing(double visibility);
  /// Scales the HV<->VH coherences of |Psi><Psi| by (1-p), p in [0, 1].
  static NoiseModel dephasing(double p);
  /// The pure state of the target family at theta + dtheta.
  static NoiseModel misalignment(double dtheta_deg);
  static NoiseModel custom(const DensityMatrix& sigma);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  const std::optional<DensityMatrix>& custom_state() const { return custom_; }

  nlohmann::json to_json() const;
  /// Parses {"kind": ...} objects; rejects unknown kinds and keys.
  static NoiseModel from_json(const nlohmann::json& j);

 private:
  NoiseModel(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_;
  std::optional<DensityMatrix> custom_;
};

/// The tested state for a target angle under a noise model.
DensityMatrix apply_noise(double theta_deg, const NoiseModel& model);

}  // namespace qsv
