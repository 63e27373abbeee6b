#include "qsv/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace qsv {

namespace {

void check_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1]");
  }
}

nlohmann::json complex_entries(const Mat4& m) {
  auto entries = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      entries.push_back({m(r, c).real(), m(r, c).imag()});
    }
  }
  return entries;
}

Mat4 parse_entries(const nlohmann::json& entries) {
  if (!entries.is_array() || entries.size() != 16) {
    throw std::invalid_argument("noise: custom entries must be 16 re/im pairs");
  }
  Mat4 m;
  for (int i = 0; i < 16; ++i) {
    const auto& pair = entries[i];
    if (!pair.is_array() || pair.size() != 2) {
      throw std::invalid_argument("noise: entry is not a re/im pair");
    }
    m(i / 4, i % 4) = Complex(pair[0].get<double>(), pair[1].get<double>());
  }
  return m;
}

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known |= (key == a);
    if (!known) {
      throw std::invalid_argument("noise: unknown key '" + key + "'");
    }
  }
}

}  // namespace

NoiseModel NoiseModel::ideal() { return NoiseModel(Kind::kIdeal, 0.0); }

NoiseModel NoiseModel::depolarizing(double visibility) {
  check_unit_interval(visibility, "visibility");
  return NoiseModel(Kind::kDepolarizing, visibility);
}

NoiseModel NoiseModel::dephasing(double p) {
  check_unit_interval(p, "dephasing p");
  return NoiseModel(Kind::kDephasing, p);
}

NoiseModel NoiseModel::misalignment(double dtheta_deg) {
  return NoiseModel(Kind::kMisalignment, dtheta_deg);
}

NoiseModel NoiseModel::custom(const DensityMatrix& sigma) {
  NoiseModel model(Kind::kCustom, 0.0);
  model.custom_ = sigma;  // already validated by the DensityMatrix ctor
  return model;
}

nlohmann::json NoiseModel::to_json() const {
  switch (kind_) {
    case Kind::kIdeal:
      return {{"kind", "ideal"}};
    case Kind::kDepolarizing:
      return {{"kind", "depolarizing"}, {"visibility", parameter_}};
    case Kind::kDephasing:
      return {{"kind", "dephasing"}, {"p", parameter_}};
    case Kind::kMisalignment:
      return {{"kind", "misalignment"}, {"dtheta_deg", parameter_}};
    case Kind::kCustom:
      return {{"kind", "custom"}, {"entries", complex_entries(custom_->entries())}};
  }
  throw std::logic_error("NoiseModel: unreachable kind");
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw std::invalid_argument("noise: expected an object with a 'kind' key");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ideal") {
    reject_unknown_keys(j, {"kind"});
    return ideal();
  }
  if (kind == "depolarizing") {
    reject_unknown_keys(j, {"kind", "visibility"});
    return depolarizing(j.at("visibility").get<double>());
  }
  if (kind == "dephasing") {
    reject_unknown_keys(j, {"kind", "p"});
    return dephasing(j.at("p").get<double>());
  }
  if (kind == "misalignment") {
    reject_unknown_keys(j, {"kind", "dtheta_deg"});
    return misalignment(j.at("dtheta_deg").get<double>());
  }
  if (kind == "custom") {
    reject_unknown_keys(j, {"kind", "entries"});
    return custom(DensityMatrix(parse_entries(j.at("entries"))));
  }
  throw std::invalid_argument("noise: unknown kind '" + kind + "'");
}

DensityMatrix apply_noise(double theta_deg, const NoiseModel& model) {
  switch (model.kind()) {
    case NoiseModel::Kind::kIdeal:
      return DensityMatrix::pure(target_state(theta_deg));
    case NoiseModel::Kind::kDepolarizing: {
      const double v = model.parameter();
      const Mat4 psi = target_state(theta_deg).projector();
      return DensityMatrix(v * psi + (1.0 - v) * Mat4::Identity() / 4.0);
    }
    case NoiseModel::Kind::kDephasing: {
      Mat4 sigma = target_state(theta_deg).projector();
      sigma(kHV, kVH) *= 1.0 - model.parameter();
      sigma(kVH, kHV) *= 1.0 - model.parameter();
      return DensityMatrix(sigma);
    }
    case NoiseModel::Kind::kMisalignment:
      return DensityMatrix::pure(
          target_state(theta_deg + model.parameter()));
    case NoiseModel::Kind::kCustom:
      // validated by the DensityMatrix constructor when the model was built
      return *model.custom_state();
  }
  throw std::logic_error("apply_noise: unreachable kind");
}

}  // namespace qsv
