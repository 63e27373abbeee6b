#include "qsv/strategies.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "qsv/errors.hpp"

namespace qsv {

namespace {

void require_adaptive_range(double theta_deg, const char* who) {
  if (!(theta_deg > 45.0 && theta_deg < 90.0)) {
    throw RangeError(std::string(who) +
                     ": theta must lie in (45, 90) degrees, the range the "
                     "adaptive strategies are stated for");
  }
}

void require_open_range(double theta_deg, const char* who) {
  if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
    throw RangeError(std::string(who) +
                     ": theta must lie in (0, 90) degrees");
  }
}

Mat4 settings_operator(const std::vector<MeasurementSetting>& settings) {
  Mat4 omega = Mat4::Zero();
  for (const auto& s : settings) {
    omega += s.probability * s.effective_operator().entries();
  }
  return omega;
}

}  // namespace

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kLoOptimal: return "lo";
    case StrategyKind::kUniLocc: return "uni";
    case StrategyKind::kBiLocc: return "bi";
    case StrategyKind::kGlobal: return "global";
  }
  return "?";
}

std::string to_string(Direction direction) {
  return direction == Direction::kAliceToBob ? "alice_to_bob"
                                             : "bob_to_alice";
}

std::string to_string(SettingLabel label) {
  switch (label) {
    case SettingLabel::kPauliX: return "X";
    case SettingLabel::kPauliY: return "Y";
    case SettingLabel::kPauliZ: return "Z";
    case SettingLabel::kCustom: return "custom";
  }
  return "?";
}

HermitianOperator MeasurementSetting::effective_operator() const {
  const Mat2 l1 = leader_outcome1.projector();
  const Mat2 l0 = leader_outcome0.projector();
  const Mat2 f1 = follower_given1.projector();
  const Mat2 f0 = follower_given0.projector();
  if (direction == Direction::kAliceToBob) {
    return HermitianOperator(tensor(l1, f1) + tensor(l0, f0));
  }
  // Bob leads: his projectors sit in the second tensor slot.
  return HermitianOperator(tensor(f1, l1) + tensor(f0, l0));
}

Strategy::Strategy(StrategyKind kind, double theta_deg,
                   std::vector<MeasurementSetting> settings,
                   HermitianOperator omega, double lambda2)
    : kind_(kind),
      theta_deg_(theta_deg),
      settings_(std::move(settings)),
      omega_(std::move(omega)),
      lambda2_(lambda2) {
  const PureState psi = target_state(theta_deg_);
  if (!settings_.empty()) {
    double total = 0.0;
    for (const auto& s : settings_) {
      total += s.probability;
      const Mat2 pair_sum = s.leader_outcome1.projector() +
                            s.leader_outcome0.projector();
      if ((pair_sum - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::logic_error(
            "Strategy: leader projector pair does not resolve the identity");
      }
      const double accept =
          expectation(s.effective_operator(), DensityMatrix::pure(psi));
      if (std::abs(accept - 1.0) > 1e-10) {
        throw std::logic_error(
            "Strategy: setting does not accept the target with certainty");
      }
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::logic_error("Strategy: setting priors do not sum to 1");
    }
  }
  const EighResult spec = eigh(omega_);
  if (std::abs(spec.eigenvalues[0] - 1.0) > 1e-10 ||
      std::abs(expectation(omega_, DensityMatrix::pure(psi)) - 1.0) > 1e-10) {
    throw std::logic_error(
        "Strategy: top eigenvalue is not 1 on the target state");
  }
  if (std::abs(spec.eigenvalues[1] - lambda2_) > 1e-10) {
    throw std::logic_error("Strategy: cached lambda2 disagrees with eigh");
  }
}

double Strategy::constant_factor() const {
  if (lambda2_ >= 1.0) {
    throw std::domain_error(
        "constant_factor: degenerate strategy with lambda2 >= 1");
  }
  return 1.0 / (1.0 - lambda2_);
}

std::size_t Strategy::sample_setting(SplitMix64& rng) const {
  if (settings_.empty()) {
    throw std::logic_error(
        "sample_setting: strategy has no setting ensemble; draw the accept "
        "outcome from tr(Omega sigma) instead");
  }
  std::vector<double> probs;
  probs.reserve(settings_.size());
  for (const auto& s : settings_) probs.push_back(s.probability);
  return rng.discrete(probs);
}

nlohmann::json Strategy::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["theta_deg"] = theta_deg_;
  if (direction_) j["direction"] = to_string(*direction_);
  j["lambda2"] = lambda2_;
  j["constant_factor"] = constant_factor();
  j["role_switching"] = role_switching_;
  j["entangled_measurement"] = entangled_measurement();
  auto settings = nlohmann::json::array();
  for (const auto& s : settings_) {
    settings.push_back({{"label", to_string(s.label)},
                        {"probability", s.probability},
                        {"leader", s.direction == Direction::kAliceToBob
                                       ? "alice"
                                       : "bob"}});
  }
  j["settings"] = settings;
  auto omega = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const Complex e = omega_.entries()(r, c);
      omega.push_back({e.real(), e.imag()});
    }
  }
  j["omega"] = omega;
  return j;
}

Strategy build_uni_locc(double theta_deg, Direction direction) {
  require_adaptive_range(theta_deg, "build_uni_locc");
  const double t = radians(theta_deg);
  const double sin2 = std::sin(t) * std::sin(t);
  const double p_xy = 1.0 / (2.0 + 2.0 * sin2);
  const double p_z = sin2 / (1.0 + sin2);

  std::vector<MeasurementSetting> settings;
  if (direction == Direction::kAliceToBob) {
    settings = {
        {.label = SettingLabel::kPauliX,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::plus(),
         .leader_outcome0 = SingleQubitState::minus(),
         .follower_given1 = SingleQubitState::upsilon(theta_deg, +1),
         .follower_given0 = SingleQubitState::upsilon(theta_deg, -1),
         .probability = p_xy},
        // Outcome pairing from the operator form of the strategy: outcome R
        // conditions |omega->, outcome L conditions |omega+>. The opposite
        // pairing would not accept the target with certainty.
        {.label = SettingLabel::kPauliY,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::right(),
         .leader_outcome0 = SingleQubitState::left(),
         .follower_given1 = SingleQubitState::omega(theta_deg, -1),
         .follower_given0 = SingleQubitState::omega(theta_deg, +1),
         .probability = p_xy},
        {.label = SettingLabel::kPauliZ,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::h(),
         .leader_outcome0 = SingleQubitState::v(),
         .follower_given1 = SingleQubitState::v(),
         .follower_given0 = SingleQubitState::h(),
         .probability = p_z}};
  } else {
    // Bob leads with the same Pauli settings; Alice's conditional vectors
    // are the target state's collapse onto her side given Bob's outcome,
    // which makes each setting accept the target with certainty. The
    // Strategy constructor checks exactly that.
    const double c = std::cos(t);
    const double s = std::sin(t);
    const SingleQubitState x1{Vec2{c, -s}};
    const SingleQubitState x0{Vec2{c, s}};
    const SingleQubitState y1{Vec2{Complex(c, 0.0), Complex(0.0, -s)}};
    const SingleQubitState y0{Vec2{Complex(c, 0.0), Complex(0.0, s)}};
    settings = {
        {.label = SettingLabel::kPauliX,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::plus(),
         .leader_outcome0 = SingleQubitState::minus(),
         .follower_given1 = x1,
         .follower_given0 = x0,
         .probability = p_xy},
        {.label = SettingLabel::kPauliY,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::right(),
         .leader_outcome0 = SingleQubitState::left(),
         .follower_given1 = y1,
         .follower_given0 = y0,
         .probability = p_xy},
        {.label = SettingLabel::kPauliZ,
         .direction = direction,
         .leader_outcome1 = SingleQubitState::h(),
         .leader_outcome0 = SingleQubitState::v(),
         .follower_given1 = SingleQubitState::v(),
         .follower_given0 = SingleQubitState::h(),
         .probability = p_z}};
  }

  HermitianOperator omega(settings_operator(settings));
  const double lambda2 = eigh(omega).eigenvalues[1];
  Strategy strategy(StrategyKind::kUniLocc, theta_deg, std::move(settings),
                    std::move(omega), lambda2);
  strategy.direction_ = direction;
  return strategy;
}

Strategy build_bi_locc(double theta_deg) {
  require_adaptive_range(theta_deg, "build_bi_locc");
  const Mat4 psi = target_state(theta_deg).projector();
  HermitianOperator omega(psi + (Mat4::Identity() - psi) / 3.0);
  Strategy strategy(StrategyKind::kBiLocc, theta_deg, {}, std::move(omega),
                    1.0 / 3.0);
  strategy.role_switching_ = true;
  return strategy;
}

Strategy build_lo_optimal(double theta_deg) {
  require_open_range(theta_deg, "build_lo_optimal");
  const double s2t = std::sin(2.0 * radians(theta_deg));
  const double lambda2 = (2.0 + s2t) / (4.0 + s2t);
  const Mat4 psi = target_state(theta_deg).projector();
  HermitianOperator omega(psi + lambda2 * (Mat4::Identity() - psi));
  return Strategy(StrategyKind::kLoOptimal, theta_deg, {}, std::move(omega),
                  lambda2);
}

Strategy build_global(double theta_deg) {
  require_open_range(theta_deg, "build_global");
  HermitianOperator omega(target_state(theta_deg).projector());
  return Strategy(StrategyKind::kGlobal, theta_deg, {}, std::move(omega),
                  0.0);
}

Strategy custom_operator_strategy(StrategyKind kind, double theta_deg,
                                  const HermitianOperator& omega) {
  const double lambda2 = eigh(omega).eigenvalues[1];
  return Strategy(kind, theta_deg, {}, omega, lambda2);
}

}  // namespace qsv
