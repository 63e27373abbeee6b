#include "qsv/quantum_core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsv {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kHermTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-10;

void check_unit_norm(double norm, const char* what) {
  if (std::abs(norm - 1.0) > kNormTol) {
    throw std::invalid_argument(std::string(what) +
                                ": amplitudes are not normalized");
  }
}

}  // namespace

SingleQubitState::SingleQubitState(const Vec2& amplitudes) : amp_(amplitudes) {
  check_unit_norm(amp_.norm(), "SingleQubitState");
}

SingleQubitState SingleQubitState::h() { return SingleQubitState({1.0, 0.0}); }
SingleQubitState SingleQubitState::v() { return SingleQubitState({0.0, 1.0}); }

SingleQubitState SingleQubitState::plus() {
  return SingleQubitState({M_SQRT1_2, M_SQRT1_2});
}

SingleQubitState SingleQubitState::minus() {
  return SingleQubitState({M_SQRT1_2, -M_SQRT1_2});
}

SingleQubitState SingleQubitState::right() {
  return SingleQubitState({Complex(M_SQRT1_2, 0.0), Complex(0.0, M_SQRT1_2)});
}

SingleQubitState SingleQubitState::left() {
  return SingleQubitState({Complex(M_SQRT1_2, 0.0), Complex(0.0, -M_SQRT1_2)});
}

SingleQubitState SingleQubitState::upsilon(double theta_deg, int sign) {
  const double t = radians(theta_deg);
  return SingleQubitState({std::sin(t), (sign > 0 ? -1.0 : 1.0) * std::cos(t)});
}

SingleQubitState SingleQubitState::omega(double theta_deg, int sign) {
  const double t = radians(theta_deg);
  return SingleQubitState(
      {Complex(std::sin(t), 0.0),
       Complex(0.0, (sign > 0 ? 1.0 : -1.0) * std::cos(t))});
}

PureState::PureState(const Vec4& amplitudes, std::optional<double> theta_deg)
    : amp_(amplitudes), theta_deg_(theta_deg) {
  check_unit_norm(amp_.norm(), "PureState");
}

HermitianOperator::HermitianOperator(const Mat4& entries) : m_(entries) {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("HermitianOperator: matrix is not Hermitian");
  }
}

HermitianOperator HermitianOperator::identity() {
  return HermitianOperator(Mat4::Identity());
}

DensityMatrix::DensityMatrix(const Mat4& entries) : m_(entries) {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  }
  if (std::abs(m_.trace().real() - 1.0) > kTraceTol ||
      std::abs(m_.trace().imag()) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> solver(m_,
                                             Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const PureState& psi) {
  return DensityMatrix(psi.projector());
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(Mat4::Identity() * 0.25);
}

PureState target_state(double theta_deg) {
  // The closed interval: both endpoints are legitimate product-state limits
  // of the family. The strategy builders impose their own tighter ranges.
  if (!(theta_deg >= 0.0 && theta_deg <= 90.0)) {
    throw std::domain_error("target_state: theta must lie in [0, 90] degrees");
  }
  const double t = radians(theta_deg);
  return PureState({0.0, std::cos(t), -std::sin(t), 0.0}, theta_deg);
}

PureState orthogonal_state(double theta_deg) {
  if (!(theta_deg >= 0.0 && theta_deg <= 90.0)) {
    throw std::domain_error(
        "orthogonal_state: theta must lie in [0, 90] degrees");
  }
  const double t = radians(theta_deg);
  return PureState({0.0, std::sin(t), std::cos(t), 0.0}, theta_deg);
}

PureState tensor(const SingleQubitState& alice, const SingleQubitState& bob) {
  const Vec2& a = alice.amplitudes();
  const Vec2& b = bob.amplitudes();
  return PureState({a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1)});
}

Mat4 tensor(const Mat2& alice, const Mat2& bob) {
  Mat4 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = alice(i, j) * bob;
    }
  }
  return out;
}

EighResult eigh(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(op.entries());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigh: eigendecomposition failed to converge");
  }
  // Eigen returns ascending order with orthonormal eigenvectors (also within
  // degenerate eigenspaces); reverse to the descending convention.
  EighResult result;
  for (int i = 0; i < 4; ++i) {
    result.eigenvalues[i] = solver.eigenvalues()(3 - i);
    result.eigenvectors[i] = solver.eigenvectors().col(3 - i);
  }
  return result;
}

double fidelity(const DensityMatrix& sigma, const PureState& psi) {
  const Complex value =
      psi.amplitudes().dot(sigma.entries() * psi.amplitudes());
  return value.real();
}

double expectation(const HermitianOperator& op, const DensityMatrix& sigma) {
  const Complex tr = (op.entries() * sigma.entries()).trace();
  if (std::abs(tr.imag()) > 1e-12) {
    throw std::runtime_error("expectation: trace has a non-real component");
  }
  return tr.real();
}

}  // namespace qsv
