#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>

namespace qsv {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

/// Basis conventions used everywhere in this project:
///   single qubit: {H, V};  two qubits: {HH, HV, VH, VV}, Alice first.
/// Indices into the two-qubit basis.
enum BasisIndex : int { kHH = 0, kHV = 1, kVH = 2, kVV = 3 };

inline double radians(double degrees) { return degrees * M_PI / 180.0; }

/// A normalized single-qubit state in the {H, V} basis.
class SingleQubitState {
 public:
  /// Validates unit norm to 1e-12.
  explicit SingleQubitState(const Vec2& amplitudes);

  static SingleQubitState h();
  static SingleQubitState v();
  static SingleQubitState plus();
  static SingleQubitState minus();
  static SingleQubitState right();  ///< Pauli-Y eigenstate |R>
  static SingleQubitState left();   ///< Pauli-Y eigenstate |L>
  /// |upsilon+-> = sin(theta)|H> -+ cos(theta)|V>, theta in degrees.
  static SingleQubitState upsilon(double theta_deg, int sign);
  /// |omega+-> = sin(theta)|H> +- i cos(theta)|V>, theta in degrees.
  static SingleQubitState omega(double theta_deg, int sign);

  const Vec2& amplitudes() const { return amp_; }
  Mat2 projector() const { return amp_ * amp_.adjoint(); }

 private:
  Vec2 amp_;
};

/// A normalized two-qubit pure state in the {HH, HV, VH, VV} basis. States
/// from the target family carry their construction angle for reporting.
class PureState {
 public:
  /// Validates unit norm to 1e-12.
  explicit PureState(const Vec4& amplitudes,
                     std::optional<double> theta_deg = std::nullopt);

  const Vec4& amplitudes() const { return amp_; }
  std::optional<double> theta_deg() const { return theta_deg_; }
  Mat4 projector() const { return amp_ * amp_.adjoint(); }

 private:
  Vec4 amp_;
  std::optional<double> theta_deg_;
};

/// A 4x4 Hermitian operator. The constructor enforces hermiticity to 1e-12
/// entrywise, so downstream spectral code never sees an invalid input.
class HermitianOperator {
 public:
  explicit HermitianOperator(const Mat4& entries);

  static HermitianOperator identity();

  const Mat4& entries() const { return m_; }

 private:
  Mat4 m_;
};

/// A 4x4 density matrix: Hermitian (1e-12), unit trace (1e-10),
/// eigenvalues >= -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Mat4& entries);

  static DensityMatrix pure(const PureState& psi);
  static DensityMatrix maximally_mixed();

  const Mat4& entries() const { return m_; }

 private:
  Mat4 m_;
};

/// |Psi(theta)> = cos(theta)|HV> - sin(theta)|VH>, theta in degrees.
/// Throws std::domain_error outside (0, 90).
PureState target_state(double theta_deg);

/// |Psi_perp(theta)> = sin(theta)|HV> + cos(theta)|VH>: the unique unit
/// vector (up to phase) orthogonal to |Psi(theta)>, |HH> and |VV>.
PureState orthogonal_state(double theta_deg);

/// Kronecker products in the fixed basis order; the first factor is Alice.
PureState tensor(const SingleQubitState& alice, const SingleQubitState& bob);
Mat4 tensor(const Mat2& alice, const Mat2& bob);

/// Spectral decomposition of a Hermitian operator, eigenvalues descending.
struct EighResult {
  std::array<double, 4> eigenvalues;  ///< descending
  std::array<Vec4, 4> eigenvectors;   ///< orthonormal, matching order
};

EighResult eigh(const HermitianOperator& op);

/// <psi| sigma |psi>.
double fidelity(const DensityMatrix& sigma, const PureState& psi);

/// tr(op * sigma). The imaginary part is checked to be below 1e-12 and
/// discarded.
double expectation(const HermitianOperator& op, const DensityMatrix& sigma);

}  // namespace qsv
