#pragma once

// Dense complex linear algebra and quantum-state primitives.
//
// Conventions: hbar = 1 internally; the system leg is index 0, apparatus legs
// follow, purification legs are appended last.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <string>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "qmeas/errors.hpp"

namespace qmeas {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// Default cap on the total Hilbert-space dimension of dense objects.
inline constexpr Eigen::Index kMaxDimension = 4096;

/// Negative eigenvalues of density matrices down to this magnitude are treated as 0.
inline constexpr double kEigenClamp = 1e-10;

inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-9;

/// Ordered tensor-factor bookkeeping. Leg order is fixed at construction.
class CompositeSpace {
 public:
  CompositeSpace() = default;
  explicit CompositeSpace(std::vector<int> leg_dims);

  const std::vector<int>& leg_dims() const { return legs_; }
  int leg_count() const { return static_cast<int>(legs_.size()); }
  int leg_dim(int leg) const { return legs_.at(static_cast<std::size_t>(leg)); }
  Eigen::Index dim() const { return dim_; }

  /// The space formed by the listed legs, in ascending leg order.
  CompositeSpace restricted(const std::vector<int>& keep) const;
  CompositeSpace with_leg(int d) const;

  friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

 private:
  std::vector<int> legs_;
  Eigen::Index dim_ = 0;
};

/// Pure vector or density operator on a CompositeSpace. Validated on construction.
class QuantumState {
 public:
  static QuantumState pure(CompositeSpace space, Eigen::VectorXcd psi);
  static QuantumState mixed(CompositeSpace space, Eigen::MatrixXcd rho);
  /// Single-leg convenience constructors.
  static QuantumState pure(Eigen::VectorXcd psi);
  static QuantumState mixed(Eigen::MatrixXcd rho);

  bool is_pure() const { return std::holds_alternative<Eigen::VectorXcd>(data_); }
  const CompositeSpace& space() const { return space_; }
  Eigen::Index dim() const { return space_.dim(); }

  /// Throws ArgumentError for mixed states.
  const Eigen::VectorXcd& vector() const;
  Eigen::MatrixXcd density() const;

 private:
  QuantumState(CompositeSpace space, std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data)
      : space_(std::move(space)), data_(std::move(data)) {}

  CompositeSpace space_;
  std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data_;
};

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // orthonormal columns

  Eigen::MatrixXcd reconstruct() const;
  /// exp(-i H t)
  Eigen::MatrixXcd propagator(double t) const;
};

/// Max-entry size of A - A^dagger.
template <typename Derived>
double hermiticity_residual(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Throws ValidationError unless A is Hermitian within kHermitianTolerance (relative to max|A|, floor 1).
void require_hermitian(const Eigen::MatrixXcd& a, const char* what);

SpectralDecomposition spectral_decomposition(const Eigen::MatrixXcd& h);

/// Kronecker product with leg order (a, b).
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDimension || cols > kMaxDimension)
    throw CapacityError("tensor product dimension exceeds " + std::to_string(kMaxDimension));
  Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest singular value.
template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  const Eigen::MatrixXcd m = a.template cast<cplx>();
  if (m.rows() == m.cols() && hermiticity_residual(m) <= 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

/// Reduced state on the listed legs. Trace is preserved.
QuantumState partial_trace(const QuantumState& s, const std::vector<int>& keep);

/// Pure state on space + one appended leg whose reduction to the original legs is rho.
QuantumState purify(const QuantumState& rho);

/// exp(-iHt) s exp(iHt). H must be Hermitian and match the state's dimension.
QuantumState evolve_exact(const Eigen::MatrixXcd& h, const QuantumState& s, double t);
QuantumState evolve_exact(const SpectralDecomposition& h, const QuantumState& s, double t);

/// Principal square root of a positive semidefinite matrix (eigenvalues clamped at 0).
Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& rho);

/// Operator norm of W M W^dagger where only the Gram matrix G = W^dagger W is known.
double lowrank_norm(const Eigen::MatrixXcd& gram, const Eigen::MatrixXcd& m);

Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

/// Hermitian operator basis: diagonal units, symmetrized and antisymmetrized off-diagonal units.
std::vector<Eigen::MatrixXcd> hermitian_basis(int d);

/// Random objects. All draw from the caller's engine so results are reproducible by seed.
Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng);
Eigen::MatrixXcd random_unitary(int d, std::mt19937_64& rng);
Eigen::VectorXcd random_pure(int d, std::mt19937_64& rng);
Eigen::MatrixXcd random_density(int d, std::mt19937_64& rng, int rank = -1);

}  // namespace qmeas
