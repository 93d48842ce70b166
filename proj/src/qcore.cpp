#include "qmeas/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmeas {

CompositeSpace::CompositeSpace(std::vector<int> leg_dims) : legs_(std::move(leg_dims)) {
  if (legs_.empty()) throw ArgumentError("composite space needs at least one leg");
  dim_ = 1;
  for (int d : legs_) {
    if (d <= 0) throw ArgumentError("leg dimensions must be positive");
    dim_ *= d;
    if (dim_ > kMaxDimension)
      throw CapacityError("total dimension exceeds " + std::to_string(kMaxDimension));
  }
}

CompositeSpace CompositeSpace::restricted(const std::vector<int>& keep) const {
  std::vector<int> legs;
  for (int leg = 0; leg < leg_count(); ++leg)
    if (std::find(keep.begin(), keep.end(), leg) != keep.end()) legs.push_back(legs_[leg]);
  return CompositeSpace(std::move(legs));
}

CompositeSpace CompositeSpace::with_leg(int d) const {
  auto legs = legs_;
  legs.push_back(d);
  return CompositeSpace(std::move(legs));
}

QuantumState QuantumState::pure(CompositeSpace space, Eigen::VectorXcd psi) {
  if (psi.size() != space.dim()) throw ArgumentError("state vector does not match space dimension");
  if (!psi.allFinite()) throw ValidationError("state vector has non-finite entries");
  if (std::abs(psi.norm() - 1.0) > kStateTolerance)
    throw ValidationError("pure state is not normalized");
  return QuantumState(std::move(space), std::move(psi));
}

QuantumState QuantumState::mixed(CompositeSpace space, Eigen::MatrixXcd rho) {
  if (rho.rows() != space.dim() || rho.cols() != space.dim())
    throw ArgumentError("density matrix does not match space dimension");
  if (!rho.allFinite()) throw ValidationError("density matrix has non-finite entries");
  if (hermiticity_residual(rho) > kStateTolerance) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kStateTolerance)
    throw ValidationError("density matrix does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kStateTolerance)
    throw ValidationError("density matrix has a negative eigenvalue");
  return QuantumState(std::move(space), std::move(rho));
}

QuantumState QuantumState::pure(Eigen::VectorXcd psi) {
  CompositeSpace space({static_cast<int>(psi.size())});
  return pure(std::move(space), std::move(psi));
}

QuantumState QuantumState::mixed(Eigen::MatrixXcd rho) {
  CompositeSpace space({static_cast<int>(rho.rows())});
  return mixed(std::move(space), std::move(rho));
}

const Eigen::VectorXcd& QuantumState::vector() const {
  if (!is_pure()) throw ArgumentError("state is mixed");
  return std::get<Eigen::VectorXcd>(data_);
}

Eigen::MatrixXcd QuantumState::density() const {
  if (is_pure()) {
    const auto& v = std::get<Eigen::VectorXcd>(data_);
    return v * v.adjoint();
  }
  return std::get<Eigen::MatrixXcd>(data_);
}

Eigen::MatrixXcd SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
}

Eigen::MatrixXcd SpectralDecomposition::propagator(double t) const {
  Eigen::VectorXcd phases(eigenvalues.size());
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) phases(k) = std::exp(-kI * eigenvalues(k) * t);
  return eigenvectors * phases.asDiagonal() * eigenvectors.adjoint();
}

void require_hermitian(const Eigen::MatrixXcd& a, const char* what) {
  if (a.rows() != a.cols()) throw ValidationError(std::string(what) + " is not square");
  const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_residual(a) > kHermitianTolerance * scale)
    throw ValidationError(std::string(what) + " is not Hermitian");
}

SpectralDecomposition spectral_decomposition(const Eigen::MatrixXcd& h) {
  require_hermitian(h, "Hamiltonian");
  if (h.rows() > kMaxDimension) throw CapacityError("matrix dimension exceeds limit");
  // Symmetrize so tiny anti-Hermitian noise does not leak into the solver.
  const Eigen::MatrixXcd hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hs);
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

// Splits a flat index into (kept, traced) sub-indices for a leg selection.
struct LegSplit {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> traced;
  Eigen::Index kept_dim = 1;
  Eigen::Index traced_dim = 1;
};

LegSplit split_legs(const CompositeSpace& space, const std::vector<int>& keep) {
  const auto& legs = space.leg_dims();
  const int n = space.leg_count();
  std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw ArgumentError("leg index out of range");
    is_kept[static_cast<std::size_t>(k)] = true;
  }
  LegSplit out;
  for (int l = 0; l < n; ++l) (is_kept[l] ? out.kept_dim : out.traced_dim) *= legs[l];
  out.kept.resize(static_cast<std::size_t>(space.dim()));
  out.traced.resize(static_cast<std::size_t>(space.dim()));
  for (Eigen::Index flat = 0; flat < space.dim(); ++flat) {
    Eigen::Index rem = flat, kept = 0, traced = 0, kept_stride = 1, traced_stride = 1;
    for (int l = n - 1; l >= 0; --l) {
      const Eigen::Index digit = rem % legs[l];
      rem /= legs[l];
      if (is_kept[l]) {
        kept += digit * kept_stride;
        kept_stride *= legs[l];
      } else {
        traced += digit * traced_stride;
        traced_stride *= legs[l];
      }
    }
    out.kept[static_cast<std::size_t>(flat)] = kept;
    out.traced[static_cast<std::size_t>(flat)] = traced;
  }
  return out;
}

}  // namespace

QuantumState partial_trace(const QuantumState& s, const std::vector<int>& keep) {
  if (keep.empty()) throw ArgumentError("partial trace needs a nonempty set of kept legs");
  const LegSplit split = split_legs(s.space(), keep);
  const CompositeSpace out_space = s.space().restricted(keep);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(split.kept_dim, split.kept_dim);
  if (s.is_pure()) {
    // Reshape into (kept x traced) and form M M^dagger.
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(split.kept_dim, split.traced_dim);
    const auto& v = s.vector();
    for (Eigen::Index f = 0; f < v.size(); ++f)
      m(split.kept[static_cast<std::size_t>(f)], split.traced[static_cast<std::size_t>(f)]) = v(f);
    out = m * m.adjoint();
  } else {
    const Eigen::MatrixXcd rho = s.density();
    // Group flat indices by traced sub-index.
    std::vector<std::vector<Eigen::Index>> by_traced(static_cast<std::size_t>(split.traced_dim));
    for (Eigen::Index f = 0; f < rho.rows(); ++f)
      by_traced[static_cast<std::size_t>(split.traced[static_cast<std::size_t>(f)])].push_back(f);
    for (const auto& group : by_traced)
      for (Eigen::Index i : group)
        for (Eigen::Index j : group)
          out(split.kept[static_cast<std::size_t>(i)], split.kept[static_cast<std::size_t>(j)]) += rho(i, j);
  }
  out = 0.5 * (out + out.adjoint());
  out /= out.trace().real();
  return QuantumState::mixed(out_space, std::move(out));
}

QuantumState purify(const QuantumState& rho) {
  const Eigen::Index d = rho.dim();
  if (d * d > kMaxDimension) throw CapacityError("purification dimension exceeds limit");
  const Eigen::MatrixXcd m = rho.density();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  const CompositeSpace space = rho.space().with_leg(static_cast<int>(d));
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double lambda = std::max(0.0, es.eigenvalues()(k));
    if (lambda == 0.0) continue;
    // |e_k> (x) |k> with the auxiliary leg last.
    for (Eigen::Index i = 0; i < d; ++i) psi(i * d + k) = std::sqrt(lambda) * es.eigenvectors()(i, k);
  }
  psi.normalize();
  return QuantumState::pure(space, std::move(psi));
}

QuantumState evolve_exact(const SpectralDecomposition& h, const QuantumState& s, double t) {
  if (h.eigenvalues.size() != s.dim()) throw ArgumentError("Hamiltonian does not match state dimension");
  const Eigen::MatrixXcd u = h.propagator(t);
  if (s.is_pure()) {
    Eigen::VectorXcd v = u * s.vector();
    v.normalize();
    return QuantumState::pure(s.space(), std::move(v));
  }
  Eigen::MatrixXcd r = u * s.density() * u.adjoint();
  r = 0.5 * (r + r.adjoint());
  r /= r.trace().real();
  return QuantumState::mixed(s.space(), std::move(r));
}

QuantumState evolve_exact(const Eigen::MatrixXcd& h, const QuantumState& s, double t) {
  if (h.rows() != s.dim()) throw ArgumentError("Hamiltonian does not match state dimension");
  return evolve_exact(spectral_decomposition(h), s, t);
}

Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  Eigen::VectorXd s = es.eigenvalues();
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = s(k) > 0.0 ? std::sqrt(s(k)) : 0.0;
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double lowrank_norm(const Eigen::MatrixXcd& gram, const Eigen::MatrixXcd& m) {
  // G = U L U^dagger, W = Q R with R = L^{1/2} U^dagger restricted to the numerical range.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (gram + gram.adjoint()));
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  if (top == 0.0) return 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < gram.rows(); ++k)
    if (es.eigenvalues()(k) > 1e-14 * top) keep.push_back(k);
  Eigen::MatrixXcd r(static_cast<Eigen::Index>(keep.size()), gram.cols());
  for (std::size_t i = 0; i < keep.size(); ++i)
    r.row(static_cast<Eigen::Index>(i)) =
        std::sqrt(es.eigenvalues()(keep[i])) * es.eigenvectors().col(keep[i]).adjoint();
  return operator_norm(r * m * r.adjoint());
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, -kI, kI, 0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

std::vector<Eigen::MatrixXcd> hermitian_basis(int d) {
  std::vector<Eigen::MatrixXcd> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
    e(j, j) = 1.0;
    basis.push_back(std::move(e));
  }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d, d);
      s(j, k) = s(k, j) = r;
      basis.push_back(std::move(s));
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
      a(j, k) = -kI * r;
      a(k, j) = kI * r;
      basis.push_back(std::move(a));
    }
  return basis;
}

namespace {

Eigen::MatrixXcd ginibre(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

}  // namespace

Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
  const Eigen::MatrixXcd g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

Eigen::MatrixXcd random_unitary(int d, std::mt19937_64& rng) {
  // Haar measure: QR of a Ginibre matrix with phases of R's diagonal removed.
  const Eigen::MatrixXcd g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const cplx diag = r(k, k);
    if (std::abs(diag) > 0) q.col(k) *= diag / std::abs(diag);
  }
  return q;
}

Eigen::VectorXcd random_pure(int d, std::mt19937_64& rng) {
  Eigen::VectorXcd v = ginibre(d, 1, rng).col(0);
  v.normalize();
  return v;
}

Eigen::MatrixXcd random_density(int d, std::mt19937_64& rng, int rank) {
  if (rank <= 0) rank = d;
  const Eigen::MatrixXcd g = ginibre(d, rank, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return rho;
}

}  // namespace qmeas
