#include <doctest.h>

#include <cmath>
#include <random>

#include "qmeas/qcore.hpp"

using namespace qmeas;

namespace {

Eigen::MatrixXcd dense_expm(const Eigen::MatrixXcd& h, double t, int terms = 60) {
  // Taylor series with scaling and squaring; only for small test matrices.
  int squarings = 0;
  double scale = h.cwiseAbs().maxCoeff() * std::abs(t) * h.rows();
  while (scale > 0.5) {
    scale /= 2;
    ++squarings;
  }
  const Eigen::MatrixXcd a = -kI * h * (t / std::pow(2.0, squarings));
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(h.rows(), h.cols()), sum = term;
  for (int k = 1; k < terms; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("composite space dimensions") {
  const CompositeSpace s({2, 3, 4});
  CHECK(s.dim() == 24);
  CHECK(s.restricted({0, 2}).dim() == 8);
  CHECK(s.with_leg(5).dim() == 120);
  CHECK_THROWS(CompositeSpace({2, 0}));
}

TEST_CASE("state validation") {
  Eigen::VectorXcd v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(QuantumState::pure(v), ValidationError);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(QuantumState::mixed(rho), ValidationError);
  rho /= 2.0;
  CHECK_NOTHROW(QuantumState::mixed(rho));
  Eigen::MatrixXcd neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(QuantumState::mixed(neg), ValidationError);
  CHECK_THROWS_AS(QuantumState::mixed(CompositeSpace({2, 2}), rho), ArgumentError);
}

TEST_CASE("propagator matches a Taylor-series exponential") {
  std::mt19937_64 rng(3);
  for (int d : {2, 3, 5}) {
    const Eigen::MatrixXcd h = random_hermitian(d, rng);
    const auto sd = spectral_decomposition(h);
    CHECK((sd.reconstruct() - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sd.propagator(0.7) - dense_expm(h, 0.7)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("random objects have their defining properties") {
  std::mt19937_64 rng(4);
  for (int d = 2; d <= 8; ++d) {
    const Eigen::MatrixXcd u = random_unitary(d, rng);
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXcd rho = random_density(d, rng);
    CHECK(std::abs(rho.trace() - cplx(1.0)) < 1e-12);
    CHECK(hermiticity_residual(rho) < 1e-12);
    CHECK(random_pure(d, rng).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("partial trace of a product state returns the factors") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd a = random_density(2, rng), b = random_density(3, rng);
  const QuantumState ab = QuantumState::mixed(CompositeSpace({2, 3}), tensor(a, b));
  CHECK((partial_trace(ab, {0}).density() - a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((partial_trace(ab, {1}).density() - b).cwiseAbs().maxCoeff() < 1e-12);
  // Bell state: maximally mixed marginal.
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto m = partial_trace(QuantumState::pure(CompositeSpace({2, 2}), bell), {1}).density();
  CHECK((m - Eigen::MatrixXcd::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("purification reduces back to the state") {
  std::mt19937_64 rng(6);
  for (int rank : {1, 2, 3}) {
    const Eigen::MatrixXcd rho = random_density(3, rng, rank);
    const QuantumState p = purify(QuantumState::mixed(rho));
    REQUIRE(p.is_pure());
    CHECK((partial_trace(p, {0}).density() - rho).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("evolution preserves trace and matches the pure-state rule") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXcd h = random_hermitian(4, rng);
  const Eigen::VectorXcd psi = random_pure(4, rng);
  const auto out = evolve_exact(h, QuantumState::pure(psi), 1.3);
  CHECK((out.vector() - dense_expm(h, 1.3) * psi).norm() < 1e-10);
  CHECK_THROWS_AS(evolve_exact(h, QuantumState::pure(random_pure(3, rng)), 1.0), ArgumentError);
}

TEST_CASE("sqrt_psd squares back") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXcd rho = random_density(5, rng);
  const Eigen::MatrixXcd s = sqrt_psd(rho);
  CHECK((s * s - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lowrank_norm agrees with the dense norm") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd w(12, 4), m(4, 4);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = cplx(g(rng), g(rng));
    m = random_hermitian(4, rng);
    const double dense = operator_norm(Eigen::MatrixXcd(w * m * w.adjoint()));
    CHECK(lowrank_norm(w.adjoint() * w, m) == doctest::Approx(dense).epsilon(1e-9));
  }
}

TEST_CASE("hermitian basis is orthogonal and complete") {
  const auto basis = hermitian_basis(3);
  REQUIRE(basis.size() == 9);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    CHECK(hermiticity_residual(basis[i]) < 1e-15);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double ip = (basis[i].adjoint() * basis[j]).trace().real();
      if (i != j) CHECK(std::abs(ip) < 1e-15);
      else CHECK(ip > 0.0);
    }
  }
}

TEST_CASE("Pauli algebra") {
  const Eigen::Matrix2cd x = pauli_x(), y = pauli_y(), z = pauli_z();
  CHECK(((x * y) - kI * z).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(operator_norm(z) == doctest::Approx(1.0));
  CHECK_THROWS_AS(require_hermitian(Eigen::MatrixXcd(x * y), "xy"), ValidationError);
}

TEST_CASE("tensor dimension cap") {
  const Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(128, 128);
  CHECK_THROWS_AS(tensor(big, big), CapacityError);
}
