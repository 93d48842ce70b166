#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmeas/metrics.hpp"

using namespace qmeas;

namespace {

Eigen::MatrixXcd ket(int d, int i) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  v(i) = 1.0;
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("fidelity closed forms") {
  const Eigen::MatrixXcd half = Eigen::MatrixXcd::Identity(2, 2) / 2.0;
  CHECK(fidelity(half, ket(2, 0)) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(fidelity(ket(2, 0), ket(2, 1)) == doctest::Approx(0.0));
  CHECK(fidelity(half, half) == doctest::Approx(1.0).epsilon(1e-12));
  // Pure states: |<psi|phi>|.
  std::mt19937_64 rng(1);
  const Eigen::VectorXcd a = random_pure(4, rng), b = random_pure(4, rng);
  CHECK(fidelity(Eigen::MatrixXcd(a * a.adjoint()), Eigen::MatrixXcd(b * b.adjoint())) ==
        doctest::Approx(std::abs(a.dot(b))).epsilon(1e-9));
  // Commuting states: classical Bhattacharyya coefficient.
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(3, 3), q = p;
  p.diagonal() << 0.5, 0.3, 0.2;
  q.diagonal() << 0.1, 0.6, 0.3;
  CHECK(fidelity(p, q) == doctest::Approx(std::sqrt(0.05) + std::sqrt(0.18) + std::sqrt(0.06)).epsilon(1e-12));
}

TEST_CASE("fidelity is symmetric and bounded") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    const Eigen::MatrixXcd r = random_density(d, rng, 1 + trial % d), s = random_density(d, rng);
    const double f = fidelity(r, s);
    CHECK(f >= -1e-12);
    CHECK(f <= 1 + 1e-12);
    CHECK(std::abs(f - fidelity(s, r)) < 1e-9);
  }
}

TEST_CASE("trace distance uses the unnormalized convention") {
  CHECK(trace_distance_paper(ket(2, 0), ket(2, 1)) == doctest::Approx(2.0));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd r = random_density(3, rng), s = random_density(3, rng);
    const double d = trace_distance_paper(r, s);
    const double f = fidelity(r, s);
    // Fuchs-van de Graaf in the factor-2 convention: 2(1 - F) <= D <= 2 sqrt(1 - F^2).
    CHECK(d >= 2 * (1 - f) - 1e-9);
    CHECK(d <= 2 * std::sqrt(std::max(0.0, 1 - f * f)) + 1e-9);
  }
}

TEST_CASE("Bures angle is a metric on random triples") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXcd a = random_density(3, rng), b = random_density(3, rng), c = random_density(3, rng);
    CHECK(bures_angle(a, c) <= bures_angle(a, b) + bures_angle(b, c) + 1e-9);
    CHECK(bures_angle(a, a) == doctest::Approx(0.0).epsilon(1e-6));
  }
  CHECK(bures_angle(ket(2, 0), ket(2, 1)) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("energy fluctuation") {
  Eigen::VectorXcd plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const Eigen::MatrixXcd z = pauli_z();
  CHECK(energy_fluctuation(z, QuantumState::pure(plus)) == doctest::Approx(1.0));
  Eigen::VectorXcd up = Eigen::VectorXcd::Zero(2);
  up(0) = 1.0;
  CHECK(energy_fluctuation(z, QuantumState::pure(up)) == doctest::Approx(0.0));
  // Mixed: variance of the diagonal distribution.
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
  rho.diagonal() << 0.25, 0.75;
  CHECK(energy_fluctuation(z, QuantumState::mixed(rho)) == doctest::Approx(std::sqrt(1 - 0.25)));
}

TEST_CASE("spectral distribution and overall width") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
  h.diagonal() << 0.0, 1.0, 5.0;
  Eigen::VectorXcd psi(3);
  psi << std::sqrt(0.45), std::sqrt(0.45), std::sqrt(0.1);
  const auto d = spectral_distribution(h, QuantumState::pure(psi));
  REQUIRE(d.points().size() == 3);
  CHECK(overall_width(d, 0.85) == doctest::Approx(1.0));
  CHECK(overall_width(d, 0.95) == doctest::Approx(5.0));
  CHECK(overall_width(d, 0.4) == doctest::Approx(0.0));
  CHECK_THROWS(overall_width(d, 1.5));
  CHECK_THROWS_AS(SpectralDistribution({{0.0, 0.5}, {1.0, 0.4}}), ValidationError);
}

TEST_CASE("histogram width") {
  SpectralHistogram h{{0, 1, 2, 3, 4}, {0.1, 0.4, 0.4, 0.1}};
  CHECK(overall_width(h, 0.8) == doctest::Approx(2.0));
  CHECK(overall_width(h, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("width is monotone in alpha") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd h = random_hermitian(6, rng);
  const auto d = spectral_distribution(h, QuantumState::pure(random_pure(6, rng)));
  double prev = 0.0;
  for (double a = 0.05; a <= 1.0; a += 0.05) {
    const double w = overall_width(d, a);
    CHECK(w >= prev - 1e-12);
    prev = w;
  }
}

TEST_CASE("Mandelstam-Tamm bound") {
  CHECK(mt_overlap_bound(1.0, 0.0) == doctest::Approx(1.0));
  CHECK(mt_overlap_bound(2.0, 0.5) == doctest::Approx(std::cos(1.0)));
  CHECK(mt_overlap_bound(1.0, 2.0) == 0.0);
}
