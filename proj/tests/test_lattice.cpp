#include <doctest.h>

#include <cmath>
#include <random>

#include "qmeas/lattice.hpp"
#include "qmeas/metrics.hpp"

using namespace qmeas;

TEST_CASE("random chain respects the bond bound") {
  const ChainSpec c = random_chain(6, 0.7, 3);
  CHECK_NOTHROW(c.validate());
  REQUIRE(c.bonds.size() == 5);
  for (const auto& b : c.bonds) CHECK(operator_norm(b) == doctest::Approx(0.7).epsilon(1e-12));
  for (const auto& h : c.onsite) CHECK(operator_norm(h) <= 1.0 + 1e-12);
  CHECK_THROWS_AS(random_chain(kMaxChainLength + 1, 1.0, 1), CapacityError);
}

TEST_CASE("embedding places operators on the right sites") {
  const Eigen::MatrixXcd z = pauli_z();
  const Eigen::MatrixXcd e = embed(3, 1, z);
  const Eigen::MatrixXcd i2 = Eigen::MatrixXcd::Identity(2, 2);
  CHECK((e - tensor(tensor(i2, z), i2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(embed(3, 2, Eigen::MatrixXcd(tensor(z, z))));
}

TEST_CASE("box Hamiltonians are additive across a bond") {
  const ChainSpec c = random_chain(6, 1.0, 5);
  const Eigen::MatrixXcd lhs = box_hamiltonian(c, {0, 2}) + box_hamiltonian(c, {3, 5}) + bond_term(c, 2);
  CHECK((lhs - box_hamiltonian(c, {0, 5})).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Heisenberg evolution is a unitary conjugation") {
  const ChainSpec c = random_chain(4, 1.0, 6);
  const Eigen::MatrixXcd h = box_hamiltonian(c, {0, 3});
  const auto sd = spectral_decomposition(h);
  const Eigen::MatrixXcd a = embed(4, 0, pauli_x());
  const Eigen::MatrixXcd at = heisenberg(sd, a, 0.9);
  CHECK((at * at - Eigen::MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((heisenberg(sd, h, 0.9) - h).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("locality error") {
  const ChainSpec c = random_chain(6, 1.0, 7);
  const auto err = locality_sweep(c, pauli_z(), 0.8);
  REQUIRE(err.size() == 6);
  CHECK(err.back() <= 1e-10);
  CHECK(err.front() > err.back());
  CHECK(locality_error(c, pauli_z(), 0.8, {0, 2}) == doctest::Approx(err[2]).epsilon(1e-10));
  CHECK(locality_error(c, pauli_z(), 0.0, {0, 0}) <= 1e-12);
  // The error grows from zero at short times.
  const double e_short = locality_error(c, pauli_z(), 0.05, {0, 1});
  const double e_long = locality_error(c, pauli_z(), 0.8, {0, 1});
  CHECK(e_short < e_long);
}

TEST_CASE("box energy fluctuation of product states") {
  const ChainSpec c = random_chain(4, 1.0, 8);
  std::mt19937_64 rng(9);
  std::vector<Eigen::VectorXcd> sites;
  for (int x = 0; x < 4; ++x) sites.push_back(random_pure(2, rng));
  const Eigen::VectorXcd psi = product_state(sites);
  CHECK(psi.norm() == doctest::Approx(1.0));
  const Eigen::MatrixXcd hb = box_hamiltonian(c, {1, 2});
  CHECK(box_energy_fluctuation(c, {1, 2}, sites) ==
        doctest::Approx(energy_fluctuation(hb, QuantumState::pure(psi))).epsilon(1e-12));
}

TEST_CASE("Bures-angle triangle inequality on random triples") {
  const RasteginResult r = rastegin_check(300, 3, 10);
  CHECK(r.trials == 300);
  CHECK(r.passed());
  CHECK(r.min_slack >= -1e-9);
}
