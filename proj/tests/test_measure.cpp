#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmeas/measure.hpp"

using namespace qmeas;

namespace {

constexpr double kPi = std::numbers::pi;

// Reduced system state by a dense partial trace of the joint density matrix.
Eigen::MatrixXcd dense_restricted(const FiniteModel& m, const Eigen::MatrixXcd& rho, double tau) {
  const Eigen::MatrixXcd joint = m.evolve_joint(rho, tau);
  return partial_trace(QuantumState::mixed(CompositeSpace({m.system_dim(), m.apparatus_dim()}), joint), {0}).density();
}

}  // namespace

TEST_CASE("restricted state agrees with a dense partial trace") {
  std::mt19937_64 rng(1);
  const FiniteModel m = random_finite_model(3, 2, 9);
  const EvolvedBasis e(m, 0.7);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXcd rho = random_density(3, rng);
    CHECK((e.restricted(rho) - dense_restricted(m, rho, 0.7)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("meter probabilities of the conditional flip") {
  const FiniteModel m = cnot_model(1.0, kPi / 4);
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(2, 2);
  one(1, 1) = 1.0;
  const auto p = outcome_probabilities(m, one, kPi / 4);
  // Pointer rotated by pi/4: sin^2 on the flipped outcome.
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  const auto err = worst_case_error(m, kPi / 4);
  CHECK(err.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(worst_case_error(m, kPi / 2).value < 1e-12);
}

TEST_CASE("worst-case error is attained on the outcome eigenspaces") {
  // The eigenspace projectors themselves never exceed the exact value.
  const FiniteModel m = cnot_model(1.0, 1.0);
  const EvolvedBasis e(m, 1.0);
  const auto err = worst_case_error(e, m.pvm());
  for (int n = 0; n < 2; ++n) {
    const auto p = outcome_probabilities(e, m.pvm()[static_cast<std::size_t>(n)]);
    CHECK(1.0 - p[static_cast<std::size_t>(n)] <= err.value + 1e-12);
  }
  CHECK(err.value == doctest::Approx(std::pow(std::cos(1.0), 2)).epsilon(1e-12));
}

TEST_CASE("models without a meter refuse to report probabilities") {
  const FiniteModel m = random_finite_model(2, 2, 4);
  CHECK_THROWS_AS(outcome_probabilities(m, Eigen::MatrixXcd::Identity(2, 2) / 2.0, 1.0), ProtocolError);
}

TEST_CASE("coin-flip meter: no information, no disturbance") {
  const FiniteModel m = free_coin_model();
  const auto run = run_protocol(m, 1.0);
  REQUIRE(run.has_meter);
  CHECK(run.probabilities[0][0] == doctest::Approx(0.5));
  CHECK(run.error.value == doctest::Approx(0.5));
  CHECK(run.disturbance.f_plus == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(run.disturbance.f_pm == doctest::Approx(0.0).epsilon(1e-6));
  for (double p : run.p.p) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perfect measurement destroys conjugate information") {
  const FiniteModel m = cnot_model(1.0, kPi / 2);
  const auto d = disturbance_profile(m, kPi / 2);
  CHECK(d.f_pm == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.f_plus == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-10));
  const auto fam = conjugate_family(EvolvedBasis(m, kPi / 2), m.system_hamiltonian(), 2);
  CHECK(fam.min_fidelity == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(fam.max_pairwise_distance < 1e-10);
}

TEST_CASE("p(t) respects the cos^2 bound on random models") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteModel m = random_finite_model(2, 3, 100 + static_cast<std::uint64_t>(trial));
    const PCurve c = p_curve(m, random_pure(2, rng), kPi / 2, 21);
    REQUIRE(c.times.size() == 21);
    CHECK(c.p.front() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < c.p.size(); ++i) CHECK(c.p[i] >= std::pow(std::cos(c.times[i]), 2) - 1e-9);
  }
}

TEST_CASE("Stern-Gerlach device measures perfectly") {
  const SternGerlach2D m(SternGerlach2D::Params{});
  RunOptions o;
  o.with_p_curve = false;
  const auto run = run_protocol(m, m.tau(), o);
  CHECK(run.error.value < 1e-6);
  CHECK(run.disturbance.f_pm > 1 - 1e-5);
}

TEST_CASE("chiral device does not measure") {
  const ChiralModel m(ChiralModel::Params{});
  RunOptions o;
  o.with_p_curve = false;
  const auto run = run_protocol(m, m.tau(), o);
  CHECK(run.error.value > 0.4);
  // Branches differ only by a phase: the restricted states of |+> and |-> stay distinguishable.
  CHECK(run.disturbance.f_pm < 0.99);
}
