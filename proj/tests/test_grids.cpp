#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qmeas/grids.hpp"
#include "qmeas/quadrature.hpp"

using namespace qmeas;

namespace {

constexpr double kPi = std::numbers::pi;

cplx gaussian(double x, double x0, double s, double k0) {
  return std::pow(kPi * s * s, -0.25) * std::exp(-(x - x0) * (x - x0) / (2 * s * s)) * std::exp(kI * k0 * x);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec({100, -1, 1}).validate(), ArgumentError);
  CHECK_THROWS_AS(GridSpec({8, -1, 1}).validate(), ArgumentError);
  CHECK_THROWS_AS(GridSpec({64, 1, -1}).validate(), ArgumentError);
  CHECK_NOTHROW(GridSpec({64, -1, 1}).validate());
}

TEST_CASE("wave numbers are in FFT order") {
  const GridSpec g{8, 0, 8};
  const Eigen::VectorXd k = g.wavenumbers();
  CHECK(k(0) == 0.0);
  CHECK(k(1) == doctest::Approx(2 * kPi / 8));
  CHECK(k(4) == doctest::Approx(-4 * 2 * kPi / 8));
  CHECK(k(7) == doctest::Approx(-2 * kPi / 8));
}

TEST_CASE("FFT round trip and Parseval") {
  const GridSpec g{256, -10, 10};
  WaveFunction psi = sample(g, [](double x) { return gaussian(x, 1.0, 0.8, 3.0); });
  const WaveFunction orig = psi;
  fft_axis(psi, 0, true);
  fft_axis(psi, 0, false);
  CHECK((psi.leg(0) - orig.leg(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(orig.norm_squared() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral translation of a band-limited packet") {
  const GridSpec g{512, -20, 20};
  const WaveFunction psi = sample(g, [](double x) { return gaussian(x, -3.0, 1.0, 2.0); });
  const WaveFunction moved = translate(psi, 4.5);
  const WaveFunction exact = sample(g, [](double x) { return gaussian(x - 4.5, -3.0, 1.0, 2.0); });
  CHECK((moved.leg(0) - exact.leg(0)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("moments of a Gaussian") {
  const GridSpec g{1024, -30, 30};
  const WaveFunction psi = sample(g, [](double x) { return gaussian(x, 2.0, 1.5, -1.25); });
  const Moments q = position_moments(psi);
  CHECK(q.mean == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(q.variance == doctest::Approx(1.5 * 1.5 / 2).epsilon(1e-10));
  const Moments p = momentum_moments(psi);
  CHECK(p.mean == doctest::Approx(-1.25).epsilon(1e-10));
  CHECK(p.variance == doctest::Approx(1 / (2 * 1.5 * 1.5)).epsilon(1e-8));
  const SpectralHistogram h = momentum_histogram(psi);
  double total = 0.0;
  for (double w : h.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(h.edges.size() == h.weights.size() + 1);
}

TEST_CASE("region probability and boundary mass") {
  const GridSpec g{512, -20, 20};
  const WaveFunction psi = sample(g, [](double x) { return gaussian(x, 0.0, 1.0, 0.0); });
  // The cell centred on x = 0 carries dx / sqrt(pi); splitting it evenly gives exactly 1/2.
  const double closed = region_probability(psi, [](double x) { return x >= 0.0; });
  const double open = region_probability(psi, [](double x) { return x > 0.0; });
  CHECK(closed - open == doctest::Approx(g.dx() / std::sqrt(std::numbers::pi)).epsilon(1e-10));
  CHECK((closed + open) / 2 == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(boundary_mass(psi, 5.0) < 1e-20);
  CHECK_NOTHROW(require_contained(psi, 5.0));
  const WaveFunction edge = sample(g, [](double x) { return gaussian(x, 18.0, 1.0, 0.0); });
  CHECK_THROWS_AS(require_contained(edge, 5.0), NumericalError);
}

TEST_CASE("closed-form 2x2 exponential is unitary and exact on Pauli matrices") {
  Eigen::Matrix2cd m = 0.3 * pauli_x() + 0.4 * pauli_z();
  const Eigen::Matrix2cd u = expm_hermitian2(m, 2.0);
  CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  // exp(-i t n.sigma) = cos t I - i sin t n.sigma for |n| = 1, here |n| = 0.5.
  const Eigen::Matrix2cd expect = std::cos(1.0) * Eigen::Matrix2cd::Identity() - kI * std::sin(1.0) * (m / 0.5);
  CHECK((u - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("split-step free Schrodinger evolution matches the analytic spread") {
  const GridSpec g{1024, -40, 40};
  const double s = 1.0, t = 2.0;
  const WaveFunction psi = sample(g, [&](double x) { return gaussian(x, 0.0, s, 1.0); });
  Splitting h;
  h.momentum = [](double k, double) { return Eigen::Matrix2cd(Eigen::Matrix2cd::Identity() * (k * k / 2)); };
  h.mixed = [](double, double) { return Eigen::Matrix2cd(Eigen::Matrix2cd::Zero()); };
  h.max_speed = 5.0;
  const WaveFunction out = split_step_evolve(psi, h, t, 0.01);
  const Moments q = position_moments(out);
  CHECK(q.mean == doctest::Approx(t).epsilon(1e-9));
  CHECK(q.variance == doctest::Approx(s * s / 2 * (1 + t * t / std::pow(s, 4))).epsilon(1e-9));
  CHECK(out.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("default time step honours the cap") {
  const GridSpec g{256, -8, 8};
  const WaveFunction psi(g, 2);
  Splitting h;
  h.max_speed = 2.0;
  CHECK(default_time_step(psi, h) == doctest::Approx(g.dx() / 8));
  CHECK(default_time_step(psi, h, 1e-3) == doctest::Approx(1e-3));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  CHECK(integrate([](double x) { return std::pow(x, 7) - 3 * x * x; }, -1.0, 2.0, 1, 8) ==
        doctest::Approx(std::pow(2.0, 8) / 8 - 1.0 / 8 - (8.0 + 1.0)).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("bump function") {
  const Bump b(-1.0, 3.0, 2.0);
  CHECK(b(1.0) == doctest::Approx(2.0));
  CHECK(b(-1.0) == 0.0);
  CHECK(b(3.5) == 0.0);
  CHECK(b.antiderivative(3.0) == doctest::Approx(b.integral()).epsilon(1e-13));
  CHECK(b.antiderivative(1.0) == doctest::Approx(b.integral() / 2).epsilon(1e-12));
  CHECK(b.with_integral(0.7).integral() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(b.normalized().integral_of_square() == doctest::Approx(1.0).epsilon(1e-12));
  const double h = 1e-5;
  CHECK(b.derivative(0.3) == doctest::Approx((b(0.3 + h) - b(0.3 - h)) / (2 * h)).epsilon(1e-7));
  const Bump r = b.rescaled(2.0, 2.0);
  CHECK(r.lo() == doctest::Approx(-0.5));
  CHECK(r.hi() == doctest::Approx(1.5));
  CHECK(r.integral() == doctest::Approx(b.integral()).epsilon(1e-12));
  CHECK_THROWS(Bump(1.0, 1.0, 1.0));
}
