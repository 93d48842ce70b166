#pragma once

// Periodic one- and two-dimensional grids for qubit (x) L^2 apparatus models.

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

#include "qmeas/metrics.hpp"
#include "qmeas/qcore.hpp"

namespace qmeas {

/// Uniform periodic grid: n points (power of two, >= 16) on [x_min, x_max).
struct GridSpec {
  int n = 1024;
  double x_min = -1.0;
  double x_max = 1.0;

  void validate() const;
  double length() const { return x_max - x_min; }
  double dx() const { return length() / n; }
  double x(int j) const { return x_min + j * dx(); }
  Eigen::VectorXd coordinates() const;
  /// FFT-ordered wave numbers 2 pi m / L, m = 0..n/2-1, -n/2..-1.
  Eigen::VectorXd wavenumbers() const;
  /// Same grid with both ends divided by `scale`.
  GridSpec scaled(double scale) const { return {n, x_min / scale, x_max / scale}; }
};

/// Amplitudes on a 1D or 2D grid, one vector per internal leg (1 = scalar, 2 = qubit).
/// 2D data are stored x-major: flat index = ix * nz + iz.
class WaveFunction {
 public:
  explicit WaveFunction(GridSpec x, int legs = 1);
  WaveFunction(GridSpec x, GridSpec z, int legs = 1);

  int axes() const { return static_cast<int>(axes_.size()); }
  const GridSpec& axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
  int legs() const { return static_cast<int>(legs_.size()); }
  Eigen::Index points() const { return points_; }
  /// Quadrature weight of one grid cell (dx or dx*dz).
  double cell() const;

  Eigen::VectorXcd& leg(int a) { return legs_.at(static_cast<std::size_t>(a)); }
  const Eigen::VectorXcd& leg(int a) const { return legs_.at(static_cast<std::size_t>(a)); }

  /// Coordinate of a flat index along an axis.
  double coordinate(int axis, Eigen::Index flat) const;

  double norm_squared() const;
  /// <this|other>, summed over legs with cell weight.
  cplx inner(const WaveFunction& other) const;

  bool same_grid(const WaveFunction& other) const;

 private:
  std::vector<GridSpec> axes_;
  std::vector<Eigen::VectorXcd> legs_;
  Eigen::Index points_ = 0;
};

/// Samples f on a 1D grid into a single-leg wave function.
WaveFunction sample(const GridSpec& x, const std::function<cplx(double)>& f);
/// Samples f(x, z) on a 2D grid.
WaveFunction sample(const GridSpec& x, const GridSpec& z, const std::function<cplx(double, double)>& f);

/// In-place FFT of every leg along one axis (forward: position -> momentum, unnormalized
/// inverse convention handled internally so the pair is the identity).
void fft_axis(WaveFunction& psi, int axis, bool forward);

/// Spectrally exact periodic shift by `a` along `axis`: psi(x) -> psi(x - a).
WaveFunction translate(const WaveFunction& psi, double a, int axis = 0);

/// Sum of |psi|^2 * cell over grid points where the predicate holds (all legs).
double region_probability(const WaveFunction& psi, const std::function<bool(double)>& in_region);
double region_probability(const WaveFunction& psi, const std::function<bool(double, double)>& in_region);

/// Probability within `margin` of any boundary of any axis.
double boundary_mass(const WaveFunction& psi, double margin);

/// Throws NumericalError if boundary_mass exceeds `tolerance`.
void require_contained(const WaveFunction& psi, double margin, double tolerance = 1e-6);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double std_dev() const { return std::sqrt(std::max(0.0, variance)); }
};

Moments position_moments(const WaveFunction& psi, int axis = 0);
/// Spectral (FFT) moments of the wave number along an axis.
Moments momentum_moments(const WaveFunction& psi, int axis = 0);
/// Momentum distribution along an axis as a histogram with bin edges halfway between wave numbers.
SpectralHistogram momentum_histogram(const WaveFunction& psi, int axis = 0);

/// Hamiltonian split into a part diagonal in momentum and a part diagonal in x (and, for 2D
/// grids, in the z wave number). Each returns the 2x2 block acting on the internal leg; single-leg
/// wave functions use the (0,0) entry.
struct Splitting {
  std::function<Eigen::Matrix2cd(double kx, double kz)> momentum;
  std::function<Eigen::Matrix2cd(double x, double kz)> mixed;
  /// Largest group velocity, for the default time step.
  double max_speed = 1.0;
};

/// exp(-i M t) for a Hermitian 2x2 M in closed form.
Eigen::Matrix2cd expm_hermitian2(const Eigen::Matrix2cd& m, double t);

/// Strang splitting: half momentum step, full mixed step, half momentum step.
WaveFunction split_step_evolve(const WaveFunction& psi, const Splitting& h, double t_final, double dt);

/// dt = min(dx / (4 v_max), cap) over all axes; cap <= 0 means no cap.
double default_time_step(const WaveFunction& psi, const Splitting& h, double cap = 0.0);

/// CSV snapshot: 1D "x,re0,im0[,re1,im1]", 2D "x,z,...".
void write_csv(std::ostream& os, const WaveFunction& psi);

}  // namespace qmeas
