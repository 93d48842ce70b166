#pragma once

// Distances between states, energy fluctuations and speed-limit quantities.

#include <vector>

#include "qmeas/qcore.hpp"

namespace qmeas {

/// Uhlmann fidelity tr sqrt(sqrt(rho0) rho1 sqrt(rho0)), evaluated as the trace norm of
/// sqrt(rho0) sqrt(rho1).
double fidelity(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1);
double fidelity(const QuantumState& s0, const QuantumState& s1);

/// sup over unit-norm observables A of |tr[(rho0 - rho1) A]|, i.e. the trace norm of the
/// difference. There is no factor 1/2: orthogonal pure states are at distance 2.
double trace_distance_paper(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1);
double trace_distance_paper(const QuantumState& s0, const QuantumState& s1);

/// arccos of the fidelity, in [0, pi/2].
double bures_angle(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1);
double bures_angle(const QuantumState& s0, const QuantumState& s1);

/// sqrt(<H^2> - <H>^2), clamped at 0.
double energy_fluctuation(const Eigen::MatrixXcd& h, const QuantumState& s);

struct SpectralPoint {
  double energy;
  double weight;
};

/// Discrete spectral measure of a Hamiltonian in a state: weights >= 0 summing to 1.
class SpectralDistribution {
 public:
  /// Sorts by energy and validates normalization (1e-10).
  explicit SpectralDistribution(std::vector<SpectralPoint> points);

  const std::vector<SpectralPoint>& points() const { return points_; }

 private:
  std::vector<SpectralPoint> points_;
};

/// Histogram form for continuous spectra: bin i spans [edges[i], edges[i+1]).
struct SpectralHistogram {
  std::vector<double> edges;
  std::vector<double> weights;
};

/// Spectral distribution of H in s; eigenvalues closer than `merge_tol` are merged.
SpectralDistribution spectral_distribution(const Eigen::MatrixXcd& h, const QuantumState& s,
                                           double merge_tol = 1e-10);

/// Minimal length of a closed interval carrying weight >= alpha, endpoints at spectral points.
double overall_width(const SpectralDistribution& d, double alpha);
/// Same, endpoints restricted to histogram bin edges.
double overall_width(const SpectralHistogram& h, double alpha);

/// Mandelstam-Tamm lower bound cos(dH t) on the survival amplitude; 0 once dH t > pi/2.
double mt_overlap_bound(double delta_h, double t);

}  // namespace qmeas
