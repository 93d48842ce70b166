#pragma once

// Checkers for the switching-device conditions and the finite-dimensional no-go probe.
//
// Every "for all rho" is reduced to the Hermitian operator basis by linearity. Commutator norms on
// grids are computed from Gram matrices of the few vectors spanning the relevant operators, so no
// grid-sized matrix is ever formed.

#include <cstdint>
#include <string>
#include <vector>

#include "qmeas/models.hpp"

namespace qmeas {

/// max over basis rho of ||[V, rho (x) sigma(t)]|| at a single time (free apparatus state).
double free_commutator_norm(const MeasurementModel& m, double t);
/// max over basis rho of ||[V, e^{-iH(t-t0)} (rho (x) sigma(t0)) e^{iH(t-t0)}]||.
double evolved_commutator_norm(const MeasurementModel& m, double t);

/// Evenly spaced times over [a, b] (samples >= 2).
std::vector<double> sample_times(double a, double b, int samples);

/// Max of free_commutator_norm over `samples` times in [t0 - window, t0].
double condition1_residual(const MeasurementModel& m, double window, int samples);

/// Max of evolved_commutator_norm over `samples` times in (t0, t0 + horizon].
double condition2_strength(const MeasurementModel& m, double horizon, int samples);

struct Condition3Result {
  bool holds = false;
  double residual = 0.0;
};

inline constexpr double kCondition3Tolerance = 1e-8;

/// Strong (state-independent) switching-off check over t in [t1, t1 + horizon].
Condition3Result condition3_check(const MeasurementModel& m, double t1, double horizon, int samples);

// ---------------------------------------------------------------------------------------------
// No-go probe

inline constexpr double kResidualCertified = 1e-10;
inline constexpr double kStrengthNonzero = 1e-8;

struct ProbeRecord {
  int trial = 0;
  std::string source;         // "random" or "chiral-64"
  bool stationary = false;    // apparatus prepared in an eigenstate of H_A
  int null_dimension = 0;     // dimension of the sampled commutant
  double residual = 0.0;      // Condition-1 residual on a denser sampling of the window
  double strength = 0.0;      // Condition-2 strength of the chosen V
  bool certified = false;     // sampled window provably implies Condition 1 for all t
  std::string verdict;        // consistent | condition1-violated | window-limited | counterexample
};

struct ProbeOptions {
  int d_s = 2;
  int d_a = 2;
  int trials = 100;
  std::uint64_t seed = 1;
  double window = 1.0;   // past window length
  int samples = 16;      // constraint times in the window
  double horizon = 2.0;  // Condition-2 horizon
  unsigned workers = 0;
};

struct ProbeReport {
  ProbeOptions options;
  std::vector<ProbeRecord> records;
  ProbeRecord chiral_row;
  int counterexamples = 0;
};

/// Verdict from the residual/strength pair and whether the window is certified.
std::string probe_verdict(double residual, double strength, bool certified);

/// Whether `samples` equally spaced times over `window` determine a trigonometric polynomial with
/// the Bohr frequencies of `energies` (count and aliasing test).
bool window_certificate(const Eigen::VectorXd& energies, double window, int samples);

/// Interactions V on C^{d_S} (x) C^{d_A} with [V, rho (x) sigma(t_j)] = 0 for every rho and sample
/// time: an orthonormal (Hilbert-Schmidt) basis of the null space.
std::vector<Eigen::MatrixXcd> sampled_commutant(const std::vector<Eigen::MatrixXcd>& apparatus_states, int d_s);

ProbeRecord probe_trial(const ProbeOptions& opt, int trial);
/// The chiral device truncated to a 64-point grid on [-8, 8] over a short past window.
ProbeRecord chiral_window_row();
ProbeReport nogo_probe(const ProbeOptions& opt);

}  // namespace qmeas
