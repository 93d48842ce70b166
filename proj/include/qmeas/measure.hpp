#pragma once

// Measurement protocol on a model: outcome statistics, worst-case error, disturbance of conjugate
// states and the overlap function p(t).
//
// Everything is assembled from the evolved basis Psi_a = e^{-iH tau}(|a> (x) phi): the restricted
// system state of rho is sum_ab rho_ab R_ab with (R_ab)_cd = <Psi_b^d|Psi_a^c>, and the effective
// system POVM of outcome n has entries <Psi_b|E_n Psi_a>.

#include <vector>

#include "qmeas/models.hpp"

namespace qmeas {

/// The evolved basis of a model at t0 + tau, with its reduced-state and effective-POVM maps.
class EvolvedBasis {
 public:
  EvolvedBasis(const MeasurementModel& m, double tau);

  int dim() const { return static_cast<int>(psi_.size()); }
  double tau() const { return tau_; }
  const JointState& psi(int a) const { return psi_.at(static_cast<std::size_t>(a)); }

  /// Reduced system state of e^{-iH tau}(rho (x) sigma) e^{iH tau}.
  Eigen::MatrixXcd restricted(const Eigen::MatrixXcd& rho) const;
  /// Effective POVM element on the system for meter outcome n.
  const Eigen::MatrixXcd& effective_povm(int n) const { return povm_.at(static_cast<std::size_t>(n)); }
  int outcome_count() const { return static_cast<int>(povm_.size()); }

 private:
  std::vector<JointState> psi_;
  double tau_;
  std::vector<Eigen::MatrixXcd> overlap_;  // overlap_[a*d+b](c,d) = <Psi_b^d|Psi_a^c>
  std::vector<Eigen::MatrixXcd> povm_;
};

/// Born probabilities of the meter after time tau, normalized by their sum.
std::vector<double> outcome_probabilities(const EvolvedBasis& e, const Eigen::MatrixXcd& rho);
std::vector<double> outcome_probabilities(const MeasurementModel& m, const Eigen::MatrixXcd& rho, double tau);

struct WorstCaseError {
  double value = 0.0;  // sup_n sup_{rho in range P_n} (1 - P(n|rho))
  int outcome = 0;     // outcome attaining it
  bool exact = true;   // computed as a generalized eigenvalue on each range, not sampled
};

WorstCaseError worst_case_error(const EvolvedBasis& e, const std::vector<Eigen::MatrixXcd>& pvm);
WorstCaseError worst_case_error(const MeasurementModel& m, double tau);

struct Disturbance {
  double f_plus = 0.0;   // F(rho_+(tau), |+'><+'|)
  double f_minus = 0.0;  // F(rho_-(tau), |-'><-'|)
  double f_pm = 0.0;     // F(rho_+(tau), rho_-(tau))
  Eigen::MatrixXcd rho_plus, rho_minus;
};

/// Conjugate pair |+-> = (|j> +- |k>)/sqrt2, compared with its H_S-evolved copies.
Disturbance disturbance_profile(const EvolvedBasis& e, const Eigen::MatrixXcd& h_s, int j = 0, int k = 1);
Disturbance disturbance_profile(const MeasurementModel& m, double tau, int j = 0, int k = 1);

struct ConjugateFamily {
  int n = 0;
  std::vector<double> fidelities;        // F(rho_k(tau), |k~'><k~'|)
  double min_fidelity = 0.0;
  double max_pairwise_distance = 0.0;    // max trace distance between restricted states
};

/// |k~> = N^{-1/2} sum_n e^{2 pi i k n / N} |n>, n < N <= system dimension.
ConjugateFamily conjugate_family(const EvolvedBasis& e, const Eigen::MatrixXcd& h_s, int n);

struct PCurve {
  std::vector<double> times;  // offsets from t0
  std::vector<double> p;
};

/// p(t) = |<Phi0(t)|Phi(t)>|^2 for the joint state |psi_in> (x) phi at `samples` times in [0, tau_max].
PCurve p_curve(const MeasurementModel& m, const Eigen::VectorXcd& psi_in, double tau_max, int samples);

struct MeasurementRun {
  std::string model;
  double tau = 0.0;
  std::vector<std::vector<double>> probabilities;  // row a: P(n | |a><a|)
  WorstCaseError error;
  bool has_meter = false;
  Disturbance disturbance;
  PCurve p;
};

struct RunOptions {
  int p_samples = 33;
  double p_horizon = 0.0;  // default tau
  bool with_p_curve = true;
};

/// Probabilities for the basis inputs, P_error, disturbance and p(t) for the |+> input.
MeasurementRun run_protocol(const MeasurementModel& m, double tau, const RunOptions& opt = {});

}  // namespace qmeas
