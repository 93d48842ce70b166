#pragma once

// Measurement and timing-device models on qubit (x) apparatus spaces.
//
// Spin convention: sigma_z = |1><1| - |0><0|, so the branch paired with |0> carries sign -1
// and the branch paired with |1> carries +1.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/grids.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/qcore.hpp"
#include "qmeas/quadrature.hpp"

namespace qmeas {

/// Joint vector on system (x) apparatus written as sum_c |c> (x) legs[c]. `cell` is the inner-product
/// weight of the apparatus representation (1 for finite models, dx or dx*dz on grids).
struct JointState {
  std::vector<Eigen::VectorXcd> legs;
  double cell = 1.0;

  /// |c> (x) phi with every other leg zero.
  static JointState product(int dim, int c, const Eigen::VectorXcd& phi, double cell);
  cplx inner(const JointState& other) const;  // <this|other>
  double norm_squared() const { return inner(*this).real(); }
};

/// Sign of the paper's sigma_z on basis state c.
inline double spin_sign(int c) { return c == 0 ? -1.0 : 1.0; }

/// Common interface for every model the library can run. Time arguments are absolute; all builtin
/// models switch on at t0 = 0.
class MeasurementModel {
 public:
  virtual ~MeasurementModel() = default;

  virtual std::string id() const = 0;
  virtual int system_dim() const = 0;
  virtual double tau() const = 0;
  virtual double t0() const { return 0.0; }
  virtual Eigen::MatrixXcd system_hamiltonian() const;

  /// e^{-iH(t - t0)} (|a> (x) phi(t0)), phi the (purified) apparatus state.
  virtual JointState evolve_basis(int a, double t) const = 0;
  /// Same under H_S + H_A only.
  virtual JointState evolve_free_basis(int a, double t) const;
  /// Apparatus vector sigma(t) = e^{-iH_A(t - t0)} phi(t0), any t.
  virtual Eigen::VectorXcd apparatus_free(double t) const = 0;
  virtual double apparatus_cell() const { return 1.0; }

  /// V applied to a joint vector.
  virtual JointState apply_interaction(const JointState& s) const = 0;
  /// +inf when V is unbounded.
  virtual double interaction_norm() const = 0;

  /// Meter outcomes (0 when the model carries no meter). Outcome n is read as PVM element n.
  virtual int outcome_count() const { return 0; }
  virtual Eigen::VectorXcd apply_meter(int n, const Eigen::VectorXcd& apparatus) const;
  /// Projectors of the measured sharp observable, one per outcome.
  virtual std::vector<Eigen::MatrixXcd> pvm() const { return {}; }

  virtual double apparatus_energy_fluctuation() const = 0;
  /// Spectral histogram of H_A in phi(t0), when available (grid models).
  virtual std::optional<SpectralHistogram> apparatus_spectrum() const { return std::nullopt; }

  /// Whether the model is built to satisfy the no-interaction condition up to t0 exactly.
  virtual bool switching_device() const { return false; }
  /// Exact certificate of the no-interaction condition from declared supports, if the model has one.
  virtual std::optional<bool> condition1_by_support() const { return std::nullopt; }

  /// Discrepancies and interpretation choices worth carrying into reports.
  virtual std::vector<std::string> notes() const { return {}; }

  /// Throws ValidationError on any broken invariant.
  virtual void validate() const = 0;
};

// ---------------------------------------------------------------------------------------------
// Finite-dimensional models

/// Dense model H = H_S (x) 1 + 1 (x) H_A + V with apparatus state sigma0 (pure or mixed).
class FiniteModel : public MeasurementModel {
 public:
  struct Parts {
    std::string id = "finite";
    Eigen::MatrixXcd h_s, h_a, v;
    QuantumState sigma0 = QuantumState::pure(Eigen::VectorXcd::Ones(1));
    std::vector<Eigen::MatrixXcd> pvm;    // on the system
    std::vector<Eigen::MatrixXcd> meter;  // on the apparatus
    double tau = 1.0;
    bool switching = false;
  };

  explicit FiniteModel(Parts parts);

  std::string id() const override { return p_.id; }
  int system_dim() const override { return static_cast<int>(p_.h_s.rows()); }
  int apparatus_dim() const { return static_cast<int>(p_.h_a.rows()); }
  /// Apparatus dimension times purification rank.
  int extended_dim() const { return apparatus_dim() * aux_; }
  double tau() const override { return p_.tau; }
  Eigen::MatrixXcd system_hamiltonian() const override { return p_.h_s; }

  const Eigen::MatrixXcd& h_a() const { return p_.h_a; }
  const Eigen::MatrixXcd& v() const { return p_.v; }
  const QuantumState& sigma0() const { return p_.sigma0; }
  const Eigen::MatrixXcd& total_hamiltonian() const { return h_; }
  const Eigen::MatrixXcd& free_hamiltonian() const { return h0_; }
  const std::vector<Eigen::MatrixXcd>& meter() const { return p_.meter; }

  /// sigma(t) as a density matrix.
  Eigen::MatrixXcd apparatus_density(double t) const;
  /// e^{-iH(t - t0)} (rho (x) sigma0) e^{iH(t - t0)}.
  Eigen::MatrixXcd evolve_joint(const Eigen::MatrixXcd& rho, double t) const;

  JointState evolve_basis(int a, double t) const override;
  JointState evolve_free_basis(int a, double t) const override;
  Eigen::VectorXcd apparatus_free(double t) const override;
  JointState apply_interaction(const JointState& s) const override;
  double interaction_norm() const override { return operator_norm(p_.v); }
  int outcome_count() const override { return static_cast<int>(p_.meter.size()); }
  Eigen::VectorXcd apply_meter(int n, const Eigen::VectorXcd& apparatus) const override;
  std::vector<Eigen::MatrixXcd> pvm() const override { return p_.pvm; }
  double apparatus_energy_fluctuation() const override;
  bool switching_device() const override { return p_.switching; }
  void validate() const override;

 private:
  JointState evolve_with(const SpectralDecomposition& sd, int a, double t) const;

  Parts p_;
  int aux_ = 1;
  Eigen::MatrixXcd phi_;  // purified apparatus state, d_A x aux
  Eigen::MatrixXcd h_, h0_;
  SpectralDecomposition sd_, sd0_, sd_a_;
};

/// Random H_S, H_A, V (||V|| = 1) and pure sigma0; no meter. d_S * d_A <= 64.
FiniteModel random_finite_model(int d_s, int d_a, std::uint64_t seed);

/// V = 0 qubit-qubit model read out by the coin-flip meter {I/2, I/2}.
FiniteModel free_coin_model(double tau = 1.0);

/// Conditional flip V = lambda |1><1| (x) sigma_x on a qubit pointer started in |0>, read out in the
/// pointer's computational basis.
FiniteModel cnot_model(double lambda, double tau);

/// Projectors |n><n|, n < d.
std::vector<Eigen::MatrixXcd> computational_pvm(int d);

// ---------------------------------------------------------------------------------------------
// Grid models

/// Shared machinery for qubit (x) L^2 models. Subclasses supply the exact rule, splitting,
/// interaction and meter.
class GridModel : public MeasurementModel {
 public:
  int system_dim() const override { return 2; }
  double apparatus_cell() const override { return prototype_.cell(); }

  /// Exact rule for branch a at absolute time t, as a single-leg wave function.
  virtual WaveFunction exact_branch(int a, double t) const = 0;
  /// e^{-iH(t - t0)} (|a> (x) phi(t0)) as a two-leg wave function. Defaults to the exact rule.
  virtual WaveFunction evolve_wave(int a, double t) const;
  /// H_A-only evolution of phi(t0) to time t.
  virtual WaveFunction free_branch(double t) const = 0;
  virtual Splitting splitting() const = 0;

  /// Two-leg wave function |a> (x) phi(t0) on the model grid.
  WaveFunction initial_joint(int a) const;
  /// Split-step propagation of |a> (x) phi(t0) to time t.
  WaveFunction split_step_branch(int a, double t, double dt = 0.0) const;
  /// Default split-step time step.
  double time_step() const;
  /// Upper bound on the default time step (<= 0 removes it).
  void set_time_step_cap(double cap) { dt_cap_ = cap; }

  /// Largest absolute time for which the grid is declared to hold every branch.
  double horizon() const { return horizon_; }
  const WaveFunction& prototype() const { return prototype_; }

  JointState evolve_basis(int a, double t) const override;
  Eigen::VectorXcd apparatus_free(double t) const override { return free_branch(t).leg(0); }
  double apparatus_energy_fluctuation() const override;
  std::optional<SpectralHistogram> apparatus_spectrum() const override;

  static JointState to_joint(const WaveFunction& psi);
  WaveFunction from_joint(const JointState& s) const;

 protected:
  explicit GridModel(WaveFunction prototype, double horizon) : prototype_(std::move(prototype)), horizon_(horizon) {}
  /// Two-leg wave function on the model grid, all zero.
  WaveFunction blank(int legs) const;
  /// Time-step cap used by split_step_branch when dt is not given.
  double dt_cap_ = 0.0;
  /// Sampled states are multiplied by this so that phi(t0) has unit norm on the grid.
  double amp_ = 1.0;
  /// The apparatus Hamiltonian is momentum-diagonal; its symbol along axis 0.
  virtual double apparatus_symbol(double k) const { return k; }

 private:
  WaveFunction prototype_;  // single leg, zero, carries the grids
  double horizon_;
};

/// Von Neumann pointer: H = sigma_z (x) p, H_S = H_A = 0, compact pointer packet of half-width w at 0.
class StandardModel : public GridModel {
 public:
  StandardModel(double pointer_width, double tau, GridSpec grid);
  static GridSpec default_grid(double pointer_width, double tau, int n = 1024);

  std::string id() const override { return "standard"; }
  double tau() const override { return tau_; }
  double pointer_width() const { return packet_.width() / 2; }

  WaveFunction exact_branch(int a, double t) const override;
  WaveFunction free_branch(double t) const override;
  Splitting splitting() const override;
  JointState apply_interaction(const JointState& s) const override;
  double interaction_norm() const override { return std::numeric_limits<double>::infinity(); }
  int outcome_count() const override { return 2; }
  Eigen::VectorXcd apply_meter(int n, const Eigen::VectorXcd& apparatus) const override;
  std::vector<Eigen::MatrixXcd> pvm() const override { return computational_pvm(2); }
  double apparatus_energy_fluctuation() const override { return 0.0; }
  std::optional<SpectralHistogram> apparatus_spectrum() const override { return std::nullopt; }
  std::vector<std::string> notes() const override;
  void validate() const override;

 private:
  Bump packet_;
  double tau_;
};

/// Chiral timing device: H = p + sigma_z (x) g(q), g on (0, Delta), packet on (-delta, 0),
/// tau = Delta + delta. Not a measurement: branches differ by a phase only. Its meter reads the
/// sign of q - c, c the free packet centre at tau.
class ChiralModel : public GridModel {
 public:
  struct Params {
    double delta_g = 1.0;     // support of g is (0, delta_g)
    double delta_phi = 1.0;   // support of the packet is (-delta_phi, 0)
    double phase = 1.0;       // integral of g
    int n = 1024;
    double t_max = 0.0;       // grid must hold the packet up to this time (default 2 tau)
  };

  explicit ChiralModel(Params p);
  ChiralModel(Bump g, Bump packet, GridSpec grid, double t_max);

  std::string id() const override { return "chiral"; }
  double tau() const override { return g_.hi() - packet_.lo(); }
  const Bump& g() const { return g_; }
  const Bump& packet() const { return packet_; }

  /// Phase exponent of branch a: -s_a * int_{x-t}^{x} g.
  double branch_phase(int a, double x, double t) const;

  WaveFunction exact_branch(int a, double t) const override;
  WaveFunction free_branch(double t) const override;
  Splitting splitting() const override;
  JointState apply_interaction(const JointState& s) const override;
  double interaction_norm() const override { return g_.height(); }
  int outcome_count() const override { return 2; }
  Eigen::VectorXcd apply_meter(int n, const Eigen::VectorXcd& apparatus) const override;
  std::vector<Eigen::MatrixXcd> pvm() const override { return computational_pvm(2); }
  bool switching_device() const override { return true; }
  std::optional<bool> condition1_by_support() const override;
  std::vector<std::string> notes() const override;
  void validate() const override;

 private:
  Bump g_, packet_;
};

struct GaussianPacketParams {
  double m = 1.0;
  double k = 4.0;
  double sigma = 1.0;
  double delta = 0.5;  // offset Delta
  double lead = 1.0;   // lead time T
  double hbar = 1.0;

  double group_velocity() const { return hbar * k / m; }
  double x0() const { return -group_velocity() * (lead + delta); }
  void validate() const;
};

/// Free particle H_A = p^2/2m prepared as a Gaussian at -T, coupled by B (x) V(q) with supp V in
/// (0, inf). Exposes the closed-form packet observables.
class GaussianModel : public GridModel {
 public:
  GaussianModel(GaussianPacketParams p, Eigen::Matrix2cd b, Bump v_profile, int n = 0);
  static GridSpec default_grid(const GaussianPacketParams& p, double extra_time, int n = 0);

  std::string id() const override { return "gaussian"; }
  double tau() const override { return p_.lead; }
  const GaussianPacketParams& params() const { return p_; }

  /// phi(s - T) on the grid, by exact free evolution in k space. s is time since preparation.
  WaveFunction packet(double s) const;
  /// Closed-form mean x0 + v_g s.
  double mean_position(double s) const;
  /// Closed-form sigma (1 + hbar^2 s^2 / (sigma^4 m^2))^{1/2}; the standard deviation is this over sqrt 2.
  double spread(double s) const;
  /// ||P_>= phi(t - T)||^2 on the grid.
  double leakage(double t) const;
  /// sigma^2 (1 + hbar^2 t^2/(sigma^4 m^2)) / (v_g Delta)^2.
  double chebyshev_bound(double t) const;

  /// Throws UnsupportedModelError: the coupled packet has no closed form.
  WaveFunction exact_branch(int a, double t) const override;
  /// Split-step propagation.
  WaveFunction evolve_wave(int a, double t) const override;
  WaveFunction free_branch(double t) const override { return packet(p_.lead + t); }
  Splitting splitting() const override;
  JointState apply_interaction(const JointState& s) const override;
  double interaction_norm() const override;
  std::optional<SpectralHistogram> apparatus_spectrum() const override { return std::nullopt; }
  void validate() const override;

 protected:
  double apparatus_symbol(double k) const override { return p_.hbar * k * k / (2.0 * p_.m); }

 private:
  GaussianPacketParams p_;
  Eigen::Matrix2cd b_;
  Bump v_;
  WaveFunction initial_;  // phi(-T) sampled
};

/// Two-dimensional Stern-Gerlach toy model: H = p_x + sigma_z g(q_x) p_z, initial xi(x) eta(z),
/// supp g in (0, delta), supp xi in (-Delta, 0), eta even on (-eps, eps); tau = delta + Delta.
/// Meter: sign of q_z. Rescaling by C maps xi -> sqrt(C) xi(C x), g -> C g(C x) and the x grid to x/C.
class SternGerlach2D : public GridModel {
 public:
  struct Params {
    double delta = 1.0;      // g on (0, delta)
    double Delta = 1.0;      // xi on (-Delta, 0)
    double eps = 0.25;       // eta on (-eps, eps)
    double safety = 4.0;     // integral of g = safety * eps
    double g_integral = 0.0; // overrides safety * eps when positive
    double scale = 1.0;      // C
    int nx = 256;
    int nz = 256;
    double t_max = 0.0;      // default 2 tau
  };

  explicit SternGerlach2D(Params p);

  std::string id() const override { return "stern_gerlach"; }
  double tau() const override { return g_.hi() - xi_.lo(); }
  const Params& params() const { return p_; }
  const Bump& g() const { return g_; }
  const Bump& xi() const { return xi_; }
  const Bump& eta() const { return eta_; }

  /// z displacement of the |1> branch at (x, t): int_{x-t}^{x} g.
  double displacement(double x, double t) const;

  WaveFunction exact_branch(int a, double t) const override;
  WaveFunction free_branch(double t) const override;
  Splitting splitting() const override;
  JointState apply_interaction(const JointState& s) const override;
  double interaction_norm() const override { return std::numeric_limits<double>::infinity(); }
  int outcome_count() const override { return 2; }
  Eigen::VectorXcd apply_meter(int n, const Eigen::VectorXcd& apparatus) const override;
  std::vector<Eigen::MatrixXcd> pvm() const override { return computational_pvm(2); }
  bool switching_device() const override { return true; }
  std::optional<bool> condition1_by_support() const override;
  /// (int |xi'|^2)^{1/2} by quadrature of the analytic derivative, for cross-checks.
  double energy_fluctuation_quadrature() const;
  std::vector<std::string> notes() const override;
  void validate() const override;

 private:
  Params p_;
  Bump g_, xi_, eta_;
};

}  // namespace qmeas
