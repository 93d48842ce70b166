#include "qmeas/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmeas/metrics.hpp"

namespace qmeas {

namespace {

JointState combine(const std::vector<JointState>& basis, const Eigen::VectorXcd& c) {
  JointState out = basis.front();
  for (auto& leg : out.legs) leg.setZero();
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t l = 0; l < out.legs.size(); ++l) out.legs[l] += c(static_cast<Eigen::Index>(a)) * basis[a].legs[l];
  return out;
}

Eigen::MatrixXcd projector(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

}  // namespace

EvolvedBasis::EvolvedBasis(const MeasurementModel& m, double tau) : tau_(tau) {
  if (!(tau >= 0.0)) throw ArgumentError("tau must be nonnegative");
  const int d = m.system_dim();
  for (int a = 0; a < d; ++a) psi_.push_back(m.evolve_basis(a, m.t0() + tau));
  const double cell = psi_.front().cell;

  overlap_.resize(static_cast<std::size_t>(d * d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Eigen::MatrixXcd r(d, d);
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) r(c, e) = psi(b).legs[static_cast<std::size_t>(e)].dot(psi(a).legs[static_cast<std::size_t>(c)]) * cell;
      overlap_[static_cast<std::size_t>(a * d + b)] = r;
    }

  for (int n = 0; n < m.outcome_count(); ++n) {
    std::vector<JointState> metered = psi_;
    for (auto& s : metered)
      for (auto& leg : s.legs) leg = m.apply_meter(n, leg);
    Eigen::MatrixXcd e(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) e(b, a) = psi(b).inner(metered[static_cast<std::size_t>(a)]);
    povm_.push_back(0.5 * (e + e.adjoint()));
  }
}

Eigen::MatrixXcd EvolvedBasis::restricted(const Eigen::MatrixXcd& rho) const {
  const int d = dim();
  if (rho.rows() != d || rho.cols() != d) throw ArgumentError("system state has the wrong dimension");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out += rho(a, b) * overlap_[static_cast<std::size_t>(a * d + b)];
  return 0.5 * (out + out.adjoint());
}

std::vector<double> outcome_probabilities(const EvolvedBasis& e, const Eigen::MatrixXcd& rho) {
  if (e.outcome_count() == 0) throw ProtocolError("model has no meter");
  if (rho.rows() != e.dim() || rho.cols() != e.dim()) throw ArgumentError("system state has the wrong dimension");
  std::vector<double> p;
  double total = 0.0;
  for (int n = 0; n < e.outcome_count(); ++n) {
    p.push_back(std::max(0.0, (rho * e.effective_povm(n)).trace().real()));
    total += p.back();
  }
  if (!(total > 0.0)) throw NumericalError("meter probabilities vanish");
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> outcome_probabilities(const MeasurementModel& m, const Eigen::MatrixXcd& rho, double tau) {
  if (m.outcome_count() == 0) throw ProtocolError("model " + m.id() + " has no meter");
  if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
  return outcome_probabilities(EvolvedBasis(m, tau), rho);
}

WorstCaseError worst_case_error(const EvolvedBasis& e, const std::vector<Eigen::MatrixXcd>& pvm) {
  if (e.outcome_count() == 0) throw ProtocolError("model has no meter");
  if (pvm.size() != static_cast<std::size_t>(e.outcome_count()))
    throw ProtocolError("meter and PVM have different outcome counts");
  const int d = e.dim();
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 0; n < e.outcome_count(); ++n) total += e.effective_povm(n);

  WorstCaseError out;
  for (int n = 0; n < e.outcome_count(); ++n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ps(pvm[static_cast<std::size_t>(n)]);
    std::vector<Eigen::Index> range;
    for (Eigen::Index k = 0; k < d; ++k)
      if (ps.eigenvalues()(k) > 0.5) range.push_back(k);
    if (range.empty()) continue;
    Eigen::MatrixXcd q(d, static_cast<Eigen::Index>(range.size()));
    for (std::size_t i = 0; i < range.size(); ++i) q.col(static_cast<Eigen::Index>(i)) = ps.eigenvectors().col(range[i]);
    // min over range states of tr[rho E_n] / tr[rho sum_m E_m]: the smallest generalized eigenvalue.
    const Eigen::MatrixXcd a = q.adjoint() * e.effective_povm(n) * q;
    const Eigen::MatrixXcd b = q.adjoint() * total * q;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ge(0.5 * (a + a.adjoint()), 0.5 * (b + b.adjoint()),
                                                                    Eigen::EigenvaluesOnly);
    const double err = std::clamp(1.0 - ge.eigenvalues().minCoeff(), 0.0, 1.0);
    if (err > out.value) {
      out.value = err;
      out.outcome = n;
    }
  }
  return out;
}

WorstCaseError worst_case_error(const MeasurementModel& m, double tau) {
  if (m.outcome_count() == 0) throw ProtocolError("model " + m.id() + " has no meter");
  return worst_case_error(EvolvedBasis(m, tau), m.pvm());
}

Disturbance disturbance_profile(const EvolvedBasis& e, const Eigen::MatrixXcd& h_s, int j, int k) {
  const int d = e.dim();
  if (j == k || j < 0 || k < 0 || j >= d || k >= d) throw ArgumentError("conjugate pair indices out of range");
  const Eigen::MatrixXcd u = spectral_decomposition(h_s).propagator(e.tau());
  Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(d), minus = Eigen::VectorXcd::Zero(d);
  plus(j) = minus(j) = 1.0 / std::numbers::sqrt2;
  plus(k) = 1.0 / std::numbers::sqrt2;
  minus(k) = -1.0 / std::numbers::sqrt2;
  Disturbance out;
  out.rho_plus = e.restricted(projector(plus));
  out.rho_minus = e.restricted(projector(minus));
  out.f_plus = fidelity(out.rho_plus, projector(u * plus));
  out.f_minus = fidelity(out.rho_minus, projector(u * minus));
  out.f_pm = fidelity(out.rho_plus, out.rho_minus);
  return out;
}

Disturbance disturbance_profile(const MeasurementModel& m, double tau, int j, int k) {
  return disturbance_profile(EvolvedBasis(m, tau), m.system_hamiltonian(), j, k);
}

ConjugateFamily conjugate_family(const EvolvedBasis& e, const Eigen::MatrixXcd& h_s, int n) {
  if (n < 2 || n > e.dim()) throw ArgumentError("family size must lie in [2, system dimension]");
  const Eigen::MatrixXcd u = spectral_decomposition(h_s).propagator(e.tau());
  ConjugateFamily out;
  out.n = n;
  std::vector<Eigen::MatrixXcd> states;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(e.dim());
    for (int j = 0; j < n; ++j) v(j) = std::exp(kI * (2.0 * std::numbers::pi * k * j / n)) / std::sqrt(double(n));
    states.push_back(e.restricted(projector(v)));
    out.fidelities.push_back(fidelity(states.back(), projector(u * v)));
  }
  out.min_fidelity = *std::min_element(out.fidelities.begin(), out.fidelities.end());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      out.max_pairwise_distance = std::max(out.max_pairwise_distance,
                                           trace_distance_paper(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)]));
  return out;
}

PCurve p_curve(const MeasurementModel& m, const Eigen::VectorXcd& psi_in, double tau_max, int samples) {
  const int d = m.system_dim();
  if (psi_in.size() != d) throw ArgumentError("input state has the wrong dimension");
  if (std::abs(psi_in.norm() - 1.0) > 1e-10) throw ValidationError("input state is not normalized");
  if (samples < 2 || !(tau_max > 0.0)) throw ArgumentError("p(t) needs samples >= 2 and tau_max > 0");
  PCurve out;
  for (int i = 0; i < samples; ++i) {
    const double t = tau_max * i / (samples - 1);
    std::vector<JointState> full, free;
    for (int a = 0; a < d; ++a) {
      if (psi_in(a) == cplx(0.0)) {
        full.push_back(JointState::product(d, a, m.apparatus_free(m.t0()) * 0.0, m.apparatus_cell()));
        free.push_back(full.back());
        continue;
      }
      full.push_back(m.evolve_basis(a, m.t0() + t));
      free.push_back(m.evolve_free_basis(a, m.t0() + t));
    }
    const JointState phi = combine(full, psi_in), phi0 = combine(free, psi_in);
    out.times.push_back(t);
    out.p.push_back(std::clamp(std::norm(phi0.inner(phi)), 0.0, 1.0));
  }
  return out;
}

MeasurementRun run_protocol(const MeasurementModel& m, double tau, const RunOptions& opt) {
  MeasurementRun run;
  run.model = m.id();
  run.tau = tau;
  const EvolvedBasis e(m, tau);
  const int d = m.system_dim();
  run.has_meter = m.outcome_count() > 0;
  if (run.has_meter) {
    for (int a = 0; a < d; ++a) {
      Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
      rho(a, a) = 1.0;
      run.probabilities.push_back(outcome_probabilities(e, rho));
    }
    if (!m.pvm().empty()) run.error = worst_case_error(e, m.pvm());
  }
  if (d >= 2) run.disturbance = disturbance_profile(e, m.system_hamiltonian());
  if (opt.with_p_curve) {
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(d);
    plus(0) = plus(std::min(1, d - 1)) = 1.0;
    plus.normalize();
    run.p = p_curve(m, plus, opt.p_horizon > 0.0 ? opt.p_horizon : tau, opt.p_samples);
  }
  return run;
}

}  // namespace qmeas
