#include "qmeas/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qmeas/parallel.hpp"

namespace qmeas {

namespace {

double dense_commutator_norm(const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& op) {
  return operator_norm(Eigen::MatrixXcd(v * op - op * v));
}

// max over basis rho of ||[V, sum_ab rho_ab |phi_a><phi_b|]|| given the vectors phi_a.
double lowrank_commutator_norm(const MeasurementModel& m, const std::vector<JointState>& phi) {
  const int d = static_cast<int>(phi.size());
  std::vector<JointState> w = phi;
  for (const auto& p : phi) w.push_back(m.apply_interaction(p));
  Eigen::MatrixXcd gram(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i)
    for (int j = i; j < 2 * d; ++j) {
      gram(i, j) = w[static_cast<std::size_t>(i)].inner(w[static_cast<std::size_t>(j)]);
      gram(j, i) = std::conj(gram(i, j));
    }
  double worst = 0.0;
  for (const auto& rho : hermitian_basis(d)) {
    Eigen::MatrixXcd mm = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    mm.block(0, d, d, d) = -rho;
    mm.block(d, 0, d, d) = rho;
    worst = std::max(worst, lowrank_norm(gram, mm));
  }
  return worst;
}

}  // namespace

double free_commutator_norm(const MeasurementModel& m, double t) {
  if (const auto* fm = dynamic_cast<const FiniteModel*>(&m)) {
    const Eigen::MatrixXcd sigma = fm->apparatus_density(t);
    double worst = 0.0;
    for (const auto& rho : hermitian_basis(fm->system_dim()))
      worst = std::max(worst, dense_commutator_norm(fm->v(), tensor(rho, sigma)));
    return worst;
  }
  std::vector<JointState> phi;
  const Eigen::VectorXcd a = m.apparatus_free(t);
  for (int c = 0; c < m.system_dim(); ++c) phi.push_back(JointState::product(m.system_dim(), c, a, m.apparatus_cell()));
  return lowrank_commutator_norm(m, phi);
}

double evolved_commutator_norm(const MeasurementModel& m, double t) {
  if (const auto* fm = dynamic_cast<const FiniteModel*>(&m)) {
    double worst = 0.0;
    for (const auto& rho : hermitian_basis(fm->system_dim()))
      worst = std::max(worst, dense_commutator_norm(fm->v(), fm->evolve_joint(rho, t)));
    return worst;
  }
  std::vector<JointState> phi;
  for (int a = 0; a < m.system_dim(); ++a) phi.push_back(m.evolve_basis(a, t));
  return lowrank_commutator_norm(m, phi);
}

std::vector<double> sample_times(double a, double b, int samples) {
  if (samples < 2) throw ArgumentError("at least two sample times are required");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (samples - 1);
  return t;
}

double condition1_residual(const MeasurementModel& m, double window, int samples) {
  if (!(window >= 0.0)) throw ArgumentError("window length must be nonnegative");
  double worst = 0.0;
  for (double t : sample_times(m.t0() - window, m.t0(), samples)) worst = std::max(worst, free_commutator_norm(m, t));
  return worst;
}

double condition2_strength(const MeasurementModel& m, double horizon, int samples) {
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  if (samples < 1) throw ArgumentError("at least one sample time is required");
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i)
    worst = std::max(worst, evolved_commutator_norm(m, m.t0() + horizon * i / samples));
  return worst;
}

Condition3Result condition3_check(const MeasurementModel& m, double t1, double horizon, int samples) {
  if (!(t1 > m.t0())) throw ArgumentError("switching-off time must follow t0");
  if (!(horizon >= 0.0)) throw ArgumentError("horizon must be nonnegative");
  Condition3Result r;
  for (double t : sample_times(t1, t1 + horizon, samples)) r.residual = std::max(r.residual, evolved_commutator_norm(m, t));
  r.holds = r.residual <= kCondition3Tolerance;
  return r;
}

// ---------------------------------------------------------------------------------------------

std::string probe_verdict(double residual, double strength, bool certified) {
  if (residual > kResidualCertified) return "condition1-violated";
  if (strength <= kStrengthNonzero) return "consistent";
  return certified ? "counterexample" : "window-limited";
}

bool window_certificate(const Eigen::VectorXd& energies, double window, int samples) {
  if (samples < 2 || !(window > 0.0)) return false;
  std::vector<double> diffs;
  for (Eigen::Index i = 0; i < energies.size(); ++i)
    for (Eigen::Index j = 0; j < energies.size(); ++j) diffs.push_back(energies(i) - energies(j));
  std::sort(diffs.begin(), diffs.end());
  const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
  int distinct = 0;
  double last = -std::numeric_limits<double>::infinity();
  for (double w : diffs)
    if (w - last > 1e-9 * scale) {
      ++distinct;
      last = w;
    }
  const double spacing = window / (samples - 1);
  return samples >= distinct && spacing * (diffs.back() - diffs.front()) < 2.0 * std::numbers::pi;
}

std::vector<Eigen::MatrixXcd> sampled_commutant(const std::vector<Eigen::MatrixXcd>& apparatus_states, int d_s) {
  if (apparatus_states.empty()) throw ArgumentError("no sample states");
  const int d_a = static_cast<int>(apparatus_states.front().rows());
  const int dim = d_s * d_a;
  if (dim > 36) throw CapacityError("the probe is limited to d_S * d_A <= 36");
  const auto vb = hermitian_basis(dim);
  const auto rb = hermitian_basis(d_s);
  const Eigen::Index params = static_cast<Eigen::Index>(vb.size());
  const Eigen::Index block_rows = static_cast<Eigen::Index>(rb.size()) * dim * dim * 2;

  // Constraint rows are compressed sample by sample into an upper-triangular factor, which has the
  // same singular values and right singular vectors as the full stack.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(0, params);
  for (const auto& sigma : apparatus_states) {
    Eigen::MatrixXd rows(block_rows, params);
    for (std::size_t m = 0; m < rb.size(); ++m) {
      const Eigen::MatrixXcd op = tensor(rb[m], sigma);
      for (Eigen::Index k = 0; k < params; ++k) {
        const Eigen::MatrixXcd& b = vb[static_cast<std::size_t>(k)];
        const Eigen::MatrixXcd c = b * op - op * b;
        const Eigen::Index base = static_cast<Eigen::Index>(m) * dim * dim * 2;
        for (Eigen::Index e = 0; e < c.size(); ++e) {
          rows(base + 2 * e, k) = c(e).real();
          rows(base + 2 * e + 1, k) = c(e).imag();
        }
      }
    }
    Eigen::MatrixXd stack(r.rows() + rows.rows(), params);
    stack << r, rows;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack);
    const Eigen::Index keep = std::min(stack.rows(), params);
    r = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  std::vector<Eigen::MatrixXcd> out;
  for (Eigen::Index k = 0; k < params; ++k) {
    const double sk = k < s.size() ? s(k) : 0.0;
    if (sk > 1e-12 * std::max(1.0, top)) continue;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < params; ++j) v += svd.matrixV()(j, k) * vb[static_cast<std::size_t>(j)];
    out.push_back(0.5 * (v + v.adjoint()));
  }
  return out;
}

ProbeRecord probe_trial(const ProbeOptions& opt, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  ProbeRecord rec;
  rec.trial = trial;
  rec.source = "random";
  rec.stationary = trial % 4 == 3;

  FiniteModel::Parts parts;
  parts.id = "probe";
  parts.h_s = random_hermitian(opt.d_s, rng);
  parts.h_a = random_hermitian(opt.d_a, rng);
  const SpectralDecomposition sd_a = spectral_decomposition(parts.h_a);
  parts.sigma0 = QuantumState::pure(rec.stationary ? Eigen::VectorXcd(sd_a.eigenvectors.col(0)) : random_pure(opt.d_a, rng));

  std::vector<Eigen::MatrixXcd> states;
  for (double t : sample_times(-opt.window, 0.0, opt.samples)) {
    const Eigen::MatrixXcd u = sd_a.propagator(t);
    states.push_back(u * parts.sigma0.density() * u.adjoint());
  }
  const auto null = sampled_commutant(states, opt.d_s);
  rec.null_dimension = static_cast<int>(null.size());
  rec.certified = window_certificate(sd_a.eigenvalues, opt.window, opt.samples);

  // Candidates: every null-space basis element plus a few random combinations. The probe keeps the
  // one with the largest Condition-2 strength.
  std::vector<Eigen::MatrixXcd> candidates = null;
  std::normal_distribution<double> normal;
  for (int c = 0; c < 4 && !null.empty(); ++c) {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(null.front().rows(), null.front().cols());
    for (const auto& n : null) v += normal(rng) * n;
    candidates.push_back(v);
  }
  const int dim = opt.d_s * opt.d_a;
  parts.v = Eigen::MatrixXcd::Zero(dim, dim);
  double best = -1.0;
  for (auto& v : candidates) {
    const double nv = operator_norm(v);
    if (nv < 1e-12) continue;
    FiniteModel::Parts p = parts;
    p.v = v / nv;
    FiniteModel model(std::move(p));
    const double s = condition2_strength(model, opt.horizon, 20);
    if (s > best) {
      best = s;
      parts.v = v / nv;
    }
  }
  FiniteModel model(std::move(parts));
  rec.strength = std::max(best, 0.0);
  rec.residual = condition1_residual(model, opt.window, 2 * opt.samples - 1);
  rec.verdict = probe_verdict(rec.residual, rec.strength, rec.certified);
  return rec;
}

ProbeRecord chiral_window_row() {
  const GridSpec grid{64, -8.0, 8.0};
  const ChiralModel model(Bump(0.0, 4.0, 1.0).with_integral(1.0), Bump(-4.0, 0.0, 1.0).normalized(), grid, 8.0);
  ProbeRecord rec;
  rec.trial = -1;
  rec.source = "chiral-64";
  constexpr double window = 4.0;
  constexpr int samples = 17;  // past times are multiples of dx
  rec.residual = condition1_residual(model, window, samples);
  rec.strength = condition2_strength(model, 8.0, 16);
  rec.certified = window_certificate(grid.wavenumbers(), window, samples);
  rec.verdict = probe_verdict(rec.residual, rec.strength, rec.certified);
  return rec;
}

ProbeReport nogo_probe(const ProbeOptions& opt) {
  if (opt.trials < 0) throw ArgumentError("trial count must be nonnegative");
  if (opt.d_s < 1 || opt.d_a < 1) throw ArgumentError("dimensions must be positive");
  if (opt.d_s * opt.d_a > 36) throw CapacityError("the probe is limited to d_S * d_A <= 36");
  ProbeReport rep;
  rep.options = opt;
  rep.records = parallel_map<ProbeRecord>(
      static_cast<std::size_t>(opt.trials), [&](std::size_t i) { return probe_trial(opt, static_cast<int>(i)); },
      opt.workers);
  rep.chiral_row = chiral_window_row();
  for (const auto& r : rep.records)
    if (r.verdict == "counterexample") ++rep.counterexamples;
  return rep;
}

}  // namespace qmeas
