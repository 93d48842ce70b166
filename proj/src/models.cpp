#include "qmeas/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qmeas {

JointState JointState::product(int dim, int c, const Eigen::VectorXcd& phi, double cell) {
  JointState s;
  s.cell = cell;
  s.legs.assign(static_cast<std::size_t>(dim), Eigen::VectorXcd::Zero(phi.size()));
  s.legs.at(static_cast<std::size_t>(c)) = phi;
  return s;
}

cplx JointState::inner(const JointState& other) const {
  if (legs.size() != other.legs.size()) throw ArgumentError("joint states have different system dimension");
  cplx s = 0.0;
  for (std::size_t c = 0; c < legs.size(); ++c) s += legs[c].dot(other.legs[c]);
  return s * cell;
}

Eigen::MatrixXcd MeasurementModel::system_hamiltonian() const {
  return Eigen::MatrixXcd::Zero(system_dim(), system_dim());
}

JointState MeasurementModel::evolve_free_basis(int a, double t) const {
  return JointState::product(system_dim(), a, apparatus_free(t), apparatus_cell());
}

Eigen::VectorXcd MeasurementModel::apply_meter(int, const Eigen::VectorXcd&) const {
  throw ProtocolError("model " + id() + " has no meter");
}

std::vector<Eigen::MatrixXcd> computational_pvm(int d) {
  std::vector<Eigen::MatrixXcd> p;
  for (int n = 0; n < d; ++n) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
    e(n, n) = 1.0;
    p.push_back(e);
  }
  return p;
}

// ---------------------------------------------------------------------------------------------

namespace {

void require_square(const Eigen::MatrixXcd& m, Eigen::Index d, const char* what) {
  if (m.rows() != d || m.cols() != d) throw ValidationError(std::string(what) + " has the wrong shape");
}

void validate_povm(const std::vector<Eigen::MatrixXcd>& e, Eigen::Index d, const char* what, bool projective) {
  if (e.empty()) return;
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& m : e) {
    require_square(m, d, what);
    require_hermitian(m, what);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kHermitianTolerance)
      throw ValidationError(std::string(what) + " element is not positive");
    if (projective && (m * m - m).cwiseAbs().maxCoeff() > kHermitianTolerance)
      throw ValidationError(std::string(what) + " element is not a projection");
    sum += m;
  }
  if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > kHermitianTolerance)
    throw ValidationError(std::string(what) + " does not sum to the identity");
}

}  // namespace

FiniteModel::FiniteModel(Parts parts) : p_(std::move(parts)) {
  const Eigen::Index ds = p_.h_s.rows(), da = p_.h_a.rows();
  if (ds < 1 || da < 1) throw ValidationError("empty Hamiltonian");
  require_square(p_.h_s, ds, "H_S");
  require_square(p_.h_a, da, "H_A");
  require_square(p_.v, ds * da, "V");
  if (ds * da > kMaxDimension) throw CapacityError("joint dimension exceeds the dense limit");
  if (p_.sigma0.dim() != da) throw ValidationError("apparatus state does not match H_A");
  require_hermitian(p_.h_s, "H_S");
  require_hermitian(p_.h_a, "H_A");
  require_hermitian(p_.v, "V");

  if (p_.sigma0.is_pure()) {
    aux_ = 1;
    phi_ = p_.sigma0.vector();
  } else {
    // Purification with the auxiliary leg last: phi(i, k) = sqrt(lambda_k) e_k(i).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p_.sigma0.density());
    aux_ = static_cast<int>(da);
    phi_.resize(da, da);
    for (Eigen::Index k = 0; k < da; ++k)
      phi_.col(k) = std::sqrt(std::max(0.0, es.eigenvalues()(k))) * es.eigenvectors().col(k);
  }
  const Eigen::MatrixXcd is = Eigen::MatrixXcd::Identity(ds, ds), ia = Eigen::MatrixXcd::Identity(da, da);
  h0_ = tensor(p_.h_s, ia) + tensor(is, p_.h_a);
  h_ = h0_ + p_.v;
  sd_ = spectral_decomposition(h_);
  sd0_ = spectral_decomposition(h0_);
  sd_a_ = spectral_decomposition(p_.h_a);
  validate();
}

void FiniteModel::validate() const {
  const Eigen::Index ds = p_.h_s.rows(), da = p_.h_a.rows();
  if (!(p_.tau > 0.0)) throw ValidationError("tau must be positive");
  validate_povm(p_.meter, da, "meter", false);
  validate_povm(p_.pvm, ds, "PVM", true);
  if (!p_.meter.empty() && p_.meter.size() != p_.pvm.size())
    throw ValidationError("meter and PVM must have the same number of outcomes");
}

Eigen::MatrixXcd FiniteModel::apparatus_density(double t) const {
  const Eigen::MatrixXcd u = sd_a_.propagator(t - t0());
  return u * p_.sigma0.density() * u.adjoint();
}

Eigen::MatrixXcd FiniteModel::evolve_joint(const Eigen::MatrixXcd& rho, double t) const {
  require_square(rho, system_dim(), "system state");
  const Eigen::MatrixXcd u = sd_.propagator(t - t0());
  return u * tensor(rho, p_.sigma0.density()) * u.adjoint();
}

JointState FiniteModel::evolve_with(const SpectralDecomposition& sd, int a, double t) const {
  const int ds = system_dim(), da = apparatus_dim();
  if (a < 0 || a >= ds) throw ArgumentError("basis index out of range");
  const Eigen::MatrixXcd u = sd.propagator(t - t0());
  JointState s;
  s.legs.assign(static_cast<std::size_t>(ds), Eigen::VectorXcd::Zero(extended_dim()));
  for (int k = 0; k < aux_; ++k) {
    const Eigen::VectorXcd out = u.middleCols(static_cast<Eigen::Index>(a) * da, da) * phi_.col(k);
    for (int c = 0; c < ds; ++c)
      for (int i = 0; i < da; ++i) s.legs[static_cast<std::size_t>(c)](i * aux_ + k) = out(c * da + i);
  }
  return s;
}

JointState FiniteModel::evolve_basis(int a, double t) const { return evolve_with(sd_, a, t); }

JointState FiniteModel::evolve_free_basis(int a, double t) const { return evolve_with(sd0_, a, t); }

Eigen::VectorXcd FiniteModel::apparatus_free(double t) const {
  const Eigen::MatrixXcd m = sd_a_.propagator(t - t0()) * phi_;
  Eigen::VectorXcd v(extended_dim());
  for (int i = 0; i < apparatus_dim(); ++i)
    for (int k = 0; k < aux_; ++k) v(i * aux_ + k) = m(i, k);
  return v;
}

JointState FiniteModel::apply_interaction(const JointState& s) const {
  const int ds = system_dim(), da = apparatus_dim();
  if (static_cast<int>(s.legs.size()) != ds) throw ArgumentError("joint state does not match the model");
  JointState out;
  out.cell = s.cell;
  out.legs.assign(static_cast<std::size_t>(ds), Eigen::VectorXcd::Zero(extended_dim()));
  Eigen::VectorXcd x(static_cast<Eigen::Index>(ds) * da);
  for (int k = 0; k < aux_; ++k) {
    for (int c = 0; c < ds; ++c)
      for (int i = 0; i < da; ++i) x(c * da + i) = s.legs[static_cast<std::size_t>(c)](i * aux_ + k);
    const Eigen::VectorXcd y = p_.v * x;
    for (int c = 0; c < ds; ++c)
      for (int i = 0; i < da; ++i) out.legs[static_cast<std::size_t>(c)](i * aux_ + k) = y(c * da + i);
  }
  return out;
}

Eigen::VectorXcd FiniteModel::apply_meter(int n, const Eigen::VectorXcd& apparatus) const {
  if (p_.meter.empty()) return MeasurementModel::apply_meter(n, apparatus);
  const Eigen::MatrixXcd& e = p_.meter.at(static_cast<std::size_t>(n));
  const int da = apparatus_dim();
  Eigen::Map<const Eigen::MatrixXcd> in(apparatus.data(), aux_, da);  // column i holds aux entries of level i
  const Eigen::MatrixXcd out = in * e.transpose();
  return Eigen::Map<const Eigen::VectorXcd>(out.data(), extended_dim());
}

double FiniteModel::apparatus_energy_fluctuation() const { return energy_fluctuation(p_.h_a, p_.sigma0); }

FiniteModel random_finite_model(int d_s, int d_a, std::uint64_t seed) {
  if (d_s < 1 || d_a < 1) throw ArgumentError("dimensions must be positive");
  if (d_s * d_a > 64) throw CapacityError("random models are limited to d_S * d_A <= 64");
  std::mt19937_64 rng(seed);
  FiniteModel::Parts p;
  p.id = "random";
  p.h_s = random_hermitian(d_s, rng);
  p.h_a = random_hermitian(d_a, rng);
  p.v = random_hermitian(d_s * d_a, rng);
  p.v /= operator_norm(p.v);
  p.v = 0.5 * (p.v + p.v.adjoint()).eval();
  p.sigma0 = QuantumState::pure(random_pure(d_a, rng));
  return FiniteModel(std::move(p));
}

FiniteModel free_coin_model(double tau) {
  FiniteModel::Parts p;
  p.id = "free";
  p.h_s = Eigen::MatrixXcd::Zero(2, 2);
  p.h_a = Eigen::MatrixXcd::Zero(2, 2);
  p.v = Eigen::MatrixXcd::Zero(4, 4);
  p.sigma0 = QuantumState::pure(Eigen::Vector2cd(1.0, 0.0));
  p.pvm = computational_pvm(2);
  p.meter = {0.5 * Eigen::MatrixXcd::Identity(2, 2), 0.5 * Eigen::MatrixXcd::Identity(2, 2)};
  p.tau = tau;
  p.switching = true;
  return FiniteModel(std::move(p));
}

FiniteModel cnot_model(double lambda, double tau) {
  if (!(lambda >= 0.0)) throw ArgumentError("coupling must be nonnegative");
  FiniteModel::Parts p;
  p.id = "cnot";
  p.h_s = Eigen::MatrixXcd::Zero(2, 2);
  p.h_a = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(2, 2);
  one(1, 1) = 1.0;
  p.v = lambda * tensor(one, Eigen::MatrixXcd(pauli_x()));
  p.sigma0 = QuantumState::pure(Eigen::Vector2cd(1.0, 0.0));
  p.pvm = computational_pvm(2);
  p.meter = computational_pvm(2);
  p.tau = tau;
  return FiniteModel(std::move(p));
}

// ---------------------------------------------------------------------------------------------

WaveFunction GridModel::blank(int legs) const {
  if (prototype_.axes() == 1) return WaveFunction(prototype_.axis(0), legs);
  return WaveFunction(prototype_.axis(0), prototype_.axis(1), legs);
}

WaveFunction GridModel::initial_joint(int a) const {
  if (a < 0 || a > 1) throw ArgumentError("basis index out of range");
  WaveFunction w = blank(2);
  w.leg(a) = free_branch(t0()).leg(0);
  return w;
}

WaveFunction GridModel::evolve_wave(int a, double t) const {
  WaveFunction w = blank(2);
  w.leg(a) = exact_branch(a, t).leg(0);
  return w;
}

double GridModel::time_step() const { return default_time_step(prototype_, splitting(), dt_cap_); }

WaveFunction GridModel::split_step_branch(int a, double t, double dt) const {
  if (t < t0()) throw ArgumentError("split-step propagation runs forward from t0");
  return split_step_evolve(initial_joint(a), splitting(), t - t0(), dt > 0.0 ? dt : time_step());
}

JointState GridModel::evolve_basis(int a, double t) const { return to_joint(evolve_wave(a, t)); }

double GridModel::apparatus_energy_fluctuation() const {
  WaveFunction hat = free_branch(t0());
  fft_axis(hat, 0, true);
  const Eigen::VectorXd k = hat.axis(0).wavenumbers();
  const Eigen::Index nz = hat.axes() == 2 ? hat.axis(1).n : 1;
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (Eigen::Index j = 0; j < hat.points(); ++j) {
    const double p = std::norm(hat.leg(0)(j));
    const double e = apparatus_symbol(k(j / nz));
    w += p;
    m1 += p * e;
    m2 += p * e * e;
  }
  m1 /= w;
  m2 /= w;
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

std::optional<SpectralHistogram> GridModel::apparatus_spectrum() const {
  return momentum_histogram(free_branch(t0()), 0);
}

JointState GridModel::to_joint(const WaveFunction& psi) {
  JointState s;
  s.cell = psi.cell();
  for (int a = 0; a < psi.legs(); ++a) s.legs.push_back(psi.leg(a));
  return s;
}

WaveFunction GridModel::from_joint(const JointState& s) const {
  WaveFunction w = blank(static_cast<int>(s.legs.size()));
  for (int a = 0; a < w.legs(); ++a) {
    if (s.legs[static_cast<std::size_t>(a)].size() != w.points()) throw ArgumentError("joint state does not match the grid");
    w.leg(a) = s.legs[static_cast<std::size_t>(a)];
  }
  return w;
}

namespace {

double discrete_norm(const WaveFunction& w) { return std::sqrt(w.norm_squared()); }

void require_inside(const GridSpec& g, double lo, double hi, const std::string& what) {
  if (lo < g.x_min || hi > g.x_max)
    throw NumericalError(what + " leaves the grid; enlarge the domain");
}

Eigen::VectorXcd apply_indicator(const WaveFunction& proto, int axis, const Eigen::VectorXcd& v,
                                 const std::function<bool(double)>& keep) {
  if (v.size() != proto.points()) throw ArgumentError("apparatus vector does not match the grid");
  Eigen::VectorXcd out = v;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (!keep(proto.coordinate(axis, j))) out(j) = 0.0;
  return out;
}

// Resolution floor for compactly supported bumps: points across the support.
constexpr double kMinPointsAcross = 16.0;

}  // namespace

// ---------------------------------------------------------------------------------------------

GridSpec StandardModel::default_grid(double pointer_width, double tau, int n) {
  // Stretch the box so tau/2 is a whole number of cells.
  const double dx0 = 6.0 * (tau + 2.0 * pointer_width) / n;
  const double cells = std::max(1.0, std::floor(0.5 * tau / dx0));
  const double half = 0.5 * n * (0.5 * tau / cells);
  return {n, -half, half};
}

StandardModel::StandardModel(double pointer_width, double tau, GridSpec grid)
    : GridModel(WaveFunction(grid), tau), tau_(tau) {
  if (!(pointer_width > 0.0) || !(tau > 0.0)) throw ArgumentError("pointer width and tau must be positive");
  packet_ = Bump(-pointer_width, pointer_width, 1.0).normalized();
  amp_ = 1.0 / discrete_norm(free_branch(0.0));
  validate();
}

void StandardModel::validate() const {
  const GridSpec& g = prototype().axis(0);
  const double w = pointer_width();
  if (2.0 * w / g.dx() < kMinPointsAcross) throw ConfigurationError("pointer too narrow for the grid resolution");
  if (tau_ + 2.0 * w > std::min(-g.x_min, g.x_max))
    throw ConfigurationError("pointer too wide for the grid: translated packet would reach the boundary");
  if (std::abs(amp_ * amp_ - 1.0) > 1e-4) throw ConfigurationError("pointer packet under-resolved on the grid");
}

WaveFunction StandardModel::exact_branch(int a, double t) const {
  const double shift = spin_sign(a) * (t - t0());
  require_inside(prototype().axis(0), packet_.lo() + shift, packet_.hi() + shift, "pointer packet");
  return sample(prototype().axis(0), [&](double x) { return cplx(amp_ * packet_(x - shift)); });
}

WaveFunction StandardModel::free_branch(double) const {
  return sample(prototype().axis(0), [&](double x) { return cplx(amp_ * packet_(x)); });
}

Splitting StandardModel::splitting() const {
  Splitting s;
  s.momentum = [](double kx, double) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = spin_sign(0) * kx;
    m(1, 1) = spin_sign(1) * kx;
    return m;
  };
  s.mixed = [](double, double) { return Eigen::Matrix2cd::Zero().eval(); };
  s.max_speed = 1.0;
  return s;
}

JointState StandardModel::apply_interaction(const JointState& s) const {
  WaveFunction w = from_joint(s);
  fft_axis(w, 0, true);
  const Eigen::VectorXd k = w.axis(0).wavenumbers();
  for (int c = 0; c < 2; ++c) w.leg(c) = (spin_sign(c) * k.cast<cplx>()).cwiseProduct(w.leg(c));
  fft_axis(w, 0, false);
  return to_joint(w);
}

Eigen::VectorXcd StandardModel::apply_meter(int n, const Eigen::VectorXcd& v) const {
  if (n < 0 || n > 1) throw ArgumentError("outcome out of range");
  return apply_indicator(prototype(), 0, v, [n](double x) { return n == 0 ? x < 0.0 : x >= 0.0; });
}

std::vector<std::string> StandardModel::notes() const {
  return {"sigma_z (x) p does not commute with the localized pointer state, so the model is not a switching device"};
}

// ---------------------------------------------------------------------------------------------

ChiralModel::ChiralModel(Params p)
    : ChiralModel(Bump(0.0, p.delta_g, 1.0).with_integral(p.phase), Bump(-p.delta_phi, 0.0, 1.0).normalized(),
                  [&] {
                    const double tau = p.delta_g + p.delta_phi;
                    const double t_max = p.t_max > 0.0 ? p.t_max : 2.0 * tau;
                    return GridSpec{p.n, -p.delta_phi - tau, t_max + 0.5 * tau};
                  }(),
                  p.t_max > 0.0 ? p.t_max : 2.0 * (p.delta_g + p.delta_phi)) {}

ChiralModel::ChiralModel(Bump g, Bump packet, GridSpec grid, double t_max)
    : GridModel(WaveFunction(grid), t_max), g_(std::move(g)), packet_(std::move(packet)) {
  if (!(g_.lo() >= 0.0)) throw ConfigurationError("supp g must lie in (0, Delta)");
  if (!(packet_.hi() <= 0.0)) throw ConfigurationError("packet support must lie in (-delta, 0)");
  amp_ = 1.0 / discrete_norm(free_branch(0.0));
  validate();
}

void ChiralModel::validate() const {
  const GridSpec& grid = prototype().axis(0);
  if (packet_.width() / grid.dx() < kMinPointsAcross || g_.width() / grid.dx() < kMinPointsAcross)
    throw ConfigurationError("bumps under-resolved on the grid");
  require_inside(grid, packet_.lo(), packet_.hi() + horizon(), "chiral packet");
  if (std::abs(amp_ * amp_ - 1.0) > 1e-4) throw ConfigurationError("packet under-resolved on the grid");
}

double ChiralModel::branch_phase(int a, double x, double t) const {
  const double s = t - t0();
  return -spin_sign(a) * (g_.antiderivative(x) - g_.antiderivative(x - s));
}

WaveFunction ChiralModel::exact_branch(int a, double t) const {
  const double s = t - t0();
  require_inside(prototype().axis(0), packet_.lo() + s, packet_.hi() + s, "chiral packet");
  return sample(prototype().axis(0), [&](double x) {
    const double f = packet_(x - s);
    if (f == 0.0) return cplx(0.0);
    return amp_ * f * std::exp(kI * branch_phase(a, x, t));
  });
}

WaveFunction ChiralModel::free_branch(double t) const {
  const double s = t - t0();
  require_inside(prototype().axis(0), packet_.lo() + s, packet_.hi() + s, "chiral packet");
  return sample(prototype().axis(0), [&](double x) { return cplx(amp_ * packet_(x - s)); });
}

Splitting ChiralModel::splitting() const {
  Splitting s;
  s.momentum = [](double kx, double) { return (kx * Eigen::Matrix2cd::Identity()).eval(); };
  s.mixed = [g = g_](double x, double) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = spin_sign(0) * g(x);
    m(1, 1) = spin_sign(1) * g(x);
    return m;
  };
  s.max_speed = 1.0;
  return s;
}

JointState ChiralModel::apply_interaction(const JointState& s) const {
  JointState out = s;
  const auto& grid = prototype().axis(0);
  for (int c = 0; c < 2; ++c)
    for (Eigen::Index j = 0; j < grid.n; ++j) out.legs[static_cast<std::size_t>(c)](j) *= spin_sign(c) * g_(grid.x(static_cast<int>(j)));
  return out;
}

Eigen::VectorXcd ChiralModel::apply_meter(int n, const Eigen::VectorXcd& v) const {
  if (n < 0 || n > 1) throw ArgumentError("outcome out of range");
  const double c = packet_.center() + tau();
  return apply_indicator(prototype(), 0, v, [n, c](double x) { return n == 0 ? x < c : x >= c; });
}

std::optional<bool> ChiralModel::condition1_by_support() const { return packet_.hi() <= g_.lo(); }

std::vector<std::string> ChiralModel::notes() const {
  return {"timing device: branches differ by a phase only, so the sign meter carries no which-path information",
          "branch phases follow sigma_z = |1><1| - |0><0|: phi^0 picks up exp(+i int g), phi^1 exp(-i int g)"};
}

// ---------------------------------------------------------------------------------------------

void GaussianPacketParams::validate() const {
  if (!(m > 0.0 && k > 0.0 && sigma > 0.0 && delta > 0.0 && lead > 0.0 && hbar > 0.0))
    throw ConfigurationError("Gaussian packet parameters must be positive");
}

namespace {

double next_pow2(double v) {
  double n = 16.0;
  while (n < v) n *= 2.0;
  return n;
}

double packet_std(const GaussianPacketParams& p, double s) {
  const double r = p.hbar * s / (p.sigma * p.sigma * p.m);
  return p.sigma * std::sqrt(1.0 + r * r) / std::numbers::sqrt2;
}

}  // namespace

GridSpec GaussianModel::default_grid(const GaussianPacketParams& p, double extra_time, int n) {
  p.validate();
  const double s_end = p.lead + std::max(0.0, extra_time);
  const double w = 14.0 * packet_std(p, s_end);
  const double lo = p.x0() - w;
  const double hi = std::max(p.x0() + p.group_velocity() * s_end, 0.0) + w;
  const double dx = std::numbers::pi / (p.k + 14.0 / p.sigma);
  const double needed = next_pow2((hi - lo) / dx);
  const int size = static_cast<int>(std::max<double>(n > 0 ? n : 1024, needed));
  return {size, lo, hi};
}

GaussianModel::GaussianModel(GaussianPacketParams p, Eigen::Matrix2cd b, Bump v_profile, int n)
    : GridModel(WaveFunction(default_grid(p, 0.0, n)), p.lead),
      p_(p),
      b_(std::move(b)),
      v_(std::move(v_profile)),
      initial_(prototype().axis(0)) {
  const GridSpec grid = prototype().axis(0);
  const double x0 = p_.x0();
  const double norm = 1.0 / (std::pow(std::numbers::pi, 0.25) * std::sqrt(p_.sigma));
  initial_ = sample(grid, [&](double x) {
    const double d = x - x0;
    return norm * std::exp(kI * (p_.k * d) - d * d / (2.0 * p_.sigma * p_.sigma));
  });
  dt_cap_ = 0.0;
  validate();
}

void GaussianModel::validate() const {
  p_.validate();
  require_hermitian(b_, "B");
  if (!(v_.lo() > 0.0)) throw ConfigurationError("supp V must lie in (0, inf)");
  require_contained(initial_, 4.0 * p_.sigma, 1e-12);
}

WaveFunction GaussianModel::packet(double s) const {
  WaveFunction w = initial_;
  if (s == 0.0) return w;
  fft_axis(w, 0, true);
  const Eigen::VectorXd k = w.axis(0).wavenumbers();
  for (Eigen::Index j = 0; j < k.size(); ++j)
    w.leg(0)(j) *= std::exp(-kI * (p_.hbar * k(j) * k(j) * s / (2.0 * p_.m)));
  fft_axis(w, 0, false);
  return w;
}

double GaussianModel::mean_position(double s) const { return p_.x0() + p_.group_velocity() * s; }

double GaussianModel::spread(double s) const {
  const double r = p_.hbar * s / (p_.sigma * p_.sigma * p_.m);
  return p_.sigma * std::sqrt(1.0 + r * r);
}

double GaussianModel::leakage(double t) const {
  return region_probability(packet(t), [](double x) { return x >= 0.0; });
}

double GaussianModel::chebyshev_bound(double t) const {
  const double vd = p_.group_velocity() * p_.delta;
  const double s = spread(t);
  return s * s / (vd * vd);
}

WaveFunction GaussianModel::exact_branch(int, double) const {
  throw UnsupportedModelError("the coupled Gaussian packet has no closed-form evolution");
}

WaveFunction GaussianModel::evolve_wave(int a, double t) const { return split_step_branch(a, t); }

Splitting GaussianModel::splitting() const {
  Splitting s;
  const double hbar = p_.hbar, m = p_.m;
  s.momentum = [hbar, m](double kx, double) { return (hbar * kx * kx / (2.0 * m) * Eigen::Matrix2cd::Identity()).eval(); };
  s.mixed = [b = b_, v = v_](double x, double) { return (v(x) * b).eval(); };
  s.max_speed = hbar * (p_.k + 14.0 / p_.sigma) / m;
  return s;
}

JointState GaussianModel::apply_interaction(const JointState& s) const {
  JointState out = s;
  const auto& grid = prototype().axis(0);
  for (Eigen::Index j = 0; j < grid.n; ++j) {
    const double v = v_(grid.x(static_cast<int>(j)));
    const cplx a0 = s.legs[0](j), a1 = s.legs[1](j);
    out.legs[0](j) = v * (b_(0, 0) * a0 + b_(0, 1) * a1);
    out.legs[1](j) = v * (b_(1, 0) * a0 + b_(1, 1) * a1);
  }
  return out;
}

double GaussianModel::interaction_norm() const { return operator_norm(b_) * std::abs(v_.height()); }

// ---------------------------------------------------------------------------------------------

namespace {

double sg_integral(const SternGerlach2D::Params& p) { return p.g_integral > 0.0 ? p.g_integral : p.safety * p.eps; }

}  // namespace

SternGerlach2D::SternGerlach2D(Params p)
    : GridModel(
          [&] {
            if (!(p.delta > 0.0 && p.Delta > 0.0 && p.eps > 0.0 && p.scale > 0.0))
              throw ConfigurationError("Stern-Gerlach supports and scale must be positive");
            const double tau = p.delta + p.Delta;
            const double t_max = p.t_max > 0.0 ? p.t_max : 2.0 * tau;
            const GridSpec x{p.nx, -p.Delta - 0.5 * tau, t_max + 0.5 * tau};
            const double zmax = sg_integral(p) + 3.0 * p.eps;
            return WaveFunction(x.scaled(p.scale), GridSpec{p.nz, -zmax, zmax});
          }(),
          (p.t_max > 0.0 ? p.t_max : 2.0 * (p.delta + p.Delta)) / p.scale),
      p_(p) {
  if (!(p_.eps < sg_integral(p_)))
    throw ConfigurationError("epsilon-condition violated: eps must be smaller than the integral of g");
  const double c = p_.scale;
  g_ = Bump(0.0, p_.delta, 1.0).with_integral(sg_integral(p_)).rescaled(c, c);
  xi_ = Bump(-p_.Delta, 0.0, 1.0).normalized().rescaled(c, std::sqrt(c));
  eta_ = Bump(-p_.eps, p_.eps, 1.0).normalized();
  amp_ = 1.0 / discrete_norm(free_branch(0.0));
  validate();
}

void SternGerlach2D::validate() const {
  const GridSpec& gx = prototype().axis(0);
  const GridSpec& gz = prototype().axis(1);
  if (!(p_.eps < sg_integral(p_))) throw ConfigurationError("epsilon-condition violated");
  if (xi_.width() / gx.dx() < kMinPointsAcross || g_.width() / gx.dx() < kMinPointsAcross ||
      eta_.width() / gz.dx() < kMinPointsAcross)
    throw ConfigurationError("bumps under-resolved on the grid");
  require_inside(gx, xi_.lo(), xi_.hi() + horizon(), "x packet");
  const double reach = g_.integral() + p_.eps;
  if (reach > std::min(-gz.x_min, gz.x_max)) throw NumericalError("z packet leaves the grid");
  if (std::abs(amp_ * amp_ - 1.0) > 1e-4) throw ConfigurationError("packet under-resolved on the grid");
}

double SternGerlach2D::displacement(double x, double t) const {
  const double s = t - t0();
  return g_.antiderivative(x) - g_.antiderivative(x - s);
}

WaveFunction SternGerlach2D::exact_branch(int a, double t) const {
  const double s = t - t0();
  const GridSpec& gx = prototype().axis(0);
  const GridSpec& gz = prototype().axis(1);
  require_inside(gx, xi_.lo() + s, xi_.hi() + s, "x packet");
  WaveFunction w(gx, gz);
  const double sign = spin_sign(a);
  for (int i = 0; i < gx.n; ++i) {
    const double x = gx.x(i);
    const double f = xi_(x - s);
    if (f == 0.0) continue;
    const double d = sign * displacement(x, t);
    for (int j = 0; j < gz.n; ++j) w.leg(0)(static_cast<Eigen::Index>(i) * gz.n + j) = amp_ * f * eta_(gz.x(j) - d);
  }
  return w;
}

WaveFunction SternGerlach2D::free_branch(double t) const {
  const double s = t - t0();
  const GridSpec& gx = prototype().axis(0);
  require_inside(gx, xi_.lo() + s, xi_.hi() + s, "x packet");
  return sample(gx, prototype().axis(1), [&](double x, double z) { return cplx(amp_ * xi_(x - s) * eta_(z)); });
}

Splitting SternGerlach2D::splitting() const {
  Splitting s;
  s.momentum = [](double kx, double) { return (kx * Eigen::Matrix2cd::Identity()).eval(); };
  s.mixed = [g = g_](double x, double kz) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = spin_sign(0) * g(x) * kz;
    m(1, 1) = spin_sign(1) * g(x) * kz;
    return m;
  };
  s.max_speed = std::max(1.0, g_.height());
  return s;
}

JointState SternGerlach2D::apply_interaction(const JointState& s) const {
  WaveFunction w = from_joint(s);
  fft_axis(w, 1, true);
  const Eigen::VectorXd kz = w.axis(1).wavenumbers();
  const Eigen::Index nz = kz.size();
  for (int c = 0; c < 2; ++c)
    for (Eigen::Index j = 0; j < w.points(); ++j) w.leg(c)(j) *= kz(j % nz);
  fft_axis(w, 1, false);
  for (int c = 0; c < 2; ++c)
    for (Eigen::Index j = 0; j < w.points(); ++j) w.leg(c)(j) *= spin_sign(c) * g_(w.coordinate(0, j));
  return to_joint(w);
}

Eigen::VectorXcd SternGerlach2D::apply_meter(int n, const Eigen::VectorXcd& v) const {
  if (n < 0 || n > 1) throw ArgumentError("outcome out of range");
  return apply_indicator(prototype(), 1, v, [n](double z) { return n == 0 ? z < 0.0 : z >= 0.0; });
}

std::optional<bool> SternGerlach2D::condition1_by_support() const { return xi_.hi() <= g_.lo(); }

double SternGerlach2D::energy_fluctuation_quadrature() const {
  return std::sqrt(integrate([this](double x) { const double d = xi_.derivative(x); return d * d; }, xi_.lo(), xi_.hi(), 256));
}

std::vector<std::string> SternGerlach2D::notes() const {
  return {"Delta H_A is evaluated as hbar (int |xi'|^2)^{1/2}; the printed expression hbar^2 int (xi')^2 is its square",
          "rescaling by C also maps g to C g(C x), keeping int g and the z separation fixed"};
}

}  // namespace qmeas
