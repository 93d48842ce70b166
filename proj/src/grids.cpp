#include "qmeas/grids.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>

namespace qmeas {

void GridSpec::validate() const {
  if (n < 16 || (n & (n - 1)) != 0) throw ArgumentError("grid size must be a power of two >= 16");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw ArgumentError("grid needs x_max > x_min");
}

Eigen::VectorXd GridSpec::coordinates() const {
  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j) x(j) = this->x(j);
  return x;
}

Eigen::VectorXd GridSpec::wavenumbers() const {
  Eigen::VectorXd k(n);
  const double dk = 2.0 * std::numbers::pi / length();
  for (int j = 0; j < n; ++j) k(j) = dk * (j < n / 2 ? j : j - n);
  return k;
}

WaveFunction::WaveFunction(GridSpec x, int legs) {
  x.validate();
  if (legs != 1 && legs != 2) throw ArgumentError("wave functions carry 1 or 2 internal components");
  axes_ = {x};
  points_ = x.n;
  legs_.assign(static_cast<std::size_t>(legs), Eigen::VectorXcd::Zero(points_));
}

WaveFunction::WaveFunction(GridSpec x, GridSpec z, int legs) {
  x.validate();
  z.validate();
  if (legs != 1 && legs != 2) throw ArgumentError("wave functions carry 1 or 2 internal components");
  axes_ = {x, z};
  points_ = static_cast<Eigen::Index>(x.n) * z.n;
  if (points_ * legs > 64 * kMaxDimension * kMaxDimension) throw CapacityError("grid too large");
  legs_.assign(static_cast<std::size_t>(legs), Eigen::VectorXcd::Zero(points_));
}

double WaveFunction::cell() const {
  double c = 1.0;
  for (const auto& a : axes_) c *= a.dx();
  return c;
}

double WaveFunction::coordinate(int axis, Eigen::Index flat) const {
  if (axes() == 1) return axes_[0].x(static_cast<int>(flat));
  const Eigen::Index nz = axes_[1].n;
  return axis == 0 ? axes_[0].x(static_cast<int>(flat / nz)) : axes_[1].x(static_cast<int>(flat % nz));
}

double WaveFunction::norm_squared() const {
  double s = 0.0;
  for (const auto& l : legs_) s += l.squaredNorm();
  return s * cell();
}

cplx WaveFunction::inner(const WaveFunction& other) const {
  if (!same_grid(other) || legs() != other.legs()) throw ArgumentError("wave functions live on different grids");
  cplx s = 0.0;
  for (int a = 0; a < legs(); ++a) s += leg(a).dot(other.leg(a));
  return s * cell();
}

bool WaveFunction::same_grid(const WaveFunction& other) const {
  if (axes() != other.axes()) return false;
  for (int k = 0; k < axes(); ++k) {
    const auto &a = axis(k), &b = other.axis(k);
    if (a.n != b.n || a.x_min != b.x_min || a.x_max != b.x_max) return false;
  }
  return true;
}

WaveFunction sample(const GridSpec& x, const std::function<cplx(double)>& f) {
  WaveFunction psi(x);
  for (int j = 0; j < x.n; ++j) psi.leg(0)(j) = f(x.x(j));
  return psi;
}

WaveFunction sample(const GridSpec& x, const GridSpec& z, const std::function<cplx(double, double)>& f) {
  WaveFunction psi(x, z);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < z.n; ++j) psi.leg(0)(static_cast<Eigen::Index>(i) * z.n + j) = f(x.x(i), z.x(j));
  return psi;
}

namespace {

// Visits every 1D line of the data along `axis` as (offset, stride, length).
template <typename F>
void for_each_line(const WaveFunction& psi, int axis, F&& f) {
  if (psi.axes() == 1) {
    f(Eigen::Index{0}, Eigen::Index{1}, Eigen::Index{psi.axis(0).n});
    return;
  }
  const Eigen::Index nx = psi.axis(0).n, nz = psi.axis(1).n;
  if (axis == 0)
    for (Eigen::Index iz = 0; iz < nz; ++iz) f(iz, nz, nx);
  else
    for (Eigen::Index ix = 0; ix < nx; ++ix) f(ix * nz, Eigen::Index{1}, nz);
}

class LineFft {
 public:
  void run(Eigen::VectorXcd& data, Eigen::Index offset, Eigen::Index stride, Eigen::Index len, bool forward) {
    in_.resize(static_cast<std::size_t>(len));
    for (Eigen::Index j = 0; j < len; ++j) in_[static_cast<std::size_t>(j)] = data(offset + j * stride);
    if (forward)
      fft_.fwd(out_, in_);
    else
      fft_.inv(out_, in_);
    for (Eigen::Index j = 0; j < len; ++j) data(offset + j * stride) = out_[static_cast<std::size_t>(j)];
  }

 private:
  Eigen::FFT<double> fft_;
  std::vector<cplx> in_, out_;
};

void check_axis(const WaveFunction& psi, int axis) {
  if (axis < 0 || axis >= psi.axes()) throw ArgumentError("axis out of range");
}

}  // namespace

void fft_axis(WaveFunction& psi, int axis, bool forward) {
  check_axis(psi, axis);
  LineFft fft;
  for (int a = 0; a < psi.legs(); ++a)
    for_each_line(psi, axis, [&](Eigen::Index off, Eigen::Index stride, Eigen::Index len) {
      fft.run(psi.leg(a), off, stride, len, forward);
    });
}

WaveFunction translate(const WaveFunction& psi, double a, int axis) {
  check_axis(psi, axis);
  if (a == 0.0) return psi;
  WaveFunction out = psi;
  const Eigen::VectorXd k = psi.axis(axis).wavenumbers();
  Eigen::VectorXcd phase(k.size());
  for (Eigen::Index j = 0; j < k.size(); ++j) phase(j) = std::exp(-kI * k(j) * a);
  fft_axis(out, axis, true);
  for (int l = 0; l < out.legs(); ++l)
    for_each_line(out, axis, [&](Eigen::Index off, Eigen::Index stride, Eigen::Index len) {
      for (Eigen::Index j = 0; j < len; ++j) out.leg(l)(off + j * stride) *= phase(j);
    });
  fft_axis(out, axis, false);
  return out;
}

double region_probability(const WaveFunction& psi, const std::function<bool(double)>& in_region) {
  if (psi.axes() != 1) throw ArgumentError("1D predicate on a 2D wave function");
  double s = 0.0;
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    if (!in_region(psi.coordinate(0, j))) continue;
    for (int a = 0; a < psi.legs(); ++a) s += std::norm(psi.leg(a)(j));
  }
  return s * psi.cell();
}

double region_probability(const WaveFunction& psi, const std::function<bool(double, double)>& in_region) {
  if (psi.axes() != 2) throw ArgumentError("2D predicate on a 1D wave function");
  double s = 0.0;
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    if (!in_region(psi.coordinate(0, j), psi.coordinate(1, j))) continue;
    for (int a = 0; a < psi.legs(); ++a) s += std::norm(psi.leg(a)(j));
  }
  return s * psi.cell();
}

double boundary_mass(const WaveFunction& psi, double margin) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    bool edge = false;
    for (int k = 0; k < psi.axes() && !edge; ++k) {
      const double c = psi.coordinate(k, j);
      edge = c < psi.axis(k).x_min + margin || c >= psi.axis(k).x_max - margin;
    }
    if (!edge) continue;
    for (int a = 0; a < psi.legs(); ++a) s += std::norm(psi.leg(a)(j));
  }
  return s * psi.cell();
}

void require_contained(const WaveFunction& psi, double margin, double tolerance) {
  const double m = boundary_mass(psi, margin);
  if (m > tolerance) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "boundary leakage %.3e exceeds %.1e; enlarge the domain", m, tolerance);
    throw NumericalError(buf);
  }
}

namespace {

Moments moments_from(const std::vector<double>& value, const std::vector<double>& weight) {
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  if (!(total > 0.0)) throw NumericalError("wave function has zero norm");
  double m1 = 0.0;
  for (std::size_t j = 0; j < value.size(); ++j) m1 += weight[j] * value[j];
  m1 /= total;
  double m2 = 0.0;
  for (std::size_t j = 0; j < value.size(); ++j) m2 += weight[j] * (value[j] - m1) * (value[j] - m1);
  return {m1, m2 / total};
}

// Marginal weights along an axis, indexed by position on that axis.
std::vector<double> marginal(const WaveFunction& psi, int axis) {
  const int n = psi.axis(axis).n;
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    const Eigen::Index idx = psi.axes() == 1 ? j : (axis == 0 ? j / psi.axis(1).n : j % psi.axis(1).n);
    for (int a = 0; a < psi.legs(); ++a) w[static_cast<std::size_t>(idx)] += std::norm(psi.leg(a)(j));
  }
  return w;
}

}  // namespace

Moments position_moments(const WaveFunction& psi, int axis) {
  check_axis(psi, axis);
  const Eigen::VectorXd x = psi.axis(axis).coordinates();
  return moments_from(std::vector<double>(x.data(), x.data() + x.size()), marginal(psi, axis));
}

Moments momentum_moments(const WaveFunction& psi, int axis) {
  check_axis(psi, axis);
  WaveFunction hat = psi;
  fft_axis(hat, axis, true);
  const Eigen::VectorXd k = psi.axis(axis).wavenumbers();
  return moments_from(std::vector<double>(k.data(), k.data() + k.size()), marginal(hat, axis));
}

SpectralHistogram momentum_histogram(const WaveFunction& psi, int axis) {
  check_axis(psi, axis);
  WaveFunction hat = psi;
  fft_axis(hat, axis, true);
  const std::vector<double> w = marginal(hat, axis);
  const Eigen::VectorXd k = psi.axis(axis).wavenumbers();
  const int n = static_cast<int>(k.size());
  const double dk = 2.0 * std::numbers::pi / psi.axis(axis).length();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  SpectralHistogram h;
  h.weights.resize(static_cast<std::size_t>(n));
  h.edges.resize(static_cast<std::size_t>(n) + 1);
  // Ascending order: m = -n/2 .. n/2-1 sits at FFT index (m + n) % n.
  for (int i = 0; i < n; ++i) {
    const int m = i - n / 2;
    h.weights[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>((m + n) % n)] / total;
    h.edges[static_cast<std::size_t>(i)] = (m - 0.5) * dk;
  }
  h.edges.back() = (n / 2 - 0.5) * dk;
  return h;
}

Eigen::Matrix2cd expm_hermitian2(const Eigen::Matrix2cd& m, double t) {
  const double a = 0.5 * (m(0, 0).real() + m(1, 1).real());
  const double bz = 0.5 * (m(0, 0).real() - m(1, 1).real());
  const double bx = m(0, 1).real(), by = -m(0, 1).imag();
  const double b = std::sqrt(bx * bx + by * by + bz * bz);
  const Eigen::Matrix2cd traceless = m - a * Eigen::Matrix2cd::Identity();
  const double bt = b * t;
  // sin(bt)/b with its limit t at b = 0.
  const double sinc = b > 0.0 ? std::sin(bt) / b : t;
  return std::exp(-kI * (a * t)) * (std::cos(bt) * Eigen::Matrix2cd::Identity() - kI * sinc * traceless);
}

namespace {

// Applies per-point 2x2 blocks (or their (0,0) entries for scalar wave functions).
void apply_blocks(WaveFunction& psi, const std::vector<Eigen::Matrix2cd>& u) {
  if (psi.legs() == 1) {
    auto& v = psi.leg(0);
    for (Eigen::Index j = 0; j < psi.points(); ++j) v(j) *= u[static_cast<std::size_t>(j)](0, 0);
    return;
  }
  auto& v0 = psi.leg(0);
  auto& v1 = psi.leg(1);
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    const auto& b = u[static_cast<std::size_t>(j)];
    const cplx a0 = v0(j), a1 = v1(j);
    v0(j) = b(0, 0) * a0 + b(0, 1) * a1;
    v1(j) = b(1, 0) * a0 + b(1, 1) * a1;
  }
}

}  // namespace

WaveFunction split_step_evolve(const WaveFunction& psi, const Splitting& h, double t_final, double dt) {
  if (!h.momentum || !h.mixed) throw UnsupportedModelError("model declares no split-operator decomposition");
  if (!(dt > 0.0)) throw ArgumentError("time step must be positive");
  if (!(t_final >= 0.0)) throw ArgumentError("final time must be nonnegative");
  if (t_final == 0.0) return psi;
  const long steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
  const double step = t_final / static_cast<double>(steps);

  const bool two_d = psi.axes() == 2;
  const Eigen::VectorXd x = psi.axis(0).coordinates();
  const Eigen::VectorXd kx = psi.axis(0).wavenumbers();
  const Eigen::VectorXd kz = two_d ? psi.axis(1).wavenumbers() : Eigen::VectorXd::Zero(1);
  const Eigen::Index nz = kz.size();

  std::vector<Eigen::Matrix2cd> half(static_cast<std::size_t>(psi.points()));
  std::vector<Eigen::Matrix2cd> full(half.size()), kick(half.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < nz; ++j) {
      const auto idx = static_cast<std::size_t>(i * nz + j);
      const Eigen::Matrix2cd mk = h.momentum(kx(i), kz(j));
      half[idx] = expm_hermitian2(mk, 0.5 * step);
      full[idx] = expm_hermitian2(mk, step);
      kick[idx] = expm_hermitian2(h.mixed(x(i), kz(j)), step);
    }

  WaveFunction w = psi;
  if (two_d) fft_axis(w, 1, true);  // work in (x, k_z)
  fft_axis(w, 0, true);
  apply_blocks(w, half);
  for (long s = 0; s < steps; ++s) {
    fft_axis(w, 0, false);
    apply_blocks(w, kick);
    fft_axis(w, 0, true);
    apply_blocks(w, s + 1 == steps ? half : full);
  }
  fft_axis(w, 0, false);
  if (two_d) fft_axis(w, 1, false);
  return w;
}

double default_time_step(const WaveFunction& psi, const Splitting& h, double cap) {
  double dx = psi.axis(0).dx();
  for (int k = 1; k < psi.axes(); ++k) dx = std::min(dx, psi.axis(k).dx());
  const double v = std::max(h.max_speed, 1e-300);
  double dt = dx / (4.0 * v);
  if (cap > 0.0) dt = std::min(dt, cap);
  return dt;
}

void write_csv(std::ostream& os, const WaveFunction& psi) {
  os << (psi.axes() == 1 ? "x" : "x,z");
  for (int a = 0; a < psi.legs(); ++a) os << ",re" << a << ",im" << a;
  os << '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < psi.points(); ++j) {
    for (int k = 0; k < psi.axes(); ++k) {
      std::snprintf(buf, sizeof buf, k == 0 ? "%.10e" : ",%.10e", psi.coordinate(k, j));
      os << buf;
    }
    for (int a = 0; a < psi.legs(); ++a) {
      std::snprintf(buf, sizeof buf, ",%.12e,%.12e", psi.leg(a)(j).real(), psi.leg(a)(j).imag());
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace qmeas
