#include "qmeas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qmeas {

namespace {

// Eigenvalues of a density matrix below this are treated as numerical zeros before the square
// root; sqrt(1e-16) noise would otherwise show up at the 1e-8 level.
constexpr double kRankFloor = 1e-13;

void require_same_shape(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw ArgumentError("states live on different spaces");
}

Eigen::MatrixXcd sqrt_state(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  Eigen::VectorXd s = es.eigenvalues();
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = s(k) > kRankFloor ? std::sqrt(s(k)) : 0.0;
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1) {
  require_same_shape(rho0, rho1);
  const Eigen::MatrixXcd prod = sqrt_state(rho0) * sqrt_state(rho1);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(prod);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

double fidelity(const QuantumState& s0, const QuantumState& s1) {
  if (s0.dim() != s1.dim()) throw ArgumentError("states live on different spaces");
  if (s0.is_pure() && s1.is_pure()) return std::min(1.0, std::abs(s0.vector().dot(s1.vector())));
  if (s1.is_pure()) {
    const auto& v = s1.vector();
    return std::sqrt(std::clamp((v.adjoint() * s0.density() * v)(0, 0).real(), 0.0, 1.0));
  }
  if (s0.is_pure()) return fidelity(s1, s0);
  return fidelity(s0.density(), s1.density());
}

double trace_distance_paper(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1) {
  require_same_shape(rho0, rho1);
  const Eigen::MatrixXcd diff = rho0 - rho1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance_paper(const QuantumState& s0, const QuantumState& s1) {
  if (s0.dim() != s1.dim()) throw ArgumentError("states live on different spaces");
  return trace_distance_paper(s0.density(), s1.density());
}

double bures_angle(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1) {
  return std::acos(fidelity(rho0, rho1));
}

double bures_angle(const QuantumState& s0, const QuantumState& s1) {
  return std::acos(fidelity(s0, s1));
}

double energy_fluctuation(const Eigen::MatrixXcd& h, const QuantumState& s) {
  if (h.rows() != s.dim()) throw ArgumentError("Hamiltonian does not match state dimension");
  require_hermitian(h, "Hamiltonian");
  double mean = 0.0, second = 0.0;
  if (s.is_pure()) {
    const Eigen::VectorXcd hv = h * s.vector();
    mean = s.vector().dot(hv).real();
    second = hv.squaredNorm();
  } else {
    const Eigen::MatrixXcd rho = s.density();
    const Eigen::MatrixXcd rh = rho * h;
    mean = rh.trace().real();
    second = (rh * h).trace().real();
  }
  return std::sqrt(std::max(0.0, second - mean * mean));
}

SpectralDistribution::SpectralDistribution(std::vector<SpectralPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ArgumentError("spectral distribution is empty");
  double total = 0.0;
  for (const auto& p : points_) {
    if (!(p.weight >= 0.0) || !std::isfinite(p.energy)) throw ValidationError("invalid spectral point");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("spectral weights do not sum to 1");
  std::sort(points_.begin(), points_.end(),
            [](const SpectralPoint& a, const SpectralPoint& b) { return a.energy < b.energy; });
}

SpectralDistribution spectral_distribution(const Eigen::MatrixXcd& h, const QuantumState& s, double merge_tol) {
  if (h.rows() != s.dim()) throw ArgumentError("Hamiltonian does not match state dimension");
  const SpectralDecomposition sd = spectral_decomposition(h);
  const Eigen::MatrixXcd rho = s.density();
  std::vector<SpectralPoint> pts;
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const auto v = sd.eigenvectors.col(k);
    const double w = std::max(0.0, (v.adjoint() * rho * v)(0, 0).real());
    const double e = sd.eigenvalues(k);
    if (!pts.empty() && e - pts.back().energy <= merge_tol)
      pts.back().weight += w;
    else
      pts.push_back({e, w});
  }
  double total = 0.0;
  for (const auto& p : pts) total += p.weight;
  for (auto& p : pts) p.weight /= total;
  return SpectralDistribution(std::move(pts));
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
}

// Two-pointer scan over sorted cells: the shortest window [lo, hi] with mass >= alpha.
template <typename Width>
double shortest_window(const std::vector<double>& mass, double alpha, Width width) {
  constexpr double slack = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < mass.size(); ++hi) {
    acc += mass[hi];
    while (lo < hi && acc - mass[lo] >= alpha - slack) acc -= mass[lo++];
    if (acc >= alpha - slack) best = std::min(best, width(lo, hi));
  }
  return best;
}

}  // namespace

double overall_width(const SpectralDistribution& d, double alpha) {
  require_alpha(alpha);
  const auto& pts = d.points();
  std::vector<double> mass;
  for (const auto& p : pts) mass.push_back(p.weight);
  return shortest_window(mass, alpha, [&](std::size_t lo, std::size_t hi) {
    return pts[hi].energy - pts[lo].energy;
  });
}

double overall_width(const SpectralHistogram& h, double alpha) {
  require_alpha(alpha);
  if (h.edges.size() != h.weights.size() + 1 || h.weights.empty())
    throw ArgumentError("histogram needs one more edge than bins");
  double total = 0.0;
  for (double w : h.weights) {
    if (!(w >= 0.0)) throw ValidationError("negative histogram weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("histogram weights do not sum to 1");
  return shortest_window(h.weights, alpha, [&](std::size_t lo, std::size_t hi) {
    return h.edges[hi + 1] - h.edges[lo];
  });
}

double mt_overlap_bound(double delta_h, double t) {
  const double phase = delta_h * std::abs(t);
  if (phase > std::numbers::pi / 2) return 0.0;
  return std::cos(phase);
}

}  // namespace qmeas
