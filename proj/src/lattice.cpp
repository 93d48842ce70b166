#include "qmeas/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qmeas/metrics.hpp"

namespace qmeas {

void ChainSpec::validate() const {
  if (length < 1) throw ArgumentError("chain needs at least one site");
  if (length > kMaxChainLength) throw CapacityError("chains are limited to " + std::to_string(kMaxChainLength) + " sites");
  if (static_cast<int>(onsite.size()) != length) throw ValidationError("one on-site term per site is required");
  if (static_cast<int>(bonds.size()) != length - 1) throw ValidationError("one bond term per neighbouring pair is required");
  for (const auto& h : onsite) {
    if (h.rows() != 2 || h.cols() != 2) throw ValidationError("on-site terms must be 2x2");
    require_hermitian(h, "on-site term");
  }
  for (const auto& b : bonds) {
    if (b.rows() != 4 || b.cols() != 4) throw ValidationError("bond terms must be 4x4");
    require_hermitian(b, "bond term");
    if (operator_norm(b) > j_bound * (1.0 + 1e-12)) throw ValidationError("bond term exceeds the interaction bound J");
  }
}

ChainSpec random_chain(int length, double j_bound, std::uint64_t seed) {
  if (!(j_bound > 0.0)) throw ArgumentError("J must be positive");
  std::mt19937_64 rng(seed);
  ChainSpec c;
  c.length = length;
  c.j_bound = j_bound;
  for (int x = 0; x < length; ++x) {
    Eigen::MatrixXcd h = random_hermitian(2, rng);
    c.onsite.push_back(h / std::max(1.0, operator_norm(h)));
  }
  for (int x = 0; x + 1 < length; ++x) {
    Eigen::MatrixXcd b = random_hermitian(4, rng);
    c.bonds.push_back(j_bound * b / operator_norm(b));
  }
  c.validate();
  return c;
}

Eigen::MatrixXcd embed(int length, int first, const Eigen::MatrixXcd& op) {
  int k = 0;
  while ((Eigen::Index(1) << k) < op.rows()) ++k;
  if ((Eigen::Index(1) << k) != op.rows() || op.rows() != op.cols()) throw ArgumentError("operator must act on whole qubits");
  if (first < 0 || first + k > length) throw ArgumentError("operator does not fit on the chain");
  if (length > kMaxChainLength) throw CapacityError("chains are limited to " + std::to_string(kMaxChainLength) + " sites");
  const Eigen::Index left = Eigen::Index(1) << first, right = Eigen::Index(1) << (length - first - k);
  return tensor(tensor(Eigen::MatrixXcd::Identity(left, left), op), Eigen::MatrixXcd::Identity(right, right));
}

Eigen::MatrixXcd bond_term(const ChainSpec& c, int x) {
  return embed(c.length, x, c.bonds.at(static_cast<std::size_t>(x)));
}

Eigen::MatrixXcd box_hamiltonian(const ChainSpec& c, SiteInterval box) {
  c.validate();
  if (box.size() < 1) throw ArgumentError("box is empty");
  if (box.first < 0 || box.last >= c.length) throw ArgumentError("box leaves the chain");
  const Eigen::Index dim = Eigen::Index(1) << c.length;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int x = box.first; x <= box.last; ++x) h += embed(c.length, x, c.onsite[static_cast<std::size_t>(x)]);
  for (int x = box.first; x < box.last; ++x) h += bond_term(c, x);
  return h;
}

Eigen::MatrixXcd heisenberg(const SpectralDecomposition& h, const Eigen::MatrixXcd& a, double t) {
  const Eigen::MatrixXcd u = h.propagator(t);
  return u.adjoint() * a * u;
}

namespace {

void require_site0(const ChainSpec& c, const Eigen::MatrixXcd& a, SiteInterval box) {
  if (a.rows() != 2 || a.cols() != 2) throw ArgumentError("observable must act on site 0");
  if (box.first != 0 || box.last < 0 || box.last >= c.length) throw ArgumentError("box must contain site 0");
}

}  // namespace

double locality_error(const ChainSpec& c, const Eigen::MatrixXcd& a_site0, double t, SiteInterval box) {
  require_site0(c, a_site0, box);
  if (t == 0.0) return 0.0;
  const Eigen::MatrixXcd a = embed(c.length, 0, a_site0);
  const auto full = spectral_decomposition(box_hamiltonian(c, {0, c.length - 1}));
  const auto part = spectral_decomposition(box_hamiltonian(c, box));
  return operator_norm(Eigen::MatrixXcd(heisenberg(full, a, t) - heisenberg(part, a, t)));
}

std::vector<double> locality_sweep(const ChainSpec& c, const Eigen::MatrixXcd& a_site0, double t) {
  require_site0(c, a_site0, {0, 0});
  const Eigen::MatrixXcd a = embed(c.length, 0, a_site0);
  const Eigen::MatrixXcd reference = heisenberg(spectral_decomposition(box_hamiltonian(c, {0, c.length - 1})), a, t);
  std::vector<double> out;
  for (int r = 0; r < c.length; ++r) {
    if (t == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const auto part = spectral_decomposition(box_hamiltonian(c, {0, r}));
    out.push_back(operator_norm(Eigen::MatrixXcd(reference - heisenberg(part, a, t))));
  }
  return out;
}

Eigen::VectorXcd product_state(const std::vector<Eigen::VectorXcd>& sites) {
  if (sites.empty()) throw ArgumentError("product state needs at least one site");
  Eigen::MatrixXcd v = sites.front();
  for (std::size_t i = 1; i < sites.size(); ++i) v = tensor(v, Eigen::MatrixXcd(sites[i]));
  return v.col(0);
}

double box_energy_fluctuation(const ChainSpec& c, SiteInterval box, const std::vector<Eigen::VectorXcd>& sites) {
  if (static_cast<int>(sites.size()) != c.length) throw ArgumentError("one site state per site is required");
  for (const auto& s : sites)
    if (s.size() != 2 || std::abs(s.norm() - 1.0) > 1e-12) throw ValidationError("site states must be normalized qubits");
  return energy_fluctuation(box_hamiltonian(c, box), QuantumState::pure(product_state(sites)));
}

RasteginResult rastegin_check(int trials, int d, std::uint64_t seed) {
  if (trials < 0 || d < 1) throw ArgumentError("trials must be nonnegative and d positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> rank(1, d);
  RasteginResult r;
  r.trials = trials;
  r.min_slack = trials > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int i = 0; i < trials; ++i) {
    const Eigen::MatrixXcd r0 = random_density(d, rng, rank(rng));
    const Eigen::MatrixXcd r1 = random_density(d, rng, rank(rng));
    const Eigen::MatrixXcd s = random_density(d, rng, rank(rng));
    const double slack = bures_angle(r0, s) + bures_angle(r1, s) - bures_angle(r0, r1);
    r.min_slack = std::min(r.min_slack, slack);
    if (slack < -1e-9) ++r.failures;
  }
  return r;
}

}  // namespace qmeas
