// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qmeas/app.hpp"
#include "qmeas/bounds.hpp"
#include "qmeas/conditions.hpp"
#include "qmeas/lattice.hpp"
#include "qmeas/measure.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/models.hpp"

using namespace qmeas;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Eigen::MatrixXcd projector(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

// |<psi|e^{-iHt}|psi>| from an eigen-decomposition, independent of the library's evolution.
double survival(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi;
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += std::norm(c(i)) * std::exp(-kI * es.eigenvalues()(i) * t);
  return std::abs(s);
}

Check criterion1() {
  Check c;
  const Eigen::Matrix2cd h = pauli_z();
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const QuantumState s = QuantumState::pure(plus);
  const double dh = energy_fluctuation(h, s);
  c.require(std::abs(dh - 1.0) < 1e-12, "dH of |+> is not 1");
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = kPi / 2 * i / 200;
    const double overlap = fidelity(s, evolve_exact(Eigen::MatrixXcd(h), s, t));
    worst = std::max(worst, std::abs(overlap - std::cos(t)));
  }
  c.require(worst <= 1e-9, "saturation deviation " + fmt(worst));
  std::mt19937_64 rng(11);
  double slack = 1.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 7;
    const Eigen::MatrixXcd hr = random_hermitian(d, rng);
    const Eigen::VectorXcd psi = random_pure(d, rng);
    const double dhr = energy_fluctuation(hr, QuantumState::pure(psi));
    for (int i = 0; i <= 10; ++i) {
      const double t = 3.0 * i / 10;
      slack = std::min(slack, survival(hr, psi, t) - mt_overlap_bound(dhr, t));
    }
  }
  c.require(slack >= -1e-9, "speed-limit slack " + fmt(slack));
  return c;
}

Check criterion2() {
  Check c;
  std::mt19937_64 rng(22);
  double inv = 0.0, mono = 1.0, tri = 1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 7;
    const Eigen::MatrixXcd r0 = random_density(d, rng), r1 = random_density(d, rng), r2 = random_density(d, rng);
    const Eigen::MatrixXcd u = random_unitary(d, rng);
    inv = std::max(inv, std::abs(fidelity(u * r0 * u.adjoint(), u * r1 * u.adjoint()) - fidelity(r0, r1)));
    tri = std::min(tri, std::acos(std::min(1.0, fidelity(r0, r2))) + std::acos(std::min(1.0, fidelity(r2, r1))) -
                            std::acos(std::min(1.0, fidelity(r0, r1))));
    // Bipartite 2 x 4 states; restriction to the first leg cannot lower the fidelity.
    const CompositeSpace sp({2, 4});
    const QuantumState a = QuantumState::mixed(sp, random_density(8, rng)), b = QuantumState::mixed(sp, random_density(8, rng));
    mono = std::min(mono, fidelity(partial_trace(a, {0}), partial_trace(b, {0})) - fidelity(a, b));
  }
  c.require(inv <= 1e-9, "unitary invariance deviation " + fmt(inv));
  c.require(mono >= -1e-9, "partial-trace monotonicity slack " + fmt(mono));
  c.require(tri >= -1e-9, "triangle slack " + fmt(tri));
  const RasteginResult r = rastegin_check(1000, 4, 5);
  c.require(r.passed(), "library triangle check failed");
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(2);
  zero(0) = 1.0;
  const double f = fidelity(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2) / 2.0), projector(zero));
  c.require(std::abs(f - 1.0 / std::sqrt(2.0)) <= 1e-10, "F(I/2, |0><0|) = " + fmt(f));
  return c;
}

Check criterion3() {
  Check c;
  const ChiralModel m(ChiralModel::Params{});
  const double tau = m.tau();
  const double c1 = condition1_residual(m, tau, 50);
  c.require(c1 <= 1e-10, "Condition 1 residual " + fmt(c1));
  const auto c3 = condition3_check(m, m.t0() + tau, 0.25 * tau, 8);
  c.require(c3.holds, "Condition 3 residual " + fmt(c3.residual));
  double dev = 0.0;
  for (double t : {0.5 * tau, tau, 2.0 * tau})
    for (int a = 0; a < 2; ++a) {
      WaveFunction diff = m.split_step_branch(a, m.t0() + t);
      const WaveFunction ex = m.evolve_wave(a, m.t0() + t);
      for (int l = 0; l < 2; ++l) diff.leg(l) -= ex.leg(l);
      dev = std::max(dev, std::sqrt(diff.norm_squared()));
    }
  c.require(dev <= 1e-6, "split-step deviation " + fmt(dev));
  return c;
}

Check criterion4() {
  Check c;
  GaussianPacketParams p;
  p.k = 8.0;
  const GaussianModel g(p, pauli_z(), Bump(0.5, 1.5, 1.0));
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double s = p.lead * i / 20;
    const Moments mo = position_moments(g.packet(s));
    // Closed forms written out here: mean x0 + (k/m) s, spread sigma sqrt(1 + s^2/(sigma^4 m^2)).
    const double mean = -p.k / p.m * (p.lead + p.delta) + p.k / p.m * s;
    const double spread = p.sigma * std::sqrt(1.0 + s * s / (std::pow(p.sigma, 4) * p.m * p.m));
    worst = std::max(worst, std::abs(mo.mean - mean) / std::abs(mean));
    worst = std::max(worst, std::abs(mo.std_dev() * std::sqrt(2.0) - spread) / spread);
    c.require(g.leakage(s) <= g.chebyshev_bound(s), "leakage above Chebyshev at s = " + fmt(s));
  }
  c.require(worst <= 1e-6, "moment deviation " + fmt(worst));
  double prev = 2.0;
  for (double k : {2.0, 4.0, 8.0, 16.0}) {
    GaussianPacketParams q = p;
    q.k = k / q.sigma;
    const GaussianModel gk(q, pauli_z(), Bump(0.5, 1.5, 1.0));
    const double l = gk.leakage(q.lead);
    c.require(l < prev, "leakage not decreasing at k = " + fmt(k));
    prev = l;
  }
  return c;
}

Check criterion5() {
  Check c;
  const SternGerlach2D m(SternGerlach2D::Params{});
  const double tau = m.tau();
  RunOptions ro;
  ro.with_p_curve = false;
  const MeasurementRun run = run_protocol(m, tau, ro);
  c.require(run.probabilities[0][0] >= 1 - 1e-6 && run.probabilities[1][1] >= 1 - 1e-6,
            "P(correct) = " + fmt(std::min(run.probabilities[0][0], run.probabilities[1][1])));
  c.require(run.disturbance.f_pm >= 1 - 1e-5, "F(rho+, rho-) = " + fmt(run.disturbance.f_pm));
  const auto fam = conjugate_family(EvolvedBasis(m, tau), m.system_hamiltonian(), 2);
  c.require(fam.min_fidelity <= 1 / std::sqrt(2.0) + 1e-6, "min conjugate fidelity " + fmt(fam.min_fidelity));
  const AuditEntry e = audit_main(tau, m.apparatus_energy_fluctuation());
  c.require(e.verdict == Verdict::holds && e.margin >= 0, "main bound margin " + fmt(e.margin));
  std::vector<double> products;
  for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    SternGerlach2D::Params p;
    p.scale = scale;
    const SternGerlach2D ms(p);
    products.push_back(ms.tau() * ms.apparatus_energy_fluctuation());
  }
  for (double pr : products)
    c.require(std::abs(pr - products[1]) <= 1e-6 * products[1], "scaling product drifts to " + fmt(pr));
  return c;
}

Check criterion6() {
  Check c;
  double slack = 1.0, dslack = 1.0;
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    const int d_s = 2 + trial % 2, d_a = 2 + (trial / 2) % 5;  // d_S * d_A <= 18
    const FiniteModel m = random_finite_model(d_s, d_a, 1000 + static_cast<std::uint64_t>(trial));
    if (std::abs(operator_norm(m.v()) - 1.0) > 1e-12) {
      c.require(false, "||V|| != 1");
      break;
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(trial));
    const Eigen::VectorXcd psi = tensor(random_pure(d_s, rng), m.sigma0().vector());
    const auto full = spectral_decomposition(m.total_hamiltonian());
    const auto free = spectral_decomposition(m.free_hamiltonian());
    auto p = [&](double t) { return std::norm((free.propagator(t) * psi).dot(full.propagator(t) * psi)); };
    for (int i = 0; i < 50; ++i) {
      const double t = kPi / 2 * i / 49;
      const double pt = p(t);
      slack = std::min(slack, pt - std::pow(std::cos(t), 2));
      const double deriv = (p(t + h) - p(t - h)) / (2 * h);
      dslack = std::min(dslack, 2 * std::sqrt(std::max(0.0, pt - pt * pt)) + 1e-6 - std::abs(deriv));
    }
  }
  c.require(slack >= -1e-9, "p(t) - cos^2 t = " + fmt(slack));
  c.require(dslack >= 0, "derivative bound slack " + fmt(dslack));
  return c;
}

Check criterion7() {
  Check c;
  int mismatch = 0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double tau = 0.02 * (i + 1), dh = 0.02 * (j + 1);
      const Verdict v = audit_main(tau, dh).verdict;
      mismatch += audit_n_outcomes(tau, dh, 2).verdict != v;
      mismatch += audit_error_tolerant(tau, dh, 0.0).verdict != v;
    }
  c.require(mismatch == 0, std::to_string(mismatch) + " verdict mismatches");
  c.require(std::abs(audit_width(1.0, 1.0, 1.0).rhs - kPi / 2) <= 1e-12, "width threshold at alpha = 1");
  const double a_min = (1 + 1 / std::sqrt(2.0)) / 2;
  c.require(std::abs(audit_width(1.0, 1.0, a_min).rhs) <= 1e-12, "width threshold at alpha_min");
  AuditInputs in;
  in.tau = 1.0;
  in.widths = {{a_min, 1.0}};
  const AuditReport r = evaluate_audit(in);
  bool noted = false;
  for (const auto& n : r.notes) noted = noted || n == kWidthCorollaryNote;
  c.require(noted, "corollary note missing from the report");
  return c;
}

Check criterion8() {
  Check c;
  const ProbeReport r = nogo_probe(ProbeOptions{});
  c.require(r.records.size() == 100, "trial count");
  c.require(r.counterexamples == 0, std::to_string(r.counterexamples) + " counterexamples");
  return c;
}

Check criterion9() {
  Check c;
  const ChainSpec chain = random_chain(8, 1.0, 7);
  const std::vector<double> err = locality_sweep(chain, pauli_z(), 1.0);
  c.require(err.back() <= 1e-10, "full-box locality error " + fmt(err.back()));
  for (std::size_t r = 1; r < err.size(); ++r)
    c.require(err[r] <= err[r - 1] + 1e-9, "locality error increases at radius " + std::to_string(r));
  const Eigen::MatrixXcd lhs = box_hamiltonian(chain, {0, 3}) + box_hamiltonian(chain, {4, 7}) + bond_term(chain, 3);
  const double add = (lhs - box_hamiltonian(chain, {0, 7})).cwiseAbs().maxCoeff();
  c.require(add <= 1e-12, "additivity residual " + fmt(add));
  c.require(audit_lattice(1.0, 0.5, 1.0 / 8).verdict == Verdict::vacuous, "lattice bound at eps = 1/8 not vacuous");
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes the CSV artifacts of every command into `dir`.
void full_suite(const fs::path& dir) {
  const fs::path cfg = QMEAS_CONFIG_DIR;
  GlobalOptions opt;
  opt.quiet = true;
  opt.seed = 3;
  auto write = [&](const std::string& name, const Outcome& o) {
    Artifacts csv;
    for (const auto& [file, text] : o.artifacts.items())
      if (file.ends_with(".csv")) csv.add(file, text);
    csv.write_all((dir / name).string());
  };
  for (const char* name : {"chiral", "gaussian", "standard", "cnot", "free", "stern_gerlach"})
    write(name, cmd_run(Config::load((cfg / (std::string(name) + ".cfg")).string()), opt));
  write("sweep", cmd_sweep(Config::load((cfg / "stern_gerlach.cfg").string()), "scale", {0.5, 1, 2, 4, 8}, opt));
  ProbeOptions po;
  po.trials = 20;
  write("probe", cmd_probe(po, opt));
  write("chain", cmd_chain(Config::load((cfg / "chain.cfg").string()), opt));
  write("audit", cmd_audit(read_file(cfg / "audit_example.csv"), opt));
}

Check criterion10() {
  Check c;
  const fs::path base = fs::temp_directory_path() / ("qmeas_determinism_" + std::to_string(::getpid()));
  fs::remove_all(base);
  full_suite(base / "a");
  full_suite(base / "b");
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = base / "b" / fs::relative(e.path(), base / "a");
    c.require(fs::exists(other) && read_file(e.path()) == read_file(other),
              "differs: " + fs::relative(e.path(), base / "a").string());
  }
  c.require(files >= 10, "only " + std::to_string(files) + " CSV artifacts");
  fs::remove_all(base);
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 speed-limit saturation", 5, criterion1},   {"2 fidelity suite", 10, criterion2},
      {"3 chiral timing device", 20, criterion3},    {"4 Gaussian packet", 30, criterion4},
      {"5 Stern-Gerlach measurement", 180, criterion5}, {"6 overlap bound", 60, criterion6},
      {"7 audit arithmetic", 1, criterion7},         {"8 no-go probe", 30, criterion8},
      {"9 lattice", 60, criterion9},                 {"10 determinism", 600, criterion10},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.ok && secs > cr.budget_s) {
      c.ok = false;
      c.detail = "runtime " + fmt(secs) + " s over budget " + fmt(cr.budget_s) + " s";
    }
    std::printf("%s criterion %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", cr.name, secs, c.ok ? "" : ": ",
                c.ok ? "" : c.detail.c_str());
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
