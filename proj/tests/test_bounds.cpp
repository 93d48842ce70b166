#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qmeas/bounds.hpp"
#include "qmeas/errors.hpp"

using namespace qmeas;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("main bound threshold") {
  CHECK(audit_main(1.0, kPi / 4).verdict == Verdict::holds);
  CHECK(audit_main(1.0, kPi / 4 - 1e-6).verdict == Verdict::fails);
  CHECK(audit_main(2.0, 3.5).margin == doctest::Approx(7.0 - kPi / 4));
  CHECK_THROWS_AS(audit_main(-1.0, 1.0), ArgumentError);
}

TEST_CASE("outcome-count bound reduces to the main bound at N = 2") {
  for (double x : {0.1, 0.5, 0.78, 0.79, 1.0, 1.6, 3.0}) {
    CHECK(audit_n_outcomes(1.0, x, 2).verdict == audit_main(1.0, x).verdict);
    CHECK(audit_error_tolerant(1.0, x, 0.0).verdict == audit_main(1.0, x).verdict);
  }
  // N = 4: threshold arccos(1/2) = pi/3.
  CHECK(audit_n_outcomes(1.0, kPi / 3 + 1e-9, 4).verdict == Verdict::holds);
  CHECK(audit_n_outcomes(1.0, kPi / 3 - 1e-6, 4).verdict == Verdict::fails);
  // Infinitely many outcomes: pi/2.
  CHECK(audit_n_outcomes(1.0, kPi / 2 - 1e-6, 0).verdict == Verdict::fails);
  CHECK(audit_n_outcomes(1.0, kPi / 2 + 1e-9, 0).verdict == Verdict::holds);
  CHECK_THROWS_AS(audit_n_outcomes(1.0, 1.0, 1), ArgumentError);
}

TEST_CASE("error-tolerant bound becomes vacuous for large errors") {
  // (1 + 6 sqrt P)/2 >= 1 once P >= 1/36.
  CHECK(audit_error_tolerant(1.0, 0.1, 1.0 / 36).verdict == Verdict::vacuous);
  CHECK(audit_error_tolerant(1.0, 0.1, 0.001).verdict == Verdict::fails);
  CHECK_THROWS_AS(audit_error_tolerant(1.0, 0.1, 1.5), ArgumentError);
}

TEST_CASE("width bound") {
  CHECK(audit_width(1.0, 2.0, 1.0).rhs == doctest::Approx(kPi / 2));
  CHECK(audit_width(1.0, 2.0, 1.0).verdict == Verdict::holds);
  CHECK(audit_width(1.0, 1.0, 1.0).verdict == Verdict::fails);
  const AuditEntry at_min = audit_width(1.0, 1.0, width_alpha_min());
  CHECK(at_min.rhs == doctest::Approx(0.0));
  CHECK(at_min.verdict == Verdict::vacuous);
  CHECK(at_min.notes == kWidthCorollaryNote);
  CHECK(audit_width(1.0, 1.0, 0.8).verdict == Verdict::inapplicable);
  // Threshold grows with alpha.
  double prev = -1.0;
  for (double a = width_alpha_min(); a <= 1.0; a += 0.01) {
    const double r = audit_width(1.0, 1.0, a).rhs;
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("interaction bounds") {
  const auto e = audit_interaction(1.0, 1.0, 2);
  REQUIRE(e.size() == 2);
  CHECK(e[0].verdict == Verdict::holds);
  CHECK(e[1].verdict == Verdict::holds);
  const auto small = audit_interaction(0.5, 1.0, 2);
  CHECK(small[0].verdict == Verdict::fails);
  const auto inf = audit_interaction(1.0, std::numeric_limits<double>::infinity(), 2);
  CHECK(inf[0].verdict == Verdict::inapplicable);
  CHECK(inf[1].verdict == Verdict::inapplicable);
}

TEST_CASE("lattice bound") {
  CHECK(audit_lattice(1.0, 0.1, 1.0 / 8).verdict == Verdict::vacuous);
  CHECK(audit_lattice(1.0, 0.1, 0.5).verdict == Verdict::vacuous);
  const AuditEntry e = audit_lattice(1.0, 1.0, 0.0);
  CHECK(e.rhs == doctest::Approx(kPi / 4));
  CHECK(e.verdict == Verdict::holds);
  CHECK(audit_lattice(1.0, 0.1, 0.001).verdict == Verdict::fails);
  CHECK_THROWS_AS(audit_lattice(1.0, 0.1, 2.0), ArgumentError);
}

TEST_CASE("report evaluation and hypotheses") {
  AuditInputs in;
  CHECK_THROWS_AS(evaluate_audit(in), ArgumentError);
  in.tau = 2.0;
  in.delta_h = 3.5;
  in.n_outcomes = 2;
  in.p_error = 0.0;
  in.v_norm = 1.0;
  in.widths = {{1.0, 4.0}};
  AuditReport r = evaluate_audit(in);
  CHECK(r.entries.size() == 6);
  CHECK(r.all_hold());
  CHECK(r.min_margin() >= 0.0);

  in.condition1 = false;
  r = evaluate_audit(in);
  for (const auto& e : r.entries) {
    if (e.name.rfind("interaction", 0) == 0) CHECK(e.verdict != Verdict::inapplicable);
    else CHECK(e.verdict == Verdict::inapplicable);
  }
  in.condition1 = true;
  in.perfect = false;
  in.p_error = 0.001;
  r = evaluate_audit(in);
  for (const auto& e : r.entries) {
    if (e.name == "error_tolerant") CHECK(e.verdict != Verdict::inapplicable);
    else CHECK(e.verdict == Verdict::inapplicable);
  }
}

TEST_CASE("report carries the corollary note") {
  AuditInputs in;
  in.tau = 1.0;
  in.widths = {{width_alpha_min(), 1.0}};
  const AuditReport r = evaluate_audit(in);
  REQUIRE(r.notes.size() == 1);
  CHECK(r.notes[0] == kWidthCorollaryNote);
}

TEST_CASE("spacetime heuristic") {
  const SpacetimeReport s = spacetime_heuristic(1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(s.mass_min == doctest::Approx(kPi / 4));
  CHECK(s.energy.verdict == Verdict::holds);
  CHECK(s.small_tau.rhs == doctest::Approx(kPi / 2));
  CHECK(s.small_tau.verdict == Verdict::fails);
  // SI: the small-tau threshold tau R >= pi hbar G / (2 c^4).
  const SpacetimeReport si = spacetime_heuristic(1.0, 1.0, kSiG, kSiC, kSiHbar);
  CHECK(si.small_tau.rhs == doctest::Approx(kPi * kSiHbar * kSiG / (2 * std::pow(kSiC, 4))).epsilon(1e-12));
  CHECK(si.small_tau.rhs == doctest::Approx(1.3687e-78).epsilon(1e-4));
  CHECK(si.binding.empty());
  CHECK_THROWS_AS(spacetime_heuristic(0.0, 1.0, 1.0, 1.0, 1.0), ArgumentError);
}

TEST_CASE("verdict names") {
  CHECK(std::string(to_string(Verdict::holds)) == "holds");
  CHECK(std::string(to_string(Verdict::vacuous)) == "vacuous");
  CHECK(clamped_cos(2.0) == 0.0);
  CHECK(clamped_cos(0.0) == 1.0);
}
