#include "qmeas/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmeas/errors.hpp"

namespace qmeas {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw ArgumentError(std::string(what) + " must be nonnegative");
}

Verdict by_margin(double margin) {
  return margin >= -kVerdictSlack ? Verdict::holds : Verdict::fails;
}

// cos-type entry: lhs = clamped cos(x), rhs = bound, margin = rhs - lhs. The verdict compares x
// with arccos(rhs) so that it agrees exactly with the equivalent product-form inequality.
AuditEntry cos_entry(std::string name, double x, double rhs) {
  AuditEntry e;
  e.name = std::move(name);
  e.lhs = clamped_cos(x);
  e.rhs = rhs;
  e.margin = rhs - e.lhs;
  if (rhs >= 1.0 - kVerdictSlack) {
    e.verdict = Verdict::vacuous;
    e.notes = "bound is vacuous: right-hand side >= 1";
    return e;
  }
  e.verdict = x >= std::acos(std::max(0.0, rhs)) - kVerdictSlack ? Verdict::holds : Verdict::fails;
  return e;
}

double inverse_sqrt_n(int n) {
  if (n == 0) return 0.0;
  if (n < 2) throw ArgumentError("outcome count must be >= 2 (or 0 for infinitely many)");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::vacuous: return "vacuous";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "?";
}

double clamped_cos(double x) { return x >= 0.0 && x <= kPi / 2 ? std::cos(x) : (x > kPi / 2 ? 0.0 : 1.0); }

AuditEntry audit_main(double tau, double delta_h) {
  require_nonnegative(tau, "tau");
  require_nonnegative(delta_h, "energy fluctuation");
  AuditEntry e;
  e.name = "main";
  e.lhs = tau * delta_h;
  e.rhs = kPi / 4;
  e.margin = e.lhs - e.rhs;
  e.verdict = by_margin(e.margin);
  return e;
}

AuditEntry audit_n_outcomes(double tau, double delta_h, int n_outcomes) {
  require_nonnegative(tau, "tau");
  require_nonnegative(delta_h, "energy fluctuation");
  AuditEntry e = cos_entry(n_outcomes == 0 ? "n_outcomes_infinite" : "n_outcomes", tau * delta_h, inverse_sqrt_n(n_outcomes));
  e.notes = "threshold tau*dH = " + std::to_string(std::acos(e.rhs));
  return e;
}

double width_alpha_min() { return 0.5 * (1.0 + 1.0 / std::numbers::sqrt2); }

const char* const kWidthCorollaryNote =
    "at alpha = (1 + 1/sqrt2)/2 the theorem formula gives 2 arccos(1) = 0; the stated corollary value 2 pi/3 is "
    "not reproduced by this formula";

AuditEntry audit_width(double tau, double width, double alpha) {
  require_nonnegative(tau, "tau");
  require_nonnegative(width, "overall width");
  AuditEntry e;
  e.name = "width";
  e.lhs = tau * width;
  if (!(alpha > 0.0 && alpha <= 1.0) || alpha < width_alpha_min() - 1e-15) {
    e.rhs = std::numeric_limits<double>::quiet_NaN();
    e.margin = std::numeric_limits<double>::quiet_NaN();
    e.verdict = Verdict::inapplicable;
    e.notes = "alpha below the validity threshold (1 + 1/sqrt2)/2";
    return e;
  }
  const double arg = std::min(1.0, (1.0 / std::numbers::sqrt2 + 1.0 - alpha) / alpha);
  e.rhs = 2.0 * std::acos(arg);
  e.margin = e.lhs - e.rhs;
  if (e.rhs <= kVerdictSlack) {
    e.verdict = Verdict::vacuous;
    e.notes = kWidthCorollaryNote;
  } else {
    e.verdict = by_margin(e.margin);
  }
  return e;
}

AuditEntry audit_error_tolerant(double tau, double delta_h, double p_error) {
  require_nonnegative(tau, "tau");
  require_nonnegative(delta_h, "energy fluctuation");
  if (!(p_error >= 0.0 && p_error <= 1.0)) throw ArgumentError("P_error must lie in [0, 1]");
  return cos_entry("error_tolerant", tau * delta_h, std::sqrt((1.0 + 6.0 * std::sqrt(p_error)) / 2.0));
}

std::vector<AuditEntry> audit_interaction(double tau, double v_norm, int n_outcomes) {
  require_nonnegative(tau, "tau");
  require_nonnegative(v_norm, "interaction norm");
  const double rhs_n = inverse_sqrt_n(n_outcomes);
  if (std::isinf(v_norm)) {
    AuditEntry a{"interaction", v_norm, kPi / 4, v_norm, Verdict::inapplicable, "unbounded interaction"};
    AuditEntry b{n_outcomes == 0 ? "interaction_infinite" : "interaction_n", 0.0, rhs_n, 0.0, Verdict::inapplicable,
                 "unbounded interaction"};
    return {a, b};
  }
  AuditEntry a;
  a.name = "interaction";
  a.lhs = v_norm * tau;
  a.rhs = kPi / 4;
  a.margin = a.lhs - a.rhs;
  a.verdict = by_margin(a.margin);
  AuditEntry b = cos_entry(n_outcomes == 0 ? "interaction_infinite" : "interaction_n", v_norm * tau, rhs_n);
  return {a, b};
}

AuditEntry audit_lattice(double tau, double delta_h_box, double eps) {
  require_nonnegative(tau, "tau");
  require_nonnegative(delta_h_box, "box energy fluctuation");
  if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("locality error must lie in [0, 1]");
  AuditEntry e;
  e.name = "lattice";
  e.lhs = delta_h_box * tau;
  e.rhs = kPi / 4 - (kPi / 2) * std::sqrt(2.0 * eps);
  e.margin = e.lhs - e.rhs;
  if (e.rhs <= kVerdictSlack) {
    e.verdict = Verdict::vacuous;
    e.notes = "bound is vacuous: right-hand side <= 0";
  } else {
    e.verdict = by_margin(e.margin);
  }
  return e;
}

double AuditReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.verdict == Verdict::holds || e.verdict == Verdict::fails) m = std::min(m, e.margin);
  return m;
}

bool AuditReport::all_hold() const {
  return std::none_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.verdict == Verdict::fails; });
}

AuditReport evaluate_audit(const AuditInputs& in) {
  AuditReport r;
  r.inputs = in;
  auto push = [&](AuditEntry e, bool need_c1, bool need_perfect) {
    std::string missing;
    if (need_c1 && !in.condition1) missing = "condition 1 does not hold";
    if (need_perfect && !in.perfect) missing += std::string(missing.empty() ? "" : "; ") + "measurement is not perfect";
    if (!missing.empty() && e.verdict != Verdict::inapplicable) {
      e.verdict = Verdict::inapplicable;
      e.notes = missing;
    }
    r.entries.push_back(std::move(e));
  };
  if (in.tau && in.delta_h) {
    push(audit_main(*in.tau, *in.delta_h), true, true);
    if (in.n_outcomes) push(audit_n_outcomes(*in.tau, *in.delta_h, *in.n_outcomes), true, true);
    if (in.p_error) push(audit_error_tolerant(*in.tau, *in.delta_h, *in.p_error), true, false);
  }
  if (in.tau) {
    for (const auto& w : in.widths) {
      AuditEntry e = audit_width(*in.tau, w.width, w.alpha);
      e.name = "width(alpha=" + std::to_string(w.alpha) + ")";
      if (e.notes == kWidthCorollaryNote && in.condition1 && in.perfect) r.notes.emplace_back(kWidthCorollaryNote);
      push(std::move(e), true, true);
    }
    if (in.v_norm)
      for (auto& e : audit_interaction(*in.tau, *in.v_norm, in.n_outcomes.value_or(2))) push(std::move(e), false, true);
    if (in.delta_h_box && in.eps) push(audit_lattice(*in.tau, *in.delta_h_box, *in.eps), false, false);
  }
  if (r.entries.empty()) throw ArgumentError("no applicable quantities for any theorem");
  return r;
}

SpacetimeReport spacetime_heuristic(double radius, double tau, double G, double c, double hbar) {
  if (!(radius > 0.0 && tau > 0.0 && G > 0.0 && c > 0.0 && hbar > 0.0))
    throw ArgumentError("spacetime heuristic inputs must be positive");
  SpacetimeReport s{radius, tau, G, c, hbar, 0.0, {}, {}, {}, {}, {}};
  const double c2 = c * c, c4 = c2 * c2;
  s.mass_min = kPi * hbar / (4.0 * c2 * tau);
  auto entry = [](const char* name, double lhs, double rhs) {
    AuditEntry e;
    e.name = name;
    e.lhs = lhs;
    e.rhs = rhs;
    e.margin = lhs - rhs;
    e.verdict = e.margin >= -kVerdictSlack * std::abs(rhs) ? Verdict::holds : Verdict::fails;
    return e;
  };
  s.energy = entry("energy", s.mass_min * c2 * tau, kPi * hbar / 4.0);
  s.schwarzschild = entry("schwarzschild", radius + c * tau, 2.0 * G * s.mass_min / c2);
  s.combined = entry("combined", tau * (radius + c * tau) * c4 / (2.0 * G), kPi * hbar / 4.0);
  s.small_tau = entry("small_tau", tau * radius, kPi * hbar * G / (2.0 * c4));
  for (const AuditEntry* e : {&s.schwarzschild, &s.combined, &s.small_tau})
    if (e->margin <= kVerdictSlack * std::abs(e->rhs)) s.binding.push_back(e->name);
  return s;
}

}  // namespace qmeas
