#pragma once

// Theorem inequalities evaluated on measured quantities. Every entry is oriented so that
// margin >= 0 means the inequality holds. hbar = 1 unless a report states otherwise.

#include <optional>
#include <string>
#include <vector>

namespace qmeas {

enum class Verdict { holds, fails, vacuous, inapplicable };

const char* to_string(Verdict v);

struct AuditEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  Verdict verdict = Verdict::inapplicable;
  std::string notes;
};

/// Absolute slack below which a margin still counts as holding (threshold cases).
inline constexpr double kVerdictSlack = 1e-12;

/// cos x on [0, pi/2], 0 beyond (bound vacuous there).
double clamped_cos(double x);

/// tau * dH >= pi/4.
AuditEntry audit_main(double tau, double delta_h);
/// cos(tau dH) <= 1/sqrt N; n_outcomes = 0 stands for infinitely many (threshold pi/2).
AuditEntry audit_n_outcomes(double tau, double delta_h, int n_outcomes);
/// tau * width_alpha >= 2 arccos((1/sqrt2 + 1 - alpha)/alpha), valid for alpha >= (1 + 1/sqrt2)/2.
AuditEntry audit_width(double tau, double width, double alpha);
/// cos(tau dH) <= sqrt((1 + 6 sqrt P_error)/2).
AuditEntry audit_error_tolerant(double tau, double delta_h, double p_error);
/// ||V|| tau >= pi/4 and cos(||V|| tau) <= 1/sqrt N (N = 0: infinitely many, threshold pi/2).
std::vector<AuditEntry> audit_interaction(double tau, double v_norm, int n_outcomes);
/// dH_box tau >= pi/4 - (pi/2) sqrt(2 eps).
AuditEntry audit_lattice(double tau, double delta_h_box, double eps);

/// Smallest alpha for which the width theorem applies.
double width_alpha_min();
/// Note attached to width entries at the threshold alpha.
extern const char* const kWidthCorollaryNote;

struct WidthSample {
  double alpha;
  double width;
};

/// Everything an audit can consume. Absent quantities skip the corresponding theorems.
struct AuditInputs {
  std::string model = "external";
  std::optional<double> tau, delta_h, v_norm, p_error, eps, delta_h_box;
  std::optional<int> n_outcomes;  // 0 = infinitely many
  std::vector<WidthSample> widths;
  /// Hypotheses of the theorems. Entries whose hypotheses fail are reported as inapplicable.
  bool condition1 = true;
  bool perfect = true;
};

/// P_error at or below this counts as a perfect measurement.
inline constexpr double kPerfectMeasurement = 1e-9;

struct AuditReport {
  AuditInputs inputs;
  std::vector<AuditEntry> entries;
  std::vector<std::string> notes;

  /// Smallest margin over entries that hold or fail (vacuous and inapplicable entries excluded).
  double min_margin() const;
  bool all_hold() const;
};

/// Runs every theorem whose inputs are present. Throws ArgumentError when none is.
AuditReport evaluate_audit(const AuditInputs& in);

struct SpacetimeReport {
  double radius, tau, G, c, hbar;
  double mass_min;            // pi hbar / (4 c^2 tau)
  AuditEntry energy;          // M c^2 tau >= pi hbar / 4, at M = mass_min (saturated by definition)
  AuditEntry schwarzschild;   // R + c tau >= 2 G M / c^2
  AuditEntry combined;        // tau (R + c tau) c^4 / (2G) >= pi hbar / 4
  AuditEntry small_tau;       // tau R >= pi hbar G / (2 c^4)
  std::vector<std::string> binding;
};

/// Pure arithmetic; all inputs must be positive.
SpacetimeReport spacetime_heuristic(double radius, double tau, double G, double c, double hbar);

/// CODATA values in SI units.
inline constexpr double kSiG = 6.67430e-11;
inline constexpr double kSiC = 299792458.0;
inline constexpr double kSiHbar = 1.054571817e-34;

}  // namespace qmeas
