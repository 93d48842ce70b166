#include "qmeas/app.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qmeas/bounds.hpp"
#include "qmeas/lattice.hpp"
#include "qmeas/measure.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/parallel.hpp"

namespace qmeas {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<std::string, std::set<std::string>>& model_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"stern_gerlach", {"delta", "Delta", "eps", "safety", "g_integral", "scale", "nx", "nz", "t_max"}},
      {"chiral", {"delta_g", "delta_phi", "phase", "n", "t_max"}},
      {"standard", {"width", "tau", "n"}},
      {"gaussian", {"m", "k", "sigma", "offset", "lead", "coupling", "v_lo", "v_hi", "v_height", "n"}},
      {"cnot", {"lambda", "tau"}},
      {"free", {"tau"}},
      {"random", {"d_s", "d_a", "tau"}},
      {"spacetime", {"radius", "tau"}},
  };
  return keys;
}

const std::set<std::string> kTopKeys = {"units", "experiment", "seed", "title"};
const std::set<std::string> kProtocolKeys = {"tau",     "p_samples", "p_horizon", "alphas",          "window",
                                             "samples", "horizon",   "switch_off", "split_step", "split_tolerance",
                                             "conjugate_n"};
const std::set<std::string> kChainKeys = {"length", "J", "t", "seed", "samples", "radius", "tau", "observable"};

std::string experiment_of(const Config& cfg) {
  if (!cfg.has("", "experiment")) throw ConfigError("missing top-level key 'experiment'");
  const std::string e = cfg.get_string("", "experiment", "");
  if (!model_keys().count(e)) throw ConfigError("unknown experiment '" + e + "'", cfg.line_of("", "experiment"));
  return e;
}

void check_config(const Config& cfg, const std::string& experiment) {
  cfg.require_known_keys("", kTopKeys);
  cfg.require_known_sections({experiment, "protocol"});
  cfg.require_known_keys(experiment, model_keys().at(experiment));
  cfg.require_known_keys("protocol", kProtocolKeys);
  const std::string units = cfg.get_string("", "units", "natural");
  if (units != "natural" && !(units == "si" && experiment == "spacetime"))
    throw ConfigError("units must be 'natural'" + std::string(experiment == "spacetime" ? " or 'si'" : ""),
                      cfg.line_of("", "units"));
}

std::uint64_t seed_of(const Config& cfg, const GlobalOptions& opt, const std::string& section = "") {
  if (opt.seed) return *opt.seed;
  return cfg.get_u64(section, "seed", 1);
}

int grid_size(const Config& cfg, const GlobalOptions& opt, const std::string& sec, const std::string& key, int fallback) {
  if (opt.grid_n) return *opt.grid_n;
  return cfg.get_int(sec, key, fallback);
}

Eigen::Matrix2cd pauli_by_name(const std::string& name, int line) {
  if (name == "x") return pauli_x();
  if (name == "y") return pauli_y();
  if (name == "z") return pauli_z();
  throw ConfigError("coupling must be one of x, y, z", line);
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

json header(const Config& cfg, const std::string& command) {
  return {{"command", command}, {"version", library_version()}, {"config_hash", fnv1a_hex(cfg.canonical())}};
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

std::vector<WidthSample> apparatus_widths(const MeasurementModel& m, const std::vector<double>& alphas) {
  std::vector<WidthSample> out;
  if (const auto* fm = dynamic_cast<const FiniteModel*>(&m)) {
    const auto dist = spectral_distribution(fm->h_a(), fm->sigma0());
    for (double a : alphas) out.push_back({a, overall_width(dist, a)});
    return out;
  }
  if (const auto hist = m.apparatus_spectrum())
    for (double a : alphas) out.push_back({a, overall_width(*hist, a)});
  return out;
}

// L2 distance between split-step propagation and the exact rule for branch a at time t.
double split_step_deviation(const GridModel& m, int a, double t, double dt) {
  WaveFunction diff = m.split_step_branch(a, t, dt);
  const WaveFunction exact = m.evolve_wave(a, t);
  for (int l = 0; l < diff.legs(); ++l) diff.leg(l) -= exact.leg(l);
  return std::sqrt(diff.norm_squared());
}

double default_window(const MeasurementModel& m, double tau) {
  if (const auto* g = dynamic_cast<const GaussianModel*>(&m)) return g->params().lead;
  if (dynamic_cast<const SternGerlach2D*>(&m)) return 0.5 * tau;
  return tau;
}

struct ModelSummary {
  double tau = 0.0;
  double delta_h = 0.0;
  std::optional<double> p_error;
};

// tau, dH_A and (when a meter exists) P_error: the per-point quantities of a sweep.
ModelSummary summarize(const MeasurementModel& m, const Config& cfg) {
  ModelSummary s;
  s.tau = cfg.get_double("protocol", "tau", m.tau());
  s.delta_h = m.apparatus_energy_fluctuation();
  if (m.outcome_count() > 0 && !m.pvm().empty()) s.p_error = worst_case_error(m, s.tau).value;
  return s;
}

}  // namespace

std::unique_ptr<MeasurementModel> build_model(const Config& cfg, const GlobalOptions& opt) {
  const std::string e = experiment_of(cfg);
  check_config(cfg, e);
  std::unique_ptr<MeasurementModel> m;
  if (e == "stern_gerlach") {
    SternGerlach2D::Params p;
    p.delta = cfg.get_double(e, "delta", p.delta);
    p.Delta = cfg.get_double(e, "Delta", p.Delta);
    p.eps = cfg.get_double(e, "eps", p.eps);
    p.safety = cfg.get_double(e, "safety", p.safety);
    p.g_integral = cfg.get_double(e, "g_integral", p.g_integral);
    p.scale = cfg.get_double(e, "scale", p.scale);
    p.nx = grid_size(cfg, opt, e, "nx", p.nx);
    p.nz = grid_size(cfg, opt, e, "nz", p.nz);
    p.t_max = cfg.get_double(e, "t_max", p.t_max);
    m = std::make_unique<SternGerlach2D>(p);
  } else if (e == "chiral") {
    ChiralModel::Params p;
    p.delta_g = cfg.get_double(e, "delta_g", p.delta_g);
    p.delta_phi = cfg.get_double(e, "delta_phi", p.delta_phi);
    p.phase = cfg.get_double(e, "phase", p.phase);
    p.n = grid_size(cfg, opt, e, "n", p.n);
    p.t_max = cfg.get_double(e, "t_max", p.t_max);
    m = std::make_unique<ChiralModel>(p);
  } else if (e == "standard") {
    const double w = cfg.get_double(e, "width", 0.5), tau = cfg.get_double(e, "tau", 2.0);
    m = std::make_unique<StandardModel>(w, tau, StandardModel::default_grid(w, tau, grid_size(cfg, opt, e, "n", 1024)));
  } else if (e == "gaussian") {
    GaussianPacketParams p;
    p.m = cfg.get_double(e, "m", p.m);
    p.k = cfg.get_double(e, "k", p.k);
    p.sigma = cfg.get_double(e, "sigma", p.sigma);
    p.delta = cfg.get_double(e, "offset", p.delta);
    p.lead = cfg.get_double(e, "lead", p.lead);
    const Eigen::Matrix2cd b = pauli_by_name(cfg.get_string(e, "coupling", "z"), cfg.line_of(e, "coupling"));
    const double lo = cfg.get_double(e, "v_lo", 0.5), hi = cfg.get_double(e, "v_hi", 1.5);
    if (!(hi > lo)) throw ConfigurationError("v_hi must exceed v_lo");
    m = std::make_unique<GaussianModel>(p, b, Bump(lo, hi, cfg.get_double(e, "v_height", 1.0)),
                                        opt.grid_n ? *opt.grid_n : cfg.get_int(e, "n", 0));
  } else if (e == "cnot") {
    m = std::make_unique<FiniteModel>(cnot_model(cfg.get_double(e, "lambda", 1.0), cfg.get_double(e, "tau", kPi / 2)));
  } else if (e == "free") {
    m = std::make_unique<FiniteModel>(free_coin_model(cfg.get_double(e, "tau", 1.0)));
  } else if (e == "random") {
    FiniteModel base = random_finite_model(cfg.get_int(e, "d_s", 2), cfg.get_int(e, "d_a", 2), seed_of(cfg, opt));
    m = std::make_unique<FiniteModel>(std::move(base));
  } else {
    throw ConfigError("experiment '" + e + "' has no measurement model");
  }
  if (opt.dt)
    if (auto* g = dynamic_cast<GridModel*>(m.get())) g->set_time_step_cap(*opt.dt);
  return m;
}

std::vector<std::string> sweepable_parameters(const std::string& experiment) {
  static const std::map<std::string, std::vector<std::string>> names = {
      {"stern_gerlach", {"scale", "delta", "Delta", "eps", "safety"}},
      {"chiral", {"delta_g", "delta_phi", "phase"}},
      {"standard", {"width", "tau"}},
      {"gaussian", {"k", "sigma", "offset", "lead", "m"}},
      {"cnot", {"lambda", "tau"}},
      {"free", {"tau"}},
      {"random", {"tau"}},
      {"spacetime", {"radius", "tau"}},
  };
  const auto it = names.find(experiment);
  return it == names.end() ? std::vector<std::string>{} : it->second;
}

// ---------------------------------------------------------------------------------------------

namespace {

Outcome run_spacetime(const Config& cfg) {
  const bool si = cfg.get_string("", "units", "natural") == "si";
  const double radius = cfg.get_double("spacetime", "radius", 1.0), tau = cfg.get_double("spacetime", "tau", 1.0);
  const SpacetimeReport r = si ? spacetime_heuristic(radius, tau, kSiG, kSiC, kSiHbar)
                               : spacetime_heuristic(radius, tau, 1.0, 1.0, 1.0);
  Outcome out;
  json rep = header(cfg, "run");
  rep["experiment"] = "spacetime";
  rep["units"] = si ? "si" : "natural";
  rep["spacetime"] = to_json(r);
  CsvTable csv({"constraint", "lhs", "rhs", "margin"});
  for (const AuditEntry* e : {&r.energy, &r.schwarzschild, &r.combined, &r.small_tau})
    csv.add_row(std::vector<std::string>{e->name, format_number(e->lhs), format_number(e->rhs), format_number(e->margin)});
  out.artifacts.add("report.json", rep.dump(2) + "\n");
  out.artifacts.add("spacetime.csv", csv.str());
  out.summary = "spacetime: tau*R = " + format_number(r.small_tau.lhs) + ", threshold " + format_number(r.small_tau.rhs) +
                (r.binding.empty() ? ", no constraint binds" : ", binding: " + join(r.binding, " "));
  return out;
}

void gaussian_extras(const GaussianModel& g, Outcome& out, json& rep) {
  const auto& p = g.params();
  CsvTable moments({"s", "mean_grid", "mean_closed", "spread_grid", "spread_closed", "mean_rel_err", "spread_rel_err"});
  CsvTable leak({"t", "leakage", "chebyshev"});
  double worst_mean = 0.0, worst_spread = 0.0;
  bool leakage_ok = true;
  for (int i = 0; i <= 20; ++i) {
    const double s = p.lead * i / 20;
    const Moments mo = position_moments(g.packet(s));
    const double spread = mo.std_dev() * std::numbers::sqrt2;
    const double em = std::abs(mo.mean - g.mean_position(s)) / std::abs(g.mean_position(s));
    const double es = std::abs(spread - g.spread(s)) / g.spread(s);
    worst_mean = std::max(worst_mean, em);
    worst_spread = std::max(worst_spread, es);
    moments.add_row({s, mo.mean, g.mean_position(s), spread, g.spread(s), em, es});
    const double l = g.leakage(s), c = g.chebyshev_bound(s);
    leakage_ok = leakage_ok && l <= c;
    leak.add_row({s, l, c});
  }
  if (worst_mean > 1e-6 || worst_spread > 1e-6) out.failures.push_back("Gaussian moments deviate from the closed form");
  if (!leakage_ok) out.failures.push_back("leakage exceeds the Chebyshev bound");
  rep["gaussian"] = {{"max_mean_rel_err", worst_mean},
                     {"max_spread_rel_err", worst_spread},
                     {"leakage_at_t0", g.leakage(p.lead)},
                     {"chebyshev_at_t0", g.chebyshev_bound(p.lead)},
                     {"leakage_within_bound", leakage_ok},
                     {"spread_convention", "spread = sqrt(2) * standard deviation of q"}};
  out.artifacts.add("moments.csv", moments.str());
  out.artifacts.add("leakage.csv", leak.str());
}

}  // namespace

Outcome cmd_run(const Config& cfg, const GlobalOptions& opt) {
  const std::string experiment = experiment_of(cfg);
  check_config(cfg, experiment);
  if (experiment == "spacetime") return run_spacetime(cfg);

  const auto model = build_model(cfg, opt);
  const MeasurementModel& m = *model;
  Outcome out;
  json rep = header(cfg, "run");
  rep["experiment"] = experiment;
  rep["seed"] = seed_of(cfg, opt);

  const double tau = cfg.get_double("protocol", "tau", m.tau());
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  const double window = cfg.get_double("protocol", "window", default_window(m, tau));
  const int samples = cfg.get_int("protocol", "samples", 9);
  const double horizon = cfg.get_double("protocol", "horizon", tau);

  json model_j = {{"id", m.id()},
                  {"tau", m.tau()},
                  {"system_dim", m.system_dim()},
                  {"interaction_norm", number(m.interaction_norm())},
                  {"outcome_count", m.outcome_count()},
                  {"switching_device", m.switching_device()},
                  {"notes", m.notes()}};
  rep["model"] = model_j;

  // Conditions.
  json cond;
  const double c1 = condition1_residual(m, window, samples);
  const double c2 = condition2_strength(m, horizon, samples);
  cond["condition1_residual"] = c1;
  cond["window"] = window;
  cond["samples"] = samples;
  if (const auto by_support = m.condition1_by_support()) cond["condition1_by_support"] = *by_support;
  cond["condition2_strength"] = c2;
  const bool condition1 = m.condition1_by_support().value_or(c1 <= kResidualCertified);
  cond["condition1_holds"] = condition1;
  if (m.switching_device()) {
    const double t1 = cfg.get_double("protocol", "switch_off", m.t0() + m.tau());
    const auto c3 = condition3_check(m, t1, 0.25 * tau, std::max(2, samples / 2));
    cond["condition3"] = {{"t1", t1}, {"holds", c3.holds}, {"residual", c3.residual}};
  }
  rep["conditions"] = cond;

  // Measurement protocol.
  RunOptions ro;
  ro.p_samples = cfg.get_int("protocol", "p_samples", dynamic_cast<const GaussianModel*>(&m) ? 9 : 33);
  ro.p_horizon = cfg.get_double("protocol", "p_horizon", tau);
  const MeasurementRun run = run_protocol(m, tau, ro);
  json run_j = to_json(run);
  const int conj_n = cfg.get_int("protocol", "conjugate_n", 0);
  if (conj_n >= 2) {
    const auto fam = conjugate_family(EvolvedBasis(m, tau), m.system_hamiltonian(), conj_n);
    run_j["conjugate_family"] = {{"n", fam.n},
                                 {"fidelities", fam.fidelities},
                                 {"min_fidelity", fam.min_fidelity},
                                 {"max_pairwise_distance", fam.max_pairwise_distance}};
  }
  rep["run"] = run_j;
  for (const auto& row : run.probabilities) {
    double s = 0.0;
    for (double p : row) s += p;
    if (std::abs(s - 1.0) > 1e-8) out.failures.push_back("outcome probabilities do not sum to 1");
  }

  if (run.has_meter) {
    CsvTable probs({"input", "outcome", "probability"});
    for (std::size_t a = 0; a < run.probabilities.size(); ++a)
      for (std::size_t n = 0; n < run.probabilities[a].size(); ++n)
        probs.add_row({double(a), double(n), run.probabilities[a][n]});
    out.artifacts.add("probabilities.csv", probs.str());
  }

  const double vn = m.interaction_norm();
  CsvTable pcsv({"t", "p", "cos2_bound"});
  std::vector<double> bound;
  for (std::size_t i = 0; i < run.p.times.size(); ++i) {
    const double t = run.p.times[i];
    const double b = std::isfinite(vn) ? std::pow(clamped_cos(vn * t), 2) : std::numeric_limits<double>::quiet_NaN();
    bound.push_back(b);
    pcsv.add_row({t, run.p.p[i], b});
    if (std::isfinite(b) && run.p.p[i] < b - 1e-9) out.failures.push_back("p(t) falls below cos^2(||V|| t)");
  }
  out.artifacts.add("p_curve.csv", pcsv.str());
  PlotSpec plot{"overlap with the freely evolved state", "t - t0", "p(t)", {{"p(t)", run.p.times, run.p.p}}, {}, "", false};
  if (std::isfinite(vn)) plot.series.push_back({"cos^2(|V| t)", run.p.times, bound});
  out.artifacts.add("p_curve.svg", svg_plot(plot));

  // Split-step cross-check against the exact rule.
  const auto* grid_model = dynamic_cast<const GridModel*>(&m);
  const bool has_exact = grid_model && !dynamic_cast<const GaussianModel*>(&m);
  if (has_exact && cfg.get_bool("protocol", "split_step", !dynamic_cast<const SternGerlach2D*>(&m))) {
    const double tol = cfg.get_double("protocol", "split_tolerance", 1e-6);
    const double dt = grid_model->time_step();
    double dev = 0.0;
    json checks = json::array();
    for (double t : {0.5 * tau, tau, 2.0 * tau}) {
      if (m.t0() + t > grid_model->horizon()) continue;
      double d = 0.0;
      for (int a = 0; a < 2; ++a) d = std::max(d, split_step_deviation(*grid_model, a, m.t0() + t, dt));
      checks.push_back({{"t", t}, {"norm_deviation", d}});
      dev = std::max(dev, d);
    }
    rep["split_step"] = {{"dt", dt}, {"checks", checks}, {"max_norm_deviation", dev}, {"tolerance", tol}};
    if (dev > tol) out.failures.push_back("split-step deviates from the exact rule by " + format_number(dev));
  }

  if (const auto* g = dynamic_cast<const GaussianModel*>(&m)) gaussian_extras(*g, out, rep);

  // Energy and audit.
  const std::vector<double> alphas =
      cfg.get_list("protocol", "alphas", {width_alpha_min(), 0.95, 1.0});
  AuditInputs in;
  in.model = m.id();
  in.tau = tau;
  in.delta_h = m.apparatus_energy_fluctuation();
  in.widths = apparatus_widths(m, alphas);
  in.v_norm = vn;
  if (m.outcome_count() >= 2) in.n_outcomes = m.outcome_count();
  if (run.has_meter) in.p_error = run.error.value;
  in.condition1 = condition1;
  in.perfect = run.has_meter && run.error.value <= kPerfectMeasurement;
  AuditReport audit = evaluate_audit(in);
  for (const auto& note : m.notes()) audit.notes.push_back(note);
  rep["energy"] = {{"delta_h_a", in.delta_h.value()}};
  rep["audit"] = to_json(audit);
  for (const auto& e : audit.entries)
    if (e.verdict == Verdict::fails && e.margin < -1e-9)
      out.failures.push_back("theorem '" + e.name + "' fails with margin " + format_number(e.margin));

  rep["failures"] = out.failures;
  out.artifacts.add("report.json", rep.dump(2) + "\n");

  std::ostringstream s;
  s << m.id() << ": tau = " << tau << ", dH_A = " << in.delta_h.value() << ", tau*dH_A = " << tau * in.delta_h.value();
  if (run.has_meter) s << ", P_error = " << run.error.value;
  s << ", condition 1 " << (condition1 ? "holds" : "fails") << ", min margin " << audit.min_margin();
  out.summary = s.str();
  return out;
}

Outcome cmd_sweep(const Config& cfg, const std::string& parameter, const std::vector<double>& values,
                  const GlobalOptions& opt) {
  const std::string experiment = experiment_of(cfg);
  check_config(cfg, experiment);
  const auto names = sweepable_parameters(experiment);
  if (std::find(names.begin(), names.end(), parameter) == names.end())
    throw ConfigError("parameter '" + parameter + "' is not sweepable for " + experiment + " (sweepable: " +
                      join(names, ", ") + ")");
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  struct Point {
    ModelSummary s;
    double leakage = std::numeric_limits<double>::quiet_NaN();
    double small_tau_margin = std::numeric_limits<double>::quiet_NaN();
  };
  const auto points = parallel_map<Point>(values.size(), [&](std::size_t i) {
    Config c = cfg;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    c.set(experiment, parameter, buf);
    Point p;
    if (experiment == "spacetime") {
      const bool si = c.get_string("", "units", "natural") == "si";
      const double radius = c.get_double("spacetime", "radius", 1.0), tau = c.get_double("spacetime", "tau", 1.0);
      const auto r = si ? spacetime_heuristic(radius, tau, kSiG, kSiC, kSiHbar) : spacetime_heuristic(radius, tau, 1, 1, 1);
      p.s.tau = tau;
      p.small_tau_margin = r.small_tau.margin;
      return p;
    }
    const auto model = build_model(c, opt);
    p.s = summarize(*model, c);
    if (const auto* g = dynamic_cast<const GaussianModel*>(model.get())) p.leakage = g->leakage(g->params().lead);
    return p;
  });

  Outcome out;
  CsvTable csv({parameter, "tau", "delta_h_a", "product", "margin_main", "p_error", "leakage_t0", "small_tau_margin"});
  Series product{"tau * dH_A", {}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& p = points[i];
    const double prod = p.s.tau * p.s.delta_h;
    csv.add_row({values[i], p.s.tau, p.s.delta_h, prod, prod - kPi / 4,
                 p.s.p_error.value_or(std::numeric_limits<double>::quiet_NaN()), p.leakage, p.small_tau_margin});
    product.x.push_back(values[i]);
    product.y.push_back(prod);
  }
  out.artifacts.add("sweep.csv", csv.str());
  out.artifacts.add("sweep.svg", svg_plot({"energy-time product along the sweep", parameter, "tau * dH_A", {product},
                                           kPi / 4, "pi/4", false}));
  json rep = header(cfg, "sweep");
  rep["experiment"] = experiment;
  rep["parameter"] = parameter;
  rep["values"] = values;
  out.artifacts.add("sweep.json", rep.dump(2) + "\n");
  out.summary = "sweep over " + parameter + ": " + std::to_string(values.size()) + " points";
  return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

const std::set<std::string> kAuditColumns = {"tau", "delta_h", "alpha", "width", "v_norm", "n_outcomes",
                                             "p_error", "eps", "delta_h_box"};

AuditInputs inputs_from_cells(const std::map<std::string, std::string>& cells, int line) {
  AuditInputs in;
  auto num = [&](const std::string& key) -> std::optional<double> {
    const auto it = cells.find(key);
    if (it == cells.end() || it->second.empty()) return std::nullopt;
    if (it->second == "inf") return std::numeric_limits<double>::infinity();
    return parse_double(it->second, line);
  };
  in.tau = num("tau");
  in.delta_h = num("delta_h");
  in.v_norm = num("v_norm");
  in.p_error = num("p_error");
  in.eps = num("eps");
  in.delta_h_box = num("delta_h_box");
  if (const auto n = num("n_outcomes")) in.n_outcomes = std::isinf(*n) ? 0 : static_cast<int>(*n);
  const auto a = num("alpha"), w = num("width");
  if (a && w) in.widths.push_back({*a, *w});
  return in;
}

std::vector<std::pair<AuditInputs, int>> parse_audit_values(const std::string& text) {
  std::vector<std::pair<AuditInputs, int>> rows;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("audit input is empty");
  if (text[first] == '[' || text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object()) j = json::array({j});
    int idx = 0;
    for (const auto& obj : j) {
      ++idx;
      if (!obj.is_object()) throw ConfigError("audit JSON must be an array of objects", idx);
      std::map<std::string, std::string> cells;
      for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!kAuditColumns.count(it.key())) throw ConfigError("unknown audit column '" + it.key() + "'", idx);
        if (it->is_number()) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", it->get<double>());
          cells[it.key()] = buf;
        } else if (it->is_string()) {
          cells[it.key()] = it->get<std::string>();
        } else if (!it->is_null()) {
          throw ConfigError("audit value '" + it.key() + "' must be a number", idx);
        }
      }
      rows.emplace_back(inputs_from_cells(cells, idx), idx);
    }
    return rows;
  }
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      for (const auto& h : cells)
        if (!kAuditColumns.count(h)) throw ConfigError("unknown audit column '" + h + "'", ln);
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw ConfigError("row has " + std::to_string(cells.size()) + " cells, header has " +
                                                         std::to_string(header.size()), ln);
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < cells.size(); ++i) m[header[i]] = cells[i];
    rows.emplace_back(inputs_from_cells(m, ln), ln);
  }
  if (rows.empty()) throw ConfigError("audit input has no data rows");
  return rows;
}

}  // namespace

Outcome cmd_audit(const std::string& text, const GlobalOptions&) {
  const auto rows = parse_audit_values(text);
  Outcome out;
  CsvTable csv({"row", "entry", "lhs", "rhs", "margin", "verdict"});
  json reports = json::array();
  int holds = 0, fails = 0, ordinal = 0;
  for (const auto& [in, line] : rows) {
    ++ordinal;
    AuditReport r;
    try {
      r = evaluate_audit(in);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what(), line);
    }
    json j = to_json(r);
    j["row"] = ordinal;
    reports.push_back(j);
    for (const auto& e : r.entries) {
      csv.add_row(std::vector<std::string>{std::to_string(ordinal), e.name, format_number(e.lhs), format_number(e.rhs),
                                           format_number(e.margin), to_string(e.verdict)});
      holds += e.verdict == Verdict::holds;
      fails += e.verdict == Verdict::fails;
    }
  }
  json rep = {{"command", "audit"}, {"version", library_version()}, {"input_hash", fnv1a_hex(text)}, {"rows", reports}};
  out.artifacts.add("audit.csv", csv.str());
  out.artifacts.add("audit.json", rep.dump(2) + "\n");
  out.summary = "audit: " + std::to_string(rows.size()) + " rows, " + std::to_string(holds) + " entries hold, " +
                std::to_string(fails) + " fail";
  return out;
}

Outcome cmd_probe(const ProbeOptions& probe, const GlobalOptions& opt) {
  ProbeOptions p = probe;
  if (opt.seed) p.seed = *opt.seed;
  const ProbeReport r = nogo_probe(p);
  Outcome out;
  CsvTable csv({"trial", "source", "stationary", "null_dimension", "residual", "strength", "certified", "verdict"});
  auto row = [&](const ProbeRecord& rec) {
    csv.add_row(std::vector<std::string>{std::to_string(rec.trial), rec.source, rec.stationary ? "1" : "0",
                                         std::to_string(rec.null_dimension), format_number(rec.residual),
                                         format_number(rec.strength), rec.certified ? "1" : "0", rec.verdict});
  };
  for (const auto& rec : r.records) row(rec);
  row(r.chiral_row);
  json rep = to_json(r);
  rep["command"] = "probe";
  rep["version"] = library_version();
  out.artifacts.add("probe.csv", csv.str());
  out.artifacts.add("probe.json", rep.dump(2) + "\n");
  if (r.counterexamples > 0) out.failures.push_back(std::to_string(r.counterexamples) + " certified counterexamples");
  out.summary = "probe: " + std::to_string(r.records.size()) + " trials, " + std::to_string(r.counterexamples) +
                " counterexamples; chiral-64 row: " + r.chiral_row.verdict;
  return out;
}

Outcome cmd_chain(const Config& cfg, const GlobalOptions& opt) {
  cfg.require_known_keys("", {"units", "experiment", "seed", "title"});
  cfg.require_known_sections({"chain"});
  cfg.require_known_keys("chain", kChainKeys);
  const int length = cfg.get_int("chain", "length", 8);
  const double j_bound = cfg.get_double("chain", "J", 1.0);
  const double t = cfg.get_double("chain", "t", 1.0);
  const double tau = cfg.get_double("chain", "tau", 1.0);
  const int samples = cfg.get_int("chain", "samples", 50);
  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.get_u64("chain", "seed", 1);
  const std::string obs = cfg.get_string("chain", "observable", "z");
  const Eigen::MatrixXcd a = pauli_by_name(obs, cfg.line_of("chain", "observable"));
  const ChainSpec chain = random_chain(length, j_bound, seed);
  const int radius = cfg.get_int("chain", "radius", std::min(3, length - 1));
  if (radius < 0 || radius >= length) throw ConfigError("radius must lie in [0, length)", cfg.line_of("chain", "radius"));
  if (samples < 1) throw ConfigError("samples must be positive", cfg.line_of("chain", "samples"));

  Outcome out;
  const std::vector<double> errors = locality_sweep(chain, a, t);
  const double v_lr = 4.0 * j_bound;
  CsvTable loc({"radius", "locality_error", "nominal_lr_radius"});
  bool monotone = true;
  for (int r = 0; r < length; ++r) {
    loc.add_row({double(r), errors[static_cast<std::size_t>(r)], v_lr * t});
    if (r > 0 && errors[static_cast<std::size_t>(r)] > errors[static_cast<std::size_t>(r - 1)] + 1e-9) monotone = false;
  }
  if (errors.back() > 1e-10) out.failures.push_back("locality error of the full-chain box is not zero");

  // Additivity of box Hamiltonians across the middle bond.
  const int mid = length / 2 - 1;
  double additivity = 0.0;
  if (length >= 2) {
    const Eigen::MatrixXcd lhs = box_hamiltonian(chain, {0, mid}) + box_hamiltonian(chain, {mid + 1, length - 1}) + bond_term(chain, mid);
    additivity = (lhs - box_hamiltonian(chain, {0, length - 1})).cwiseAbs().maxCoeff();
  }
  if (additivity > 1e-12) out.failures.push_back("box Hamiltonian additivity broken");

  // Box energy fluctuations of random product states, median per box size.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::vector<Eigen::VectorXcd>> states;
  for (int s = 0; s < samples; ++s) {
    std::vector<Eigen::VectorXcd> sites;
    for (int x = 0; x < length; ++x) sites.push_back(random_pure(2, rng));
    states.push_back(sites);
  }
  CsvTable fl({"box_size", "median_delta_h"});
  std::vector<double> medians;
  for (int r = 0; r < length; ++r) {
    std::vector<double> v;
    for (const auto& st : states) v.push_back(box_energy_fluctuation(chain, {0, r}, st));
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    medians.push_back(v[v.size() / 2]);
    fl.add_row({double(r + 1), medians.back()});
  }

  const RasteginResult rast = rastegin_check(1000, 4, seed);
  if (!rast.passed()) out.failures.push_back("Bures-angle triangle inequality violated");

  const double eps = std::min(1.0, errors[static_cast<std::size_t>(radius)]);
  const AuditEntry lat = audit_lattice(tau, medians[static_cast<std::size_t>(radius)], eps);

  json rep = header(cfg, "chain");
  rep["chain"] = {{"length", length}, {"J", j_bound}, {"t", t}, {"seed", seed}, {"observable", obs}};
  rep["locality"] = {{"errors", errors}, {"nonincreasing", monotone}, {"nominal_lr_velocity", v_lr},
                     {"note", "monotonicity is an empirical finite-size trend, not a proven property"}};
  rep["additivity_residual"] = additivity;
  rep["box_fluctuation_medians"] = medians;
  rep["rastegin"] = {{"trials", rast.trials}, {"min_slack", rast.min_slack}, {"failures", rast.failures}};
  rep["audit_lattice"] = to_json(lat);
  rep["audit_lattice_inputs"] = {{"tau", tau}, {"radius", radius}, {"eps", eps}, {"delta_h_box", medians[static_cast<std::size_t>(radius)]}};
  rep["scope"] = "ingredients only: no measurement model is coupled to the chain";
  rep["failures"] = out.failures;
  out.artifacts.add("locality.csv", loc.str());
  out.artifacts.add("fluctuation.csv", fl.str());
  out.artifacts.add("locality.svg", svg_plot({"box locality error", "box radius", "log10 error",
                                              {{"error", [&] {
                                                  std::vector<double> x;
                                                  for (int r = 0; r < length; ++r) x.push_back(r);
                                                  return x;
                                                }(),
                                                errors}},
                                              {}, "", true}));
  out.artifacts.add("report.json", rep.dump(2) + "\n");
  out.summary = "chain: L = " + std::to_string(length) + ", locality error at radius " + std::to_string(radius) + " = " +
                format_number(eps) + ", lattice bound " + to_string(lat.verdict);
  return out;
}

// ---------------------------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const ProtocolError*>(&e) || dynamic_cast<const UnsupportedModelError*>(&e))
    return kExitConfig;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const CapacityError*>(&e)) return kExitValidation;
  return kExitConfig;
}

int execute(const std::function<Outcome()>& command, const GlobalOptions& opt) {
  try {
    const Outcome out = command();
    out.artifacts.write_all(opt.out);
    if (!opt.quiet) {
      std::cout << out.summary << "\n";
      for (const auto& [name, _] : out.artifacts.items()) std::cout << "  wrote " << opt.out << "/" << name << "\n";
    }
    for (const auto& f : out.failures) std::cerr << "tolerance failure: " << f << "\n";
    return out.failures.empty() ? kExitOk : kExitNumerical;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* kind = code == kExitConfig ? "config error" : code == kExitValidation ? "validation error" : "numerical error";
    std::cerr << kind << ": " << e.what() << "\n";
    return code;
  }
}

}  // namespace qmeas
