#include "qmeas/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#ifndef QMEAS_VERSION
#define QMEAS_VERSION "0.0.0"
#endif

namespace qmeas {

namespace fs = std::filesystem;
using nlohmann::json;

std::string library_version() { return QMEAS_VERSION; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw ArgumentError("CSV row does not match the header");
  rows_.push_back(cells);
}

std::string CsvTable::str() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
  };
  std::string out = line(header_);
  for (const auto& r : rows_) out += line(r);
  return out;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::string svg_plot(const PlotSpec& p) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  auto ty = [&](double y) { return p.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (p.reference) {
    y0 = std::min(y0, ty(*p.reference));
    y1 = std::max(y1, ty(*p.reference));
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y1))) {
    const double pad = std::max(1e-9, 0.05 * std::abs(y1));
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  s += "<!-- data\n";
  for (const auto& ser : p.series) {
    s += "series " + escape_xml(ser.label) + "\n";
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
      s += format_number(ser.x[i]) + "," + format_number(ser.y[i]) + "\n";
  }
  if (p.reference) s += "reference " + format_number(*p.reference) + "\n";
  s += "-->\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       escape_xml(p.title) + "</text>\n";
  s += "<line x1=\"" + fmt("%.2f", L) + "\" y1=\"" + fmt("%.2f", H - B) + "\" x2=\"" + fmt("%.2f", W - R) + "\" y2=\"" +
       fmt("%.2f", H - B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt("%.2f", L) + "\" y1=\"" + fmt("%.2f", T) + "\" x2=\"" + fmt("%.2f", L) + "\" y2=\"" +
       fmt("%.2f", H - B) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    const double xp = L + (W - L - R) * k / 4, yp = H - B - (H - T - B) * k / 4;
    s += "<text x=\"" + fmt("%.2f", xp) + "\" y=\"" + fmt("%.2f", H - B + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.3g", xv) + "</text>\n";
    s += "<text x=\"" + fmt("%.2f", L - 6) + "\" y=\"" + fmt("%.2f", yp + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         (p.log_y ? "1e" + fmt("%.2g", yv) : fmt("%.4g", yv)) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.2f", (L + W - R) / 2) + "\" y=\"" + fmt("%.2f", H - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape_xml(p.x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.2f", (T + H - B) / 2) + "\" transform=\"rotate(-90 16 " +
       fmt("%.2f", (T + H - B) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
       escape_xml(p.y_label) + "</text>\n";
  if (p.reference) {
    const double yr = py(*p.reference);
    s += "<line x1=\"" + fmt("%.2f", L) + "\" y1=\"" + fmt("%.2f", yr) + "\" x2=\"" + fmt("%.2f", W - R) + "\" y2=\"" +
         fmt("%.2f", yr) + "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    s += "<text x=\"" + fmt("%.2f", W - R - 4) + "\" y=\"" + fmt("%.2f", yr - 5) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"gray\">" +
         escape_xml(p.reference_label) + "</text>\n";
  }
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& ser = p.series[k];
    const char* color = kColors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      pts += fmt("%.2f", px(ser.x[i])) + "," + fmt("%.2f", py(ser.y[i])) + " ";
      s += "<circle cx=\"" + fmt("%.2f", px(ser.x[i])) + "\" cy=\"" + fmt("%.2f", py(ser.y[i])) + "\" r=\"3\" fill=\"" +
           color + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + fmt("%.2f", L + 10) + "\" y=\"" + fmt("%.2f", T + 14 + 14.0 * k) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + escape_xml(ser.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const AuditEntry& e) {
  return {{"name", e.name},     {"lhs", number(e.lhs)},          {"rhs", number(e.rhs)},
          {"margin", number(e.margin)}, {"verdict", to_string(e.verdict)}, {"notes", e.notes}};
}

json to_json(const AuditReport& r) {
  json in = json::object();
  in["model"] = r.inputs.model;
  if (r.inputs.tau) in["tau"] = number(*r.inputs.tau);
  if (r.inputs.delta_h) in["delta_h"] = number(*r.inputs.delta_h);
  if (r.inputs.v_norm) in["v_norm"] = number(*r.inputs.v_norm);
  if (r.inputs.p_error) in["p_error"] = number(*r.inputs.p_error);
  if (r.inputs.eps) in["eps"] = number(*r.inputs.eps);
  if (r.inputs.delta_h_box) in["delta_h_box"] = number(*r.inputs.delta_h_box);
  if (r.inputs.n_outcomes) in["n_outcomes"] = *r.inputs.n_outcomes;
  json widths = json::array();
  for (const auto& w : r.inputs.widths) widths.push_back({{"alpha", w.alpha}, {"width", number(w.width)}});
  in["widths"] = widths;
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return {{"inputs", in}, {"entries", entries}, {"notes", r.notes}, {"all_hold", r.all_hold()}};
}

json to_json(const ProbeRecord& r) {
  return {{"trial", r.trial},          {"source", r.source},           {"stationary", r.stationary},
          {"null_dimension", r.null_dimension}, {"residual", number(r.residual)}, {"strength", number(r.strength)},
          {"certified", r.certified},  {"verdict", r.verdict}};
}

json to_json(const ProbeReport& r) {
  json records = json::array();
  for (const auto& rec : r.records) records.push_back(to_json(rec));
  return {{"d_s", r.options.d_s},
          {"d_a", r.options.d_a},
          {"trials", r.options.trials},
          {"seed", r.options.seed},
          {"window", r.options.window},
          {"samples", r.options.samples},
          {"horizon", r.options.horizon},
          {"records", records},
          {"chiral_row", to_json(r.chiral_row)},
          {"counterexamples", r.counterexamples}};
}

json to_json(const MeasurementRun& r) {
  json j;
  j["model"] = r.model;
  j["tau"] = r.tau;
  j["has_meter"] = r.has_meter;
  if (r.has_meter) {
    j["probabilities"] = r.probabilities;
    j["p_error"] = {{"value", r.error.value}, {"outcome", r.error.outcome}, {"exact", r.error.exact}};
  }
  j["disturbance"] = {{"f_plus", r.disturbance.f_plus}, {"f_minus", r.disturbance.f_minus}, {"f_pm", r.disturbance.f_pm}};
  return j;
}

json to_json(const SpacetimeReport& s) {
  return {{"radius", s.radius}, {"tau", s.tau}, {"G", s.G}, {"c", s.c}, {"hbar", s.hbar},
          {"mass_min", s.mass_min}, {"energy", to_json(s.energy)}, {"schwarzschild", to_json(s.schwarzschild)},
          {"combined", to_json(s.combined)}, {"small_tau", to_json(s.small_tau)}, {"binding", s.binding}};
}

void Artifacts::add(std::string name, std::string content) {
  if (name.empty() || name.find('/') != std::string::npos) throw ArgumentError("artifact names must be plain file names");
  for (const auto& [n, _] : items_)
    if (n == name) throw ArgumentError("duplicate artifact " + name);
  items_.emplace_back(std::move(name), std::move(content));
}

void Artifacts::write_all(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<fs::path> temps, done;
  auto cleanup = [&] {
    for (const auto& p : temps) fs::remove(p, ec);
    for (const auto& p : done) fs::remove(p, ec);
  };
  for (const auto& [name, content] : items_) {
    const fs::path tmp = fs::path(dir) / ("." + name + ".partial");
    std::ofstream f(tmp, std::ios::binary);
    temps.push_back(tmp);
    f << content;
    f.close();
    if (!f) {
      cleanup();
      throw Error("cannot write artifact " + name);
    }
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const fs::path target = fs::path(dir) / items_[i].first;
    fs::rename(temps[i], target, ec);
    if (ec) {
      cleanup();
      throw Error("cannot place artifact " + items_[i].first + ": " + ec.message());
    }
    done.push_back(target);
  }
}

}  // namespace qmeas
