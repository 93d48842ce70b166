#pragma once

// Report serialization: JSON, fixed-format CSV, static SVG plots, and an artifact bundle that is
// written only once every artifact has been produced.

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmeas/bounds.hpp"
#include "qmeas/conditions.hpp"
#include "qmeas/measure.hpp"

namespace qmeas {

std::string library_version();

/// "%.12e", or nan / inf / -inf.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  std::vector<Series> series;
  std::optional<double> reference;  // horizontal reference line
  std::string reference_label;
  bool log_y = false;
};

/// Static SVG line plot; the data are repeated in an XML comment table.
std::string svg_plot(const PlotSpec& p);

nlohmann::json to_json(const AuditEntry& e);
nlohmann::json to_json(const AuditReport& r);
nlohmann::json to_json(const ProbeRecord& r);
nlohmann::json to_json(const ProbeReport& r);
nlohmann::json to_json(const MeasurementRun& r);
nlohmann::json to_json(const SpacetimeReport& s);

/// Named text artifacts collected in memory and written together.
class Artifacts {
 public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }
  /// Writes every artifact into `dir` (created if missing) through temporary files renamed into
  /// place; on failure, files already renamed by this call are removed.
  void write_all(const std::string& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace qmeas
