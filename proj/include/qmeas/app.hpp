#pragma once

// Experiment runners behind the command-line tool. Each command produces its artifacts in memory;
// nothing is written unless the whole command succeeds.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/config.hpp"
#include "qmeas/conditions.hpp"
#include "qmeas/models.hpp"
#include "qmeas/output.hpp"

namespace qmeas {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitValidation = 2, kExitNumerical = 3 };

struct GlobalOptions {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_n;
  std::optional<double> dt;
  bool quiet = false;
};

/// Artifacts plus any tolerance checks that failed while producing them.
struct Outcome {
  Artifacts artifacts;
  std::vector<std::string> failures;
  std::string summary;
};

/// Builds the model named by `experiment` in the top section, applying --grid-n.
std::unique_ptr<MeasurementModel> build_model(const Config& cfg, const GlobalOptions& opt);

/// Names accepted by `sweep` for the configured experiment.
std::vector<std::string> sweepable_parameters(const std::string& experiment);

Outcome cmd_run(const Config& cfg, const GlobalOptions& opt);
Outcome cmd_sweep(const Config& cfg, const std::string& parameter, const std::vector<double>& values,
                  const GlobalOptions& opt);
/// `text` is CSV with a header row, or a JSON array of objects.
Outcome cmd_audit(const std::string& text, const GlobalOptions& opt);
Outcome cmd_probe(const ProbeOptions& probe, const GlobalOptions& opt);
Outcome cmd_chain(const Config& cfg, const GlobalOptions& opt);

/// Maps an exception to its exit code.
int exit_code_for(const std::exception& e);

/// Runs a command, writes its artifacts to opt.out, prints the summary unless quiet, and returns the
/// exit code. Errors go to stderr.
int execute(const std::function<Outcome()>& command, const GlobalOptions& opt);

}  // namespace qmeas
