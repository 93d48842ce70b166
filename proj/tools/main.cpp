// qmeas: energy-time cost of quantum measurements, as a command-line tool.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qmeas/app.hpp"

namespace {

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path);
  if (!in) throw qmeas::ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-time cost of quantum measurements: models, conditions, bounds."};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", qmeas::library_version());

  qmeas::GlobalOptions opt;
  std::uint64_t seed = 0;
  int grid_n = 0;
  double dt = 0.0;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--grid-n", grid_n, "Grid points per axis (overrides the config)")->check(CLI::Range(16, 1 << 16));
    sub->add_option("--dt", dt, "Cap on the split-step time step")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opt.quiet, "Suppress the summary on stdout");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one configured experiment");
  run->add_option("config", config_path, "Configuration file")->required();
  add_globals(run);

  std::string parameter;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one model parameter");
  sweep->add_option("config", config_path, "Configuration file")->required();
  sweep->add_option("--param", parameter, "Parameter to sweep")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  add_globals(sweep);

  std::string audit_path;
  auto* audit = app.add_subcommand("audit", "Check the theorem inequalities on supplied numbers (CSV or JSON, '-' for stdin)");
  audit->add_option("input", audit_path, "Input file")->required();
  add_globals(audit);

  qmeas::ProbeOptions probe_opt;
  auto* probe = app.add_subcommand("probe", "Search random finite models for counterexamples to the no-go statement");
  probe->add_option("--trials", probe_opt.trials, "Number of random models")->capture_default_str()->check(CLI::Range(1, 100000));
  probe->add_option("--ds", probe_opt.d_s, "System dimension")->capture_default_str()->check(CLI::Range(2, 8));
  probe->add_option("--da", probe_opt.d_a, "Apparatus dimension")->capture_default_str()->check(CLI::Range(1, 16));
  probe->add_option("--window", probe_opt.window, "Sampling window before t0")->capture_default_str()->check(CLI::PositiveNumber);
  probe->add_option("--samples", probe_opt.samples, "Samples in the window")->capture_default_str()->check(CLI::Range(2, 4096));
  probe->add_option("--workers", probe_opt.workers, "Worker threads (0 = hardware)")->capture_default_str();
  add_globals(probe);

  auto* chain = app.add_subcommand("chain", "Lattice locality and box energy fluctuations");
  chain->add_option("config", config_path, "Configuration file")->required();
  add_globals(chain);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qmeas::kExitConfig;
  }

  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* active = app.get_subcommands().front();
  if (given(active, "--seed")) opt.seed = seed;
  if (given(active, "--grid-n")) opt.grid_n = grid_n;
  if (given(active, "--dt")) opt.dt = dt;

  using qmeas::Config;
  std::function<qmeas::Outcome()> command;
  if (active == run) {
    command = [&] { return qmeas::cmd_run(Config::load(config_path), opt); };
  } else if (active == sweep) {
    command = [&] { return qmeas::cmd_sweep(Config::load(config_path), parameter, values, opt); };
  } else if (active == audit) {
    command = [&] { return qmeas::cmd_audit(read_text(audit_path), opt); };
  } else if (active == probe) {
    command = [&] { return qmeas::cmd_probe(probe_opt, opt); };
  } else {
    command = [&] { return qmeas::cmd_chain(Config::load(config_path), opt); };
  }
  return qmeas::execute(command, opt);
}
