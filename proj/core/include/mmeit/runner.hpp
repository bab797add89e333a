#pragma once

// Scenario execution, sweep orchestration and structured output.
//
// Output directory layout:
//   config.yaml          canonical config that was run
//   <measurement>.csv    one table per measurement, rows from every run
//   cross_solver.csv     solver "both" only
//   sweep_summary.csv    one row of parameters and scalars per run
//   summary.json         all runs: parameters, scalars, provenance, errors
//   runs/run_NNNN.json   the same per run
//   timing.json          wall times (kept apart so the rest is deterministic)

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmeit/config.hpp"
#include "mmeit/error.hpp"

namespace mmeit::runner {

std::string_view version();

/// CSV-ready table; cells are already formatted ("%.17g" for numbers).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Provenance {
  std::string version;
  std::string resolution;
  std::size_t n_time_samples = 0;
  double dt = 0.0;
  std::size_t z_slices = 0;
  std::size_t velocity_classes = 0;
  double wall_seconds = 0.0;
};

struct RunFailure {
  ErrorKind kind = ErrorKind::invalid_argument;
  std::string message;
};

struct RunRecord {
  std::size_t run_index = 0;
  std::string scenario;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, double>> scalars;  // in emission order
  std::map<std::string, Table> tables;                  // keyed by file stem
  std::vector<std::string> warnings;
  Provenance provenance;
  std::optional<RunFailure> error;

  bool ok() const { return !error.has_value(); }
  std::optional<double> scalar(std::string_view name) const;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: the config's outputs.directory
  std::size_t workers = 1;        // concurrent sweep members
  config::Resolution resolution = config::Resolution::standard;
  bool write = true;
};

/// Runs one already-resolved config. Solver and measurement errors are
/// captured in the record, never thrown.
RunRecord execute(const config::ScenarioConfig& config, std::size_t run_index = 0,
                  std::vector<std::pair<std::string, std::string>> parameters = {});

/// Single run of `config` (its sweep section is ignored) at the requested
/// resolution; writes outputs when options.write. Rethrows a run failure as
/// Error with the scenario name prepended.
RunRecord run_scenario(const config::ScenarioConfig& config, const RunOptions& options = {});

/// Expands `sweep` over `config` and runs the members on options.workers
/// threads. Member failures are recorded per member; results keep member
/// order regardless of completion order.
std::vector<RunRecord> run_sweep(const config::ScenarioConfig& config, const config::SweepSpec& sweep,
                                 const RunOptions& options = {});

/// run_sweep over the config's own sweep section, else run_scenario without
/// rethrowing.
std::vector<RunRecord> run(const config::ScenarioConfig& config, const RunOptions& options = {});

void write_outputs(const config::ScenarioConfig& config, const std::vector<RunRecord>& records,
                   const std::filesystem::path& dir, config::Resolution resolution);

}  // namespace mmeit::runner
