#pragma once

// Declarative scenario configuration (YAML) with strict units.
//
// Every dimensional value is a string "<number> <unit>" (see units.hpp).
// serialize_config() writes the canonical form: all defaults explicit, SI
// units, and parse_config(serialize_config(c)) == c.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmeit/model.hpp"
#include "mmeit/solver_full.hpp"
#include "mmeit/waveforms.hpp"

namespace mmeit::config {

struct MediumSpec {
  MediumParams params;
  /// When set, overrides params.coupling_density via d = 4 g L / Gamma.
  std::optional<double> optical_depth;

  LambdaMedium build() const;
  bool operator==(const MediumSpec&) const = default;
};

struct GridSpec {
  double t_start = 0.0;
  double duration = 0.0;  // s; the grid has round(duration / dt) samples
  double dt = 0.0;
  std::size_t z_slices = 50;
  std::size_t velocity_classes = 1;
  Quadrature quadrature = Quadrature::stratified;

  std::size_t n_samples() const;
  TimeGrid time_grid(double max_modulation_hz) const;
  bool operator==(const GridSpec&) const = default;
};

struct ControlSpec {
  ControlComponent component;
  /// When set, component.amplitude is derived as rms_amplitude / modulation_rms.
  std::optional<double> rms_amplitude;

  bool operator==(const ControlSpec&) const = default;
};

struct ProbeSpec {
  Envelope envelope;
  std::optional<double> amplitude;      // envelope peak, rad/s
  std::optional<double> rms_amplitude;  // peak divided by the control's modulation rms when matched
  bool matched = false;
  double frequency_offset = 0.0;

  bool operator==(const ProbeSpec&) const = default;
};

enum class SolverChoice { adiabatic, full, both };

std::string_view to_string(SolverChoice s);

enum class Measurement { transmission, spectrum, zero_span, delay, overlap, margins, conversion, storage, waveform, eit_scan };

std::string_view to_string(Measurement m);
Measurement measurement_from_string(std::string_view name);

struct MeasurementOptions {
  double spectrum_rbw = angular(30e3);
  double spectrum_span = angular(10e6);  // half-width of the emitted trace
  double lo_offset = 0.0;
  double zero_span_rbw = angular(5e6);
  std::optional<double> line_spacing;    // comb spacing for the off-line level
  double line_tolerance = angular(100e3);
  std::size_t waveform_points = 2000;
  // eit_scan: cw control at the scenario's mean control power, swept in
  // two-photon offset over [-scan_span, scan_span].
  double scan_span = angular(300e3);
  std::size_t scan_points = 41;
  std::optional<double> scan_duration;
  std::optional<double> scan_dt;
  double modulation_bandwidth = angular(5e6);

  bool operator==(const MeasurementOptions&) const = default;
};

/// Every control colour is replaced at switch_time by two colours: the
/// original (power fraction 1 - f) and a copy offset by `offset` (fraction f).
struct ConversionSpec {
  double switch_time = 0.0;
  double offset = 0.0;
  double power_fraction = 1.0;

  bool operator==(const ConversionSpec&) const = default;
};

struct StorageSpec {
  double t_off = 0.0;
  double t_on = 0.0;

  bool operator==(const StorageSpec&) const = default;
};

struct SweepAxis {
  std::string parameter;            // dotted path into the canonical config
  std::vector<std::string> values;  // substituted verbatim

  bool operator==(const SweepAxis&) const = default;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  bool zip = false;  // false: cartesian product, first axis slowest

  std::size_t size() const;
  bool operator==(const SweepSpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  MediumSpec medium;
  GridSpec grid;
  std::vector<ControlSpec> control;
  ProbeSpec probe;
  SolverChoice solver = SolverChoice::full;
  full::Integrator integrator = full::Integrator::piecewise_exact;
  std::size_t solver_threads = 1;
  std::vector<Measurement> measurements;
  MeasurementOptions options;
  std::optional<ConversionSpec> conversion;
  std::optional<StorageSpec> storage;
  std::optional<SweepSpec> sweep;
  OutputSpec outputs;
  double runtime_budget = 300.0;  // s

  bool has(Measurement m) const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates. Throws ValidationError with the dotted field path.
ScenarioConfig parse_config(std::string_view yaml);
ScenarioConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const ScenarioConfig& config);

/// Semantic checks beyond parsing; parse_config calls it.
void validate_config(const ScenarioConfig& config);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// True when `path` names an existing scalar in the canonical form of `config`.
bool has_parameter(const ScenarioConfig& config, std::string_view path);

/// Copy of `config` with the scalar at `path` replaced by `value`, reparsed.
/// Throws ValidationError for a missing path or an invalid result.
ScenarioConfig with_parameter(const ScenarioConfig& config, std::string_view path, std::string_view value);

struct SweepMember {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> assignments;
  std::optional<ScenarioConfig> config;  // empty when substitution failed
  std::string error;
};

/// Expands `sweep` against `base` (whose own sweep section is dropped from
/// the members). Throws ValidationError for unknown paths, empty value lists
/// or zip axes of unequal length; a member whose substituted config does not
/// validate carries the message in `error`.
std::vector<SweepMember> expand_sweep(const ScenarioConfig& base, const SweepSpec& sweep);

enum class Resolution { coarse, standard, fine };

Resolution resolution_from_string(std::string_view name);
std::string_view to_string(Resolution r);

/// coarse doubles dt and halves z_slices, fine does the reverse.
ScenarioConfig apply_resolution(ScenarioConfig config, Resolution r);

}  // namespace mmeit::config
