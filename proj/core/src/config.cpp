#include "mmeit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mmeit/error.hpp"
#include "mmeit/units.hpp"

namespace mmeit::config {
namespace {

using units::Dimension;

std::string join(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

std::size_t parse_count(const std::string& text, const std::string& field) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(field, "expected a non-negative integer, got '" + text + "'");
  return value;
}

bool parse_flag(const std::string& text, const std::string& field) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ValidationError(field, "expected true or false, got '" + text + "'");
}

/// A mapping whose keys are consumed explicitly; finish() rejects leftovers.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  const std::string& path() const { return path_; }
  std::string field(std::string_view key) const { return join(path_, key); }

  bool contains(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node child(const std::string& key) {
    used_.insert(key);
    return node_[key];
  }

  std::string scalar(const std::string& key) {
    if (!contains(key)) throw ValidationError(field(key), "required field is missing");
    const YAML::Node n = child(key);
    if (!n.IsScalar()) throw ValidationError(field(key), "expected a scalar");
    return n.Scalar();
  }

  std::string text_or(const std::string& key, const std::string& fallback) {
    return contains(key) ? scalar(key) : fallback;
  }

  double quantity(const std::string& key, Dimension dim) {
    return units::parse(scalar(key), dim, field(key));
  }

  double quantity_or(const std::string& key, Dimension dim, double fallback) {
    return contains(key) ? quantity(key, dim) : fallback;
  }

  std::optional<double> optional_quantity(const std::string& key, Dimension dim) {
    if (!contains(key)) return std::nullopt;
    return quantity(key, dim);
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    return contains(key) ? parse_count(scalar(key), field(key)) : fallback;
  }

  bool flag_or(const std::string& key, bool fallback) {
    return contains(key) ? parse_flag(scalar(key), field(key)) : fallback;
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.Scalar();
      if (!used_.count(key)) throw ValidationError(field(key), "unknown field");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto rethrow_as_validation(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(field, e.what());
  }
}

Envelope parse_envelope(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  Envelope env;
  const std::string shape = s.scalar("shape");
  env.shape = rethrow_as_validation(s.field("shape"), [&] { return envelope_shape_from_string(shape); });
  switch (env.shape) {
    case EnvelopeShape::constant:
      break;
    case EnvelopeShape::gaussian:
      env.center = s.quantity("center", Dimension::time);
      env.duration = s.quantity("duration", Dimension::time);
      break;
    case EnvelopeShape::flattop:
      env.start = s.quantity("start", Dimension::time);
      env.end = s.quantity("end", Dimension::time);
      env.rise = s.quantity_or("rise", Dimension::time, 0.0);
      break;
  }
  s.finish();
  return env;
}

PulseTrainSpec parse_modulation(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  PulseTrainSpec m;
  m.frequency_hz = s.quantity("frequency", Dimension::frequency);
  m.duty = s.quantity_or("duty", Dimension::dimensionless, 1.0);
  m.phase = s.quantity_or("phase", Dimension::dimensionless, 0.0);
  m.edge_rise = s.quantity_or("edge_rise", Dimension::time, 0.0);
  s.finish();
  return m;
}

std::vector<TimeInterval> parse_gate(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ValidationError(path, "expected a list of {begin, end} intervals");
  std::vector<TimeInterval> gate;
  for (std::size_t i = 0; i < node.size(); ++i) {
    Section s(node[i], join(path, std::to_string(i)));
    TimeInterval iv{s.quantity("begin", Dimension::time), s.quantity("end", Dimension::time)};
    s.finish();
    gate.push_back(iv);
  }
  return gate;
}

ControlSpec parse_control(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  ControlSpec spec;
  auto& c = spec.component;
  const bool has_amp = s.contains("amplitude");
  const bool has_rms = s.contains("rms_amplitude");
  if (has_amp == has_rms) throw ValidationError(path, "give exactly one of amplitude or rms_amplitude");
  if (has_amp) c.amplitude = s.quantity("amplitude", Dimension::angular_frequency);
  if (has_rms) spec.rms_amplitude = s.quantity("rms_amplitude", Dimension::angular_frequency);
  c.frequency_offset = s.quantity_or("frequency_offset", Dimension::angular_frequency, 0.0);
  c.phase = s.quantity_or("phase", Dimension::dimensionless, 0.0);
  if (s.contains("envelope")) c.envelope = parse_envelope(s.child("envelope"), s.field("envelope"));
  if (s.contains("gate")) c.gate = parse_gate(s.child("gate"), s.field("gate"));
  if (s.contains("modulation")) c.modulation = parse_modulation(s.child("modulation"), s.field("modulation"));
  s.finish();
  return spec;
}

ProbeSpec parse_probe(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  ProbeSpec p;
  const bool has_amp = s.contains("amplitude");
  const bool has_rms = s.contains("rms_amplitude");
  if (has_amp == has_rms) throw ValidationError(path, "give exactly one of amplitude or rms_amplitude");
  p.amplitude = s.optional_quantity("amplitude", Dimension::angular_frequency);
  p.rms_amplitude = s.optional_quantity("rms_amplitude", Dimension::angular_frequency);
  if (!s.contains("envelope")) throw ValidationError(s.field("envelope"), "required field is missing");
  p.envelope = parse_envelope(s.child("envelope"), s.field("envelope"));
  p.matched = s.flag_or("matched", false);
  p.frequency_offset = s.quantity_or("frequency_offset", Dimension::angular_frequency, 0.0);
  s.finish();
  return p;
}

MediumSpec parse_medium(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  MediumSpec m;
  auto& p = m.params;
  p.gamma = s.quantity_or("gamma", Dimension::angular_frequency, p.gamma);
  const bool has_d = s.contains("optical_depth");
  const bool has_g = s.contains("coupling_density");
  if (has_d == has_g) throw ValidationError(path, "give exactly one of optical_depth or coupling_density");
  if (has_d) m.optical_depth = s.quantity("optical_depth", Dimension::dimensionless);
  if (has_g) p.coupling_density = s.quantity("coupling_density", Dimension::coupling);
  p.length = s.quantity_or("length", Dimension::length, p.length);
  p.inhomogeneous_width = s.quantity_or("inhomogeneous_width", Dimension::angular_frequency, 0.0);
  const std::string profile = s.text_or("detuning_profile", "none");
  p.detuning_profile =
      rethrow_as_validation(s.field("detuning_profile"), [&] { return detuning_profile_from_string(profile); });
  p.ground_decoherence = s.quantity_or("ground_decoherence", Dimension::angular_frequency, 0.0);
  s.finish();
  return m;
}

GridSpec parse_grid(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  GridSpec g;
  g.t_start = s.quantity_or("t_start", Dimension::time, 0.0);
  g.duration = s.quantity("duration", Dimension::time);
  g.dt = s.quantity("dt", Dimension::time);
  g.z_slices = s.count_or("z_slices", g.z_slices);
  g.velocity_classes = s.count_or("velocity_classes", g.velocity_classes);
  const std::string q = s.text_or("quadrature", "stratified");
  g.quadrature = rethrow_as_validation(s.field("quadrature"), [&] { return quadrature_from_string(q); });
  s.finish();
  return g;
}

MeasurementOptions parse_options(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  MeasurementOptions o;
  o.spectrum_rbw = s.quantity_or("spectrum_rbw", Dimension::angular_frequency, o.spectrum_rbw);
  o.spectrum_span = s.quantity_or("spectrum_span", Dimension::angular_frequency, o.spectrum_span);
  o.lo_offset = s.quantity_or("lo_offset", Dimension::angular_frequency, o.lo_offset);
  o.zero_span_rbw = s.quantity_or("zero_span_rbw", Dimension::angular_frequency, o.zero_span_rbw);
  o.line_spacing = s.optional_quantity("line_spacing", Dimension::angular_frequency);
  o.line_tolerance = s.quantity_or("line_tolerance", Dimension::angular_frequency, o.line_tolerance);
  o.waveform_points = s.count_or("waveform_points", o.waveform_points);
  o.scan_span = s.quantity_or("scan_span", Dimension::angular_frequency, o.scan_span);
  o.scan_points = s.count_or("scan_points", o.scan_points);
  o.scan_duration = s.optional_quantity("scan_duration", Dimension::time);
  o.scan_dt = s.optional_quantity("scan_dt", Dimension::time);
  o.modulation_bandwidth = s.quantity_or("modulation_bandwidth", Dimension::angular_frequency, o.modulation_bandwidth);
  s.finish();
  return o;
}

std::vector<std::string> parse_values(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ValidationError(path, "expected a list of values");
  std::vector<std::string> values;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].IsScalar()) throw ValidationError(join(path, std::to_string(i)), "sweep values must be scalars");
    values.push_back(node[i].Scalar());
  }
  return values;
}

SweepSpec parse_sweep(const YAML::Node& node, const std::string& path) {
  Section s(node, path);
  SweepSpec sweep;
  if (s.contains("axes")) {
    const YAML::Node axes = s.child("axes");
    if (!axes.IsSequence()) throw ValidationError(s.field("axes"), "expected a list of axes");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Section a(axes[i], join(s.field("axes"), std::to_string(i)));
      SweepAxis axis;
      axis.parameter = a.scalar("parameter");
      axis.values = parse_values(a.child("values"), a.field("values"));
      a.finish();
      sweep.axes.push_back(std::move(axis));
    }
  } else {
    SweepAxis axis;
    axis.parameter = s.scalar("parameter");
    if (!s.contains("values")) throw ValidationError(s.field("values"), "required field is missing");
    axis.values = parse_values(s.child("values"), s.field("values"));
    sweep.axes.push_back(std::move(axis));
  }
  const std::string mode = s.text_or("mode", "product");
  if (mode == "zip") {
    sweep.zip = true;
  } else if (mode != "product") {
    throw ValidationError(s.field("mode"), "expected product or zip, got '" + mode + "'");
  }
  s.finish();
  return sweep;
}

ScenarioConfig parse_root(const YAML::Node& root) {
  Section s(root, "");
  ScenarioConfig c;
  c.name = s.scalar("name");
  c.description = s.text_or("description", "");
  if (!s.contains("medium")) throw ValidationError("medium", "required section is missing");
  c.medium = parse_medium(s.child("medium"), "medium");
  if (!s.contains("grid")) throw ValidationError("grid", "required section is missing");
  c.grid = parse_grid(s.child("grid"), "grid");
  if (s.contains("control")) {
    const YAML::Node control = s.child("control");
    if (!control.IsSequence()) throw ValidationError("control", "expected a list of components");
    for (std::size_t i = 0; i < control.size(); ++i)
      c.control.push_back(parse_control(control[i], "control." + std::to_string(i)));
  }
  if (!s.contains("probe")) throw ValidationError("probe", "required section is missing");
  c.probe = parse_probe(s.child("probe"), "probe");

  const std::string solver = s.text_or("solver", "full");
  if (solver == "full") {
    c.solver = SolverChoice::full;
  } else if (solver == "adiabatic") {
    c.solver = SolverChoice::adiabatic;
  } else if (solver == "both") {
    c.solver = SolverChoice::both;
  } else {
    throw ValidationError("solver", "expected adiabatic, full or both, got '" + solver + "'");
  }
  if (s.contains("solver_options")) {
    Section so(s.child("solver_options"), "solver_options");
    const std::string integ = so.text_or("integrator", "piecewise_exact");
    if (integ == "piecewise_exact") {
      c.integrator = full::Integrator::piecewise_exact;
    } else if (integ == "exponential_rk4") {
      c.integrator = full::Integrator::exponential_rk4;
    } else {
      throw ValidationError("solver_options.integrator", "expected piecewise_exact or exponential_rk4");
    }
    c.solver_threads = so.count_or("threads", 1);
    so.finish();
  }

  if (s.contains("measurements")) {
    const YAML::Node ms = s.child("measurements");
    if (!ms.IsSequence()) throw ValidationError("measurements", "expected a list");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string field = "measurements." + std::to_string(i);
      if (!ms[i].IsScalar()) throw ValidationError(field, "expected a measurement name");
      c.measurements.push_back(rethrow_as_validation(field, [&] { return measurement_from_string(ms[i].Scalar()); }));
    }
  }
  if (s.contains("measurement_options")) c.options = parse_options(s.child("measurement_options"), "measurement_options");
  if (s.contains("conversion")) {
    Section cs(s.child("conversion"), "conversion");
    ConversionSpec cv;
    cv.switch_time = cs.quantity("switch_time", Dimension::time);
    cv.offset = cs.quantity("offset", Dimension::angular_frequency);
    cv.power_fraction = cs.quantity_or("power_fraction", Dimension::dimensionless, 1.0);
    cs.finish();
    c.conversion = cv;
  }
  if (s.contains("storage")) {
    Section ss(s.child("storage"), "storage");
    c.storage = StorageSpec{ss.quantity("t_off", Dimension::time), ss.quantity("t_on", Dimension::time)};
    ss.finish();
  }
  if (s.contains("sweep")) c.sweep = parse_sweep(s.child("sweep"), "sweep");
  if (s.contains("outputs")) {
    Section os(s.child("outputs"), "outputs");
    c.outputs.directory = os.text_or("directory", c.outputs.directory);
    if (os.contains("formats")) c.outputs.formats = parse_values(os.child("formats"), "outputs.formats");
    os.finish();
  }
  c.runtime_budget = s.quantity_or("runtime_budget", Dimension::time, c.runtime_budget);
  s.finish();
  return c;
}

YAML::Node load_yaml(std::string_view yaml) {
  try {
    return YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ValidationError("<document>", std::string("YAML syntax error: ") + e.what());
  }
}

// Emission.

void put(YAML::Emitter& e, const char* key, const std::string& value) {
  e << YAML::Key << key << YAML::Value << value;
}

void put_q(YAML::Emitter& e, const char* key, double value, Dimension dim) {
  put(e, key, units::format(value, dim));
}

void emit_envelope(YAML::Emitter& e, const Envelope& env) {
  e << YAML::BeginMap;
  put(e, "shape", std::string(to_string(env.shape)));
  switch (env.shape) {
    case EnvelopeShape::constant:
      break;
    case EnvelopeShape::gaussian:
      put_q(e, "center", env.center, Dimension::time);
      put_q(e, "duration", env.duration, Dimension::time);
      break;
    case EnvelopeShape::flattop:
      put_q(e, "start", env.start, Dimension::time);
      put_q(e, "end", env.end, Dimension::time);
      put_q(e, "rise", env.rise, Dimension::time);
      break;
  }
  e << YAML::EndMap;
}

void emit_control(YAML::Emitter& e, const ControlSpec& spec) {
  const auto& c = spec.component;
  e << YAML::BeginMap;
  if (spec.rms_amplitude) {
    put_q(e, "rms_amplitude", *spec.rms_amplitude, Dimension::angular_frequency);
  } else {
    put_q(e, "amplitude", c.amplitude, Dimension::angular_frequency);
  }
  put_q(e, "frequency_offset", c.frequency_offset, Dimension::angular_frequency);
  put_q(e, "phase", c.phase, Dimension::dimensionless);
  e << YAML::Key << "envelope" << YAML::Value;
  emit_envelope(e, c.envelope);
  e << YAML::Key << "gate" << YAML::Value << YAML::BeginSeq;
  for (const auto& iv : c.gate) {
    e << YAML::BeginMap;
    put_q(e, "begin", iv.begin, Dimension::time);
    put_q(e, "end", iv.end, Dimension::time);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  if (c.modulation) {
    const auto& m = *c.modulation;
    e << YAML::Key << "modulation" << YAML::Value << YAML::BeginMap;
    put_q(e, "frequency", m.frequency_hz, Dimension::frequency);
    put_q(e, "duty", m.duty, Dimension::dimensionless);
    put_q(e, "phase", m.phase, Dimension::dimensionless);
    put_q(e, "edge_rise", m.edge_rise, Dimension::time);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
}

void emit_root(YAML::Emitter& e, const ScenarioConfig& c) {
  e << YAML::BeginMap;
  put(e, "name", c.name);
  put(e, "description", c.description);

  const auto& mp = c.medium.params;
  e << YAML::Key << "medium" << YAML::Value << YAML::BeginMap;
  put_q(e, "gamma", mp.gamma, Dimension::angular_frequency);
  if (c.medium.optical_depth) {
    put_q(e, "optical_depth", *c.medium.optical_depth, Dimension::dimensionless);
  } else {
    put_q(e, "coupling_density", mp.coupling_density, Dimension::coupling);
  }
  put_q(e, "length", mp.length, Dimension::length);
  put_q(e, "inhomogeneous_width", mp.inhomogeneous_width, Dimension::angular_frequency);
  put(e, "detuning_profile", std::string(to_string(mp.detuning_profile)));
  put_q(e, "ground_decoherence", mp.ground_decoherence, Dimension::angular_frequency);
  e << YAML::EndMap;

  const auto& g = c.grid;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  put_q(e, "t_start", g.t_start, Dimension::time);
  put_q(e, "duration", g.duration, Dimension::time);
  put_q(e, "dt", g.dt, Dimension::time);
  put(e, "z_slices", std::to_string(g.z_slices));
  put(e, "velocity_classes", std::to_string(g.velocity_classes));
  put(e, "quadrature", std::string(to_string(g.quadrature)));
  e << YAML::EndMap;

  e << YAML::Key << "control" << YAML::Value << YAML::BeginSeq;
  for (const auto& spec : c.control) emit_control(e, spec);
  e << YAML::EndSeq;

  const auto& p = c.probe;
  e << YAML::Key << "probe" << YAML::Value << YAML::BeginMap;
  if (p.amplitude) put_q(e, "amplitude", *p.amplitude, Dimension::angular_frequency);
  if (p.rms_amplitude) put_q(e, "rms_amplitude", *p.rms_amplitude, Dimension::angular_frequency);
  e << YAML::Key << "envelope" << YAML::Value;
  emit_envelope(e, p.envelope);
  put(e, "matched", p.matched ? "true" : "false");
  put_q(e, "frequency_offset", p.frequency_offset, Dimension::angular_frequency);
  e << YAML::EndMap;

  put(e, "solver", std::string(to_string(c.solver)));
  e << YAML::Key << "solver_options" << YAML::Value << YAML::BeginMap;
  put(e, "integrator", c.integrator == full::Integrator::piecewise_exact ? "piecewise_exact" : "exponential_rk4");
  put(e, "threads", std::to_string(c.solver_threads));
  e << YAML::EndMap;

  e << YAML::Key << "measurements" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto m : c.measurements) e << std::string(to_string(m));
  e << YAML::EndSeq;

  const auto& o = c.options;
  e << YAML::Key << "measurement_options" << YAML::Value << YAML::BeginMap;
  put_q(e, "spectrum_rbw", o.spectrum_rbw, Dimension::angular_frequency);
  put_q(e, "spectrum_span", o.spectrum_span, Dimension::angular_frequency);
  put_q(e, "lo_offset", o.lo_offset, Dimension::angular_frequency);
  put_q(e, "zero_span_rbw", o.zero_span_rbw, Dimension::angular_frequency);
  if (o.line_spacing) put_q(e, "line_spacing", *o.line_spacing, Dimension::angular_frequency);
  put_q(e, "line_tolerance", o.line_tolerance, Dimension::angular_frequency);
  put(e, "waveform_points", std::to_string(o.waveform_points));
  put_q(e, "scan_span", o.scan_span, Dimension::angular_frequency);
  put(e, "scan_points", std::to_string(o.scan_points));
  if (o.scan_duration) put_q(e, "scan_duration", *o.scan_duration, Dimension::time);
  if (o.scan_dt) put_q(e, "scan_dt", *o.scan_dt, Dimension::time);
  put_q(e, "modulation_bandwidth", o.modulation_bandwidth, Dimension::angular_frequency);
  e << YAML::EndMap;

  if (c.conversion) {
    e << YAML::Key << "conversion" << YAML::Value << YAML::BeginMap;
    put_q(e, "switch_time", c.conversion->switch_time, Dimension::time);
    put_q(e, "offset", c.conversion->offset, Dimension::angular_frequency);
    put_q(e, "power_fraction", c.conversion->power_fraction, Dimension::dimensionless);
    e << YAML::EndMap;
  }
  if (c.storage) {
    e << YAML::Key << "storage" << YAML::Value << YAML::BeginMap;
    put_q(e, "t_off", c.storage->t_off, Dimension::time);
    put_q(e, "t_on", c.storage->t_on, Dimension::time);
    e << YAML::EndMap;
  }
  if (c.sweep) {
    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    put(e, "mode", c.sweep->zip ? "zip" : "product");
    e << YAML::Key << "axes" << YAML::Value << YAML::BeginSeq;
    for (const auto& axis : c.sweep->axes) {
      e << YAML::BeginMap;
      put(e, "parameter", axis.parameter);
      e << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& v : axis.values) e << v;
      e << YAML::EndSeq << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
  }

  e << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  put(e, "directory", c.outputs.directory);
  e << YAML::Key << "formats" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& f : c.outputs.formats) e << f;
  e << YAML::EndSeq << YAML::EndMap;

  put_q(e, "runtime_budget", c.runtime_budget, Dimension::time);
  e << YAML::EndMap;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t dot = path.find('.', pos);
    const std::size_t end = dot == std::string_view::npos ? path.size() : dot;
    parts.emplace_back(path.substr(pos, end - pos));
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return parts;
}

/// Scalar node at `path`, or an invalid node when it does not exist.
std::optional<YAML::Node> find_scalar(YAML::Node root, std::string_view path) {
  if (path.empty()) return std::nullopt;
  YAML::Node node = root;
  for (const auto& part : split_path(path)) {
    if (part.empty()) return std::nullopt;
    if (node.IsMap()) {
      bool found = false;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (it->first.Scalar() == part) {
          node.reset(it->second);
          found = true;
          break;
        }
      }
      if (!found) return std::nullopt;
    } else if (node.IsSequence()) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
      if (ec != std::errc() || ptr != part.data() + part.size() || idx >= node.size()) return std::nullopt;
      const YAML::Node next = node[idx];
      node.reset(next);
    } else {
      return std::nullopt;
    }
  }
  if (!node.IsScalar()) return std::nullopt;
  return node;
}

ScenarioConfig substitute(const ScenarioConfig& base,
                          const std::vector<std::pair<std::string, std::string>>& assignments) {
  YAML::Node root = YAML::Load(serialize_config(base));
  for (const auto& [path, value] : assignments) {
    auto node = find_scalar(root, path);
    if (!node) throw ValidationError(path, "parameter path does not exist in the scenario");
    *node = value;
  }
  YAML::Emitter e;
  e << root;
  return parse_config(e.c_str());
}

}  // namespace

LambdaMedium MediumSpec::build() const {
  if (optical_depth) return LambdaMedium::with_optical_depth(params, *optical_depth);
  return LambdaMedium(params);
}

std::size_t GridSpec::n_samples() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

TimeGrid GridSpec::time_grid(double max_modulation_hz) const {
  const std::size_t n = n_samples();
  return TimeGrid(t_start, t_start + static_cast<double>(n - 1) * dt, n, max_modulation_hz);
}

std::size_t SweepSpec::size() const {
  if (axes.empty()) return 0;
  if (zip) return axes.front().values.size();
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

bool ScenarioConfig::has(Measurement m) const {
  for (auto x : measurements)
    if (x == m) return true;
  return false;
}

std::string_view to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::adiabatic: return "adiabatic";
    case SolverChoice::full: return "full";
    case SolverChoice::both: return "both";
  }
  return "full";
}

std::string_view to_string(Measurement m) {
  switch (m) {
    case Measurement::transmission: return "transmission";
    case Measurement::spectrum: return "spectrum";
    case Measurement::zero_span: return "zero_span";
    case Measurement::delay: return "delay";
    case Measurement::overlap: return "overlap";
    case Measurement::margins: return "margins";
    case Measurement::conversion: return "conversion";
    case Measurement::storage: return "storage";
    case Measurement::waveform: return "waveform";
    case Measurement::eit_scan: return "eit_scan";
  }
  return "transmission";
}

Measurement measurement_from_string(std::string_view name) {
  for (auto m : {Measurement::transmission, Measurement::spectrum, Measurement::zero_span, Measurement::delay,
                 Measurement::overlap, Measurement::margins, Measurement::conversion, Measurement::storage,
                 Measurement::waveform, Measurement::eit_scan}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::invalid_argument, "unknown measurement '" + std::string(name) + "'");
}

ScenarioConfig parse_config(std::string_view yaml) {
  const YAML::Node root = load_yaml(yaml);
  ScenarioConfig c = parse_root(root);
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  YAML::Emitter e;
  e.SetIndent(2);
  emit_root(e, config);
  return std::string(e.c_str()) + "\n";
}

void validate_config(const ScenarioConfig& c) {
  if (c.name.empty()) throw ValidationError("name", "must not be empty");

  const auto& mp = c.medium.params;
  if (!(mp.gamma > 0.0)) throw ValidationError("medium.gamma", "must be positive");
  if (!(mp.length > 0.0)) throw ValidationError("medium.length", "must be positive");
  if (c.medium.optical_depth && *c.medium.optical_depth < 0.0)
    throw ValidationError("medium.optical_depth", "must be non-negative");
  if (mp.coupling_density < 0.0) throw ValidationError("medium.coupling_density", "must be non-negative");
  if (mp.ground_decoherence < 0.0) throw ValidationError("medium.ground_decoherence", "must be non-negative");
  if (mp.inhomogeneous_width < 0.0) throw ValidationError("medium.inhomogeneous_width", "must be non-negative");

  const auto& g = c.grid;
  if (!(g.dt > 0.0)) throw ValidationError("grid.dt", "must be positive");
  if (!(g.duration >= 2.0 * g.dt)) throw ValidationError("grid.duration", "must span at least two time steps");
  if (g.z_slices < 1) throw ValidationError("grid.z_slices", "must be at least 1");
  if (g.velocity_classes < 1 || g.velocity_classes % 2 == 0)
    throw ValidationError("grid.velocity_classes", "must be a positive odd number");

  for (std::size_t i = 0; i < c.control.size(); ++i) {
    const std::string field = "control." + std::to_string(i);
    rethrow_as_validation(field, [&] { c.control[i].component.validate(); });
    if (c.control[i].rms_amplitude && *c.control[i].rms_amplitude < 0.0)
      throw ValidationError(field + ".rms_amplitude", "must be non-negative");
  }
  rethrow_as_validation("probe.envelope", [&] { c.probe.envelope.validate(); });
  if (c.probe.amplitude.has_value() == c.probe.rms_amplitude.has_value())
    throw ValidationError("probe", "give exactly one of amplitude or rms_amplitude");
  if (c.probe.matched && c.control.empty()) throw ValidationError("probe.matched", "a matched probe needs a control");
  if (c.solver != SolverChoice::full && !c.probe.matched)
    throw ValidationError("solver", "the adiabatic solver requires a probe declared matched to the control");
  if (c.solver != SolverChoice::full && c.control.empty())
    throw ValidationError("solver", "the adiabatic solver requires a control field");
  if (c.solver_threads < 1) throw ValidationError("solver_options.threads", "must be at least 1");

  std::set<Measurement> seen;
  for (std::size_t i = 0; i < c.measurements.size(); ++i) {
    if (!seen.insert(c.measurements[i]).second)
      throw ValidationError("measurements." + std::to_string(i), "listed twice");
  }
  if (c.has(Measurement::conversion) && !c.conversion)
    throw ValidationError("conversion", "the conversion measurement needs a conversion section");
  if (c.has(Measurement::storage)) {
    if (!c.storage) throw ValidationError("storage", "the storage measurement needs a storage section");
    if (c.solver == SolverChoice::adiabatic) throw ValidationError("solver", "storage runs the full solver");
  }
  if (c.has(Measurement::eit_scan) && c.solver == SolverChoice::adiabatic)
    throw ValidationError("solver", "eit_scan runs the full solver");
  if ((c.has(Measurement::delay) || c.has(Measurement::overlap) || c.has(Measurement::margins)) && c.control.empty())
    throw ValidationError("measurements", "delay, overlap and margins need a control field");

  const double t_lo = g.t_start;
  const double t_hi = g.t_start + g.duration;
  if (c.conversion) {
    const auto& cv = *c.conversion;
    if (cv.switch_time <= t_lo || cv.switch_time >= t_hi)
      throw ValidationError("conversion.switch_time", "must lie inside the time grid");
    if (cv.power_fraction < 0.0 || cv.power_fraction > 1.0)
      throw ValidationError("conversion.power_fraction", "must lie in [0, 1]");
    if (c.control.empty()) throw ValidationError("conversion", "needs a control field");
  }
  if (c.storage) {
    if (!(c.storage->t_on > c.storage->t_off)) throw ValidationError("storage.t_on", "must follow t_off");
    if (c.storage->t_off <= t_lo || c.storage->t_on >= t_hi)
      throw ValidationError("storage", "the gate must lie inside the time grid");
  }

  const auto& o = c.options;
  if (!(o.spectrum_rbw > 0.0)) throw ValidationError("measurement_options.spectrum_rbw", "must be positive");
  if (!(o.zero_span_rbw > 0.0)) throw ValidationError("measurement_options.zero_span_rbw", "must be positive");
  if (!(o.spectrum_span > 0.0)) throw ValidationError("measurement_options.spectrum_span", "must be positive");
  if (o.line_spacing && !(*o.line_spacing > 0.0))
    throw ValidationError("measurement_options.line_spacing", "must be positive");
  if (o.waveform_points < 2) throw ValidationError("measurement_options.waveform_points", "must be at least 2");
  if (o.scan_points < 5) throw ValidationError("measurement_options.scan_points", "must be at least 5");
  if (!(o.scan_span > 0.0)) throw ValidationError("measurement_options.scan_span", "must be positive");
  if (o.scan_dt && !(*o.scan_dt > 0.0)) throw ValidationError("measurement_options.scan_dt", "must be positive");
  if (o.scan_duration && !(*o.scan_duration > 0.0))
    throw ValidationError("measurement_options.scan_duration", "must be positive");
  if (!(o.modulation_bandwidth > 0.0))
    throw ValidationError("measurement_options.modulation_bandwidth", "must be positive");

  if (c.sweep) {
    if (c.sweep->axes.empty()) throw ValidationError("sweep", "needs at least one axis");
    for (std::size_t i = 0; i < c.sweep->axes.size(); ++i) {
      const auto& axis = c.sweep->axes[i];
      const std::string field = "sweep.axes." + std::to_string(i);
      if (axis.values.empty()) throw ValidationError(field + ".values", "must not be empty");
      if (axis.parameter.rfind("sweep", 0) == 0) throw ValidationError(field + ".parameter", "cannot sweep the sweep");
      ScenarioConfig probe_copy = c;
      probe_copy.sweep.reset();
      if (!has_parameter(probe_copy, axis.parameter))
        throw ValidationError(field + ".parameter", "path '" + axis.parameter + "' does not exist in the scenario");
    }
    if (c.sweep->zip) {
      for (const auto& axis : c.sweep->axes) {
        if (axis.values.size() != c.sweep->axes.front().values.size())
          throw ValidationError("sweep", "zip axes must have equal lengths");
      }
    }
  }
  for (const auto& f : c.outputs.formats) {
    if (f != "csv" && f != "json") throw ValidationError("outputs.formats", "unknown format '" + f + "'");
  }
  if (!(c.runtime_budget > 0.0)) throw ValidationError("runtime_budget", "must be positive");

  // Grid feasibility: the modulation and colour offsets must be resolved.
  ControlProgram program;
  for (const auto& spec : c.control) program.components.push_back(spec.component);
  double max_hz = program.max_frequency_hz();
  if (c.conversion) max_hz = std::max(max_hz, std::abs(c.conversion->offset) / kTwoPi);
  rethrow_as_validation("grid.dt", [&] { (void)g.time_grid(max_hz); });
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool has_parameter(const ScenarioConfig& config, std::string_view path) {
  const YAML::Node root = YAML::Load(serialize_config(config));
  return find_scalar(root, path).has_value();
}

ScenarioConfig with_parameter(const ScenarioConfig& config, std::string_view path, std::string_view value) {
  return substitute(config, {{std::string(path), std::string(value)}});
}

std::vector<SweepMember> expand_sweep(const ScenarioConfig& base, const SweepSpec& sweep) {
  ScenarioConfig plain = base;
  plain.sweep.reset();
  if (sweep.axes.empty()) throw ValidationError("sweep", "needs at least one axis");
  for (const auto& axis : sweep.axes) {
    if (axis.values.empty()) throw ValidationError("sweep." + axis.parameter, "values must not be empty");
    if (!has_parameter(plain, axis.parameter))
      throw ValidationError(axis.parameter, "parameter path does not exist in the scenario");
    if (sweep.zip && axis.values.size() != sweep.axes.front().values.size())
      throw ValidationError("sweep", "zip axes must have equal lengths");
  }

  const std::size_t n = sweep.size();
  std::vector<SweepMember> members(n);
  for (std::size_t k = 0; k < n; ++k) {
    SweepMember& m = members[k];
    m.index = k;
    std::size_t rest = k;
    std::vector<std::size_t> idx(sweep.axes.size());
    for (std::size_t a = sweep.axes.size(); a-- > 0;) {
      const std::size_t len = sweep.axes[a].values.size();
      idx[a] = sweep.zip ? k : rest % len;
      if (!sweep.zip) rest /= len;
    }
    for (std::size_t a = 0; a < sweep.axes.size(); ++a)
      m.assignments.emplace_back(sweep.axes[a].parameter, sweep.axes[a].values[idx[a]]);
    try {
      m.config = substitute(plain, m.assignments);
    } catch (const Error& e) {
      m.error = e.what();
    }
  }
  return members;
}

Resolution resolution_from_string(std::string_view name) {
  if (name == "coarse") return Resolution::coarse;
  if (name == "default") return Resolution::standard;
  if (name == "fine") return Resolution::fine;
  throw ValidationError("resolution", "expected coarse, default or fine, got '" + std::string(name) + "'");
}

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::coarse: return "coarse";
    case Resolution::standard: return "default";
    case Resolution::fine: return "fine";
  }
  return "default";
}

ScenarioConfig apply_resolution(ScenarioConfig config, Resolution r) {
  if (r == Resolution::standard) return config;
  const double factor = r == Resolution::fine ? 0.5 : 2.0;
  config.grid.dt *= factor;
  if (config.options.scan_dt) *config.options.scan_dt *= factor;
  if (r == Resolution::fine) {
    config.grid.z_slices *= 2;
  } else {
    config.grid.z_slices = std::max<std::size_t>(1, config.grid.z_slices / 2);
  }
  return config;
}

}  // namespace mmeit::config
