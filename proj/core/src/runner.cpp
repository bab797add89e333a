#include "mmeit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "mmeit/diagnostics.hpp"
#include "mmeit/solver_adiabatic.hpp"
#include "mmeit/solver_full.hpp"
#include "mmeit/spectral.hpp"
#include "mmeit/waveforms.hpp"

#ifndef MMEIT_VERSION
#define MMEIT_VERSION "0.0.0"
#endif

namespace mmeit::runner {
namespace {

using config::Measurement;
using config::ScenarioConfig;
using config::SolverChoice;
namespace dg = diagnostics;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(std::size_t v) { return std::to_string(v); }

double hz(double omega) { return omega / kTwoPi; }

struct Context {
  const ScenarioConfig& cfg;
  LambdaMedium medium;
  TimeGrid grid;
  SimulationGrid sim;
  full::SolverOptions options;
  ControlProgram base_program;
  ControlProgram program;
  FieldEnvelope control_base;
  FieldEnvelope control;
  FieldEnvelope probe;
};

struct SolverOutput {
  std::string label;
  FieldEnvelope out;
};

std::vector<TimeInterval> intersect_gate(const std::vector<TimeInterval>& gate, double a, double b) {
  std::vector<TimeInterval> base = gate;
  if (base.empty()) base.push_back({a, b});
  std::vector<TimeInterval> out;
  for (const auto& g : base) {
    const double lo = std::max(g.begin, a);
    const double hi = std::min(g.end, b);
    if (hi > lo) out.push_back({lo, hi});
  }
  return out;
}

ControlProgram resolve_program(const ScenarioConfig& cfg, const TimeGrid& grid) {
  ControlProgram p;
  for (const auto& spec : cfg.control) {
    ControlComponent c = spec.component;
    if (spec.rms_amplitude) c.amplitude = *spec.rms_amplitude / modulation_rms(grid, c.modulation);
    p.components.push_back(std::move(c));
  }
  return p;
}

ControlProgram apply_conversion(const ControlProgram& base, const config::ConversionSpec& cv, const TimeGrid& grid) {
  const double t_lo = grid.t_start() - grid.dt();
  const double t_hi = grid.t_end() + grid.dt();
  const double f = cv.power_fraction;
  ControlProgram out;
  for (const auto& c : base.components) {
    ControlComponent before = c;
    before.gate = intersect_gate(c.gate, t_lo, cv.switch_time);
    if (!before.gate.empty()) out.components.push_back(before);
    const auto after = intersect_gate(c.gate, cv.switch_time, t_hi);
    if (after.empty()) continue;
    if (f < 1.0) {
      ControlComponent keep = c;
      keep.amplitude = c.amplitude * std::sqrt(1.0 - f);
      keep.gate = after;
      out.components.push_back(keep);
    }
    if (f > 0.0) {
      ControlComponent shifted = c;
      shifted.amplitude = c.amplitude * std::sqrt(f);
      shifted.frequency_offset = c.frequency_offset + cv.offset;
      shifted.gate = after;
      out.components.push_back(shifted);
    }
  }
  return out;
}

FieldEnvelope zero_control(const TimeGrid& grid) { return FieldEnvelope::zeros(grid); }

Context build_context(const ScenarioConfig& cfg) {
  const LambdaMedium medium = cfg.medium.build();
  ControlProgram tmp;
  for (const auto& spec : cfg.control) tmp.components.push_back(spec.component);
  double max_hz = tmp.max_frequency_hz();
  if (cfg.conversion) max_hz = std::max(max_hz, std::abs(cfg.conversion->offset) / kTwoPi);
  const TimeGrid grid = cfg.grid.time_grid(max_hz);
  SimulationGrid sim =
      SimulationGrid::make(grid, cfg.grid.z_slices, medium, cfg.grid.velocity_classes, cfg.grid.quadrature);

  full::SolverOptions options;
  options.integrator = cfg.integrator;
  options.threads = cfg.solver_threads;

  ControlProgram base = resolve_program(cfg, grid);
  ControlProgram program = cfg.conversion ? apply_conversion(base, *cfg.conversion, grid) : base;
  FieldEnvelope control_base = base.components.empty() ? zero_control(grid) : evaluate_program(base, grid);
  FieldEnvelope control = program.components.empty() ? zero_control(grid) : evaluate_program(program, grid);

  const auto& p = cfg.probe;
  double amplitude = p.amplitude ? *p.amplitude : *p.rms_amplitude;
  if (p.rms_amplitude && p.matched) amplitude = *p.rms_amplitude / modulation_rms(grid, base.components.front().modulation);
  FieldEnvelope probe = sample_envelope(grid, p.envelope, 1.0, p.frequency_offset);
  if (p.matched) probe = matched_probe(control_base, probe);
  probe = probe.scaled(amplitude);

  return Context{cfg,
                 medium,
                 grid,
                 std::move(sim),
                 options,
                 std::move(base),
                 std::move(program),
                 std::move(control_base),
                 std::move(control),
                 std::move(probe)};
}

FieldEnvelope propagate_adiabatic(const Context& ctx, const FieldEnvelope& probe, const FieldEnvelope& control) {
  const auto state = adiabatic::from_fields(probe, control);
  const auto moved = adiabatic::propagate(state, ctx.medium, ctx.medium.length());
  return adiabatic::to_probe(moved, control);
}

std::vector<SolverOutput> propagate_all(const Context& ctx, const FieldEnvelope& probe, const FieldEnvelope& control,
                                        RunRecord* rec) {
  std::vector<SolverOutput> outs;
  if (ctx.cfg.solver != SolverChoice::adiabatic) {
    auto r = full::propagate_full(probe, control, ctx.medium, ctx.sim, ctx.options);
    if (rec && r.metadata.weak_probe_warning)
      rec->warnings.push_back("full solver: max |c_c| " + num(r.metadata.max_coherence) + " exceeds the weak-probe limit");
    outs.push_back({"full", std::move(r.probe_out)});
  }
  if (ctx.cfg.solver != SolverChoice::full) outs.push_back({"adiabatic", propagate_adiabatic(ctx, probe, control)});
  return outs;
}

void add(RunRecord& rec, const std::string& name, double value) { rec.scalars.emplace_back(name, value); }

Table& table(RunRecord& rec, const std::string& stem, std::vector<std::string> columns) {
  auto [it, inserted] = rec.tables.try_emplace(stem);
  if (inserted) it->second.columns = std::move(columns);
  return it->second;
}

/// Mean |out|^2 / mean |in|^2 over the second half of the input plateau
/// (samples within 1% of the input peak). Not reported for gaussian probes,
/// which have no plateau.
double steady_transmission(const FieldEnvelope& out, const FieldEnvelope& in) {
  const double peak = in.peak_magnitude();
  std::size_t first = in.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (std::abs(in[i]) >= 0.99 * peak) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first >= in.size() || last < first + 4) return std::numeric_limits<double>::quiet_NaN();
  double num_sum = 0.0;
  double den_sum = 0.0;
  for (std::size_t i = (first + last) / 2; i <= last; ++i) {
    num_sum += std::norm(out[i]);
    den_sum += std::norm(in[i]);
  }
  return num_sum / den_sum;
}

void measure_transmission(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  auto& t = table(rec, "transmission", {"solver", "energy_in", "energy_out", "transmission", "steady_transmission"});
  for (const auto& o : outs) {
    const double tr = dg::energy_transmission(o.out, ctx.probe);
    const double steady = ctx.cfg.probe.envelope.shape == EnvelopeShape::gaussian
                              ? std::numeric_limits<double>::quiet_NaN()
                              : steady_transmission(o.out, ctx.probe);
    t.rows.push_back({o.label, num(ctx.probe.energy()), num(o.out.energy()), num(tr), num(steady)});
    add(rec, o.label + ".transmission", tr);
    if (!std::isnan(steady)) add(rec, o.label + ".steady_transmission", steady);
  }
}

void measure_zero_span(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const double rbw = ctx.cfg.options.zero_span_rbw;
  const double p_in = dg::zero_span_power(ctx.probe, rbw);
  auto& t = table(rec, "zero_span", {"solver", "rbw_Hz", "power_in", "power_out", "transmission"});
  for (const auto& o : outs) {
    const double p_out = dg::zero_span_power(o.out, rbw);
    const double tr = p_in > 0.0 ? p_out / p_in : 0.0;
    t.rows.push_back({o.label, num(hz(rbw)), num(p_in), num(p_out), num(tr)});
    add(rec, o.label + ".zero_span_power", p_out);
    add(rec, o.label + ".zero_span_transmission", tr);
  }
}

void measure_spectrum(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const auto& opt = ctx.cfg.options;
  const auto in_trace = dg::heterodyne_spectrum(ctx.probe, opt.lo_offset, opt.spectrum_rbw);
  const double ref = *std::max_element(in_trace.power.begin(), in_trace.power.end());
  auto& t = table(rec, "spectrum", {"solver", "freq_Hz", "power_rel"});
  auto emit = [&](const std::string& label, const dg::SpectrumTrace& trace) {
    for (std::size_t i = 0; i < trace.frequencies.size(); ++i) {
      if (std::abs(trace.frequencies[i]) > opt.spectrum_span) continue;
      t.rows.push_back({label, num(hz(trace.frequencies[i])), num(ref > 0.0 ? trace.power[i] / ref : 0.0)});
    }
  };
  emit("input", in_trace);
  for (const auto& o : outs) {
    const auto trace = dg::heterodyne_spectrum(o.out, opt.lo_offset, opt.spectrum_rbw);
    emit(o.label, trace);
    const auto peak_it = std::max_element(trace.power.begin(), trace.power.end());
    const double peak = *peak_it;
    const auto k = static_cast<std::size_t>(peak_it - trace.power.begin());
    add(rec, o.label + ".spectrum_peak_Hz", hz(trace.frequencies[k] + opt.lo_offset));
    add(rec, o.label + ".spectrum_peak_rel", ref > 0.0 ? peak / ref : 0.0);
    if (opt.line_spacing && peak > 0.0) {
      double off_line = 0.0;
      for (std::size_t i = 0; i < trace.frequencies.size(); ++i) {
        const double f_abs = trace.frequencies[i] + opt.lo_offset - ctx.cfg.probe.frequency_offset;
        const double dist = std::abs(std::remainder(f_abs, *opt.line_spacing));
        if (dist > opt.line_tolerance) off_line = std::max(off_line, trace.power[i]);
      }
      add(rec, o.label + ".secondary_level", off_line / peak);
    }
  }
}

void measure_delay(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const double power = ctx.control.average_power();
  const double predicted = power > 0.0 ? ctx.medium.coupling_density() * ctx.medium.length() / power
                                       : std::numeric_limits<double>::infinity();
  auto& t = table(rec, "delay",
                  {"solver", "delay_s", "predicted_delay_s", "v_local_m_s", "v_lab_m_s", "precision_warning"});
  for (const auto& o : outs) {
    const auto gv = dg::group_velocity_estimate(o.out, ctx.probe, ctx.medium);
    t.rows.push_back({o.label, num(gv.delay), num(predicted), num(gv.v_local), num(gv.v_lab),
                      gv.precision_warning ? "true" : "false"});
    add(rec, o.label + ".delay_s", gv.delay);
    add(rec, o.label + ".v_lab_m_s", gv.v_lab);
    if (gv.precision_warning) rec.warnings.push_back(o.label + ": delay below two time steps");
  }
  add(rec, "predicted_delay_s", predicted);
}

void measure_overlap(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const double in = dg::mode_overlap(ctx.probe, ctx.control);
  auto& t = table(rec, "overlap", {"solver", "overlap_in", "overlap_out", "transmission"});
  for (const auto& o : outs) {
    const double out = o.out.energy() > 0.0 ? dg::mode_overlap(o.out, ctx.control) : 0.0;
    const double tr = dg::energy_transmission(o.out, ctx.probe);
    t.rows.push_back({o.label, num(in), num(out), num(tr)});
    add(rec, o.label + ".overlap_out", out);
  }
  add(rec, "overlap_in", in);
}

void measure_margins(const Context& ctx, RunRecord& rec) {
  const auto& control = ctx.cfg.conversion ? ctx.control_base : ctx.control;
  const auto m = dg::adiabaticity_check(ctx.probe, control, ctx.medium);
  auto& t = table(rec, "margins", {"margin_a", "margin_b", "margin_c", "T_s", "T1_s", "tau_min_s", "mode_mismatch"});
  t.rows.push_back({num(m.margin_a), num(m.margin_b), num(m.margin_c), num(m.T), num(m.T1), num(m.tau_min),
                    m.mode_mismatch ? "true" : "false"});
  add(rec, "margin_a", m.margin_a);
  add(rec, "margin_b", m.margin_b);
  add(rec, "margin_c", m.margin_c);
  if (m.mode_mismatch) rec.warnings.push_back("probe present where the control is off (mode mismatch)");
}

double spectral_peak(const FieldEnvelope& field) {
  const auto p = spectral::power_spectrum(field);
  const auto f = spectral::bin_frequencies(field.grid());
  const auto k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  return f[k] + field.carrier_offset();
}

void measure_conversion(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const auto& cv = *ctx.cfg.conversion;
  const auto refs = propagate_all(ctx, ctx.probe, ctx.control_base, nullptr);
  const double dt = ctx.grid.dt();
  const double power = ctx.control_base.average_power();
  const double predicted = ctx.medium.coupling_density() * ctx.medium.length() / power;
  const double carrier = ctx.cfg.probe.frequency_offset;
  const double half = 0.5 * std::abs(cv.offset);
  const double peak_in = spectral_peak(ctx.probe);
  const bool two_colour = cv.power_fraction > 0.0 && cv.power_fraction < 1.0;

  auto& t = table(rec, "conversion",
                  {"solver", "peak_shift_Hz", "efficiency", "colour_ratio", "expected_colour_ratio", "centroid_1_s",
                   "centroid_2_s", "centroid_diff_steps", "delay_s", "predicted_delay_s"});
  for (std::size_t s = 0; s < outs.size(); ++s) {
    const auto& out = outs[s].out;
    const std::string& label = outs[s].label;
    const double shift = spectral_peak(out) - peak_in;
    const double eff = out.energy() / refs[s].out.energy();
    const auto c1 = spectral::bandpass(out, carrier, half);
    const auto c2 = spectral::bandpass(out, carrier + cv.offset, half);
    const double e1 = c1.energy();
    const double e2 = c2.energy();
    const double ratio = e1 > 0.0 ? e2 / e1 : std::numeric_limits<double>::infinity();
    const double expected = cv.power_fraction < 1.0 ? cv.power_fraction / (1.0 - cv.power_fraction)
                                                    : std::numeric_limits<double>::infinity();
    const double delay = out.centroid() - ctx.probe.centroid();
    double cen1 = std::numeric_limits<double>::quiet_NaN();
    double cen2 = c2.energy() > 0.0 ? c2.centroid() : std::numeric_limits<double>::quiet_NaN();
    if (two_colour) cen1 = c1.centroid();
    const double diff = two_colour ? (cen2 - cen1) / dt : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({label, num(hz(shift)), num(eff), num(ratio), num(expected), num(cen1), num(cen2), num(diff),
                      num(delay), num(predicted)});
    add(rec, label + ".peak_shift_Hz", hz(shift));
    add(rec, label + ".conversion_efficiency", eff);
    if (two_colour) {
      add(rec, label + ".colour_ratio", ratio);
      add(rec, label + ".centroid_1_s", cen1);
      add(rec, label + ".centroid_2_s", cen2);
    }
    add(rec, label + ".conversion_delay_s", delay);
  }
  add(rec, "conversion_predicted_delay_s", predicted);
}

void measure_storage(const Context& ctx, RunRecord& rec) {
  const auto& st = *ctx.cfg.storage;
  const auto r = full::store_and_retrieve(ctx.probe, ctx.base_program, st.t_off, st.t_on, ctx.medium, ctx.sim,
                                          ctx.options);
  const double expected = std::exp(-2.0 * ctx.medium.ground_decoherence() * r.storage_time);
  const double error_steps = (r.added_delay - r.storage_time) / ctx.grid.dt();
  auto& t = table(rec, "storage",
                  {"storage_time_s", "efficiency", "expected_efficiency", "added_delay_s", "delay_error_steps",
                   "span_begin_m", "span_end_m"});
  t.rows.push_back({num(r.storage_time), num(r.efficiency), num(expected), num(r.added_delay), num(error_steps),
                    num(r.span_begin), num(r.span_end)});
  add(rec, "storage.efficiency", r.efficiency);
  add(rec, "storage.expected_efficiency", expected);
  add(rec, "storage.added_delay_s", r.added_delay);
}

void measure_waveform(const Context& ctx, const std::vector<SolverOutput>& outs, RunRecord& rec) {
  const std::size_t n = ctx.grid.size();
  const std::size_t stride = std::max<std::size_t>(1, (n + ctx.cfg.options.waveform_points - 1) / ctx.cfg.options.waveform_points);
  auto& t = table(rec, "waveform", {"solver", "tau_s", "re", "im", "power"});
  auto emit = [&](const std::string& label, const FieldEnvelope& f) {
    for (std::size_t i = 0; i < n; i += stride) {
      t.rows.push_back({label, num(ctx.grid.time(i)), num(f[i].real()), num(f[i].imag()), num(std::norm(f[i]))});
    }
  };
  emit("input", ctx.probe);
  emit("control", ctx.control);
  for (const auto& o : outs) emit(o.label, o.out);
}

void measure_eit_scan(const Context& ctx, RunRecord& rec) {
  const auto& opt = ctx.cfg.options;
  config::GridSpec gs = ctx.cfg.grid;
  if (opt.scan_duration) gs.duration = *opt.scan_duration;
  if (opt.scan_dt) gs.dt = *opt.scan_dt;
  const TimeGrid grid = gs.time_grid(hz(opt.scan_span));
  const SimulationGrid sim = SimulationGrid::make(grid, gs.z_slices, ctx.medium, gs.velocity_classes, gs.quadrature);
  const double amplitude = std::sqrt(ctx.control_base.average_power());
  const double span = grid.t_end() - grid.t_start();
  Envelope flat;
  flat.shape = EnvelopeShape::flattop;
  flat.start = grid.t_start() + 0.05 * span;
  flat.end = grid.t_start() + 0.8 * span;
  flat.rise = 0.05 * span;
  const auto probe = sample_envelope(grid, flat, ctx.probe.peak_magnitude());
  const std::size_t lo = grid.size() / 2;
  const std::size_t hi = (3 * grid.size()) / 4;

  std::vector<double> offsets(opt.scan_points);
  std::vector<double> trans(opt.scan_points);
  auto& t = table(rec, "eit_scan", {"offset_Hz", "transmission"});
  for (std::size_t k = 0; k < opt.scan_points; ++k) {
    offsets[k] = -opt.scan_span + 2.0 * opt.scan_span * static_cast<double>(k) / static_cast<double>(opt.scan_points - 1);
    ControlProgram cw;
    ControlComponent c;
    c.amplitude = amplitude;
    c.frequency_offset = offsets[k];
    cw.components.push_back(c);
    const auto control = evaluate_program(cw, grid);
    full::SolverOptions o = ctx.options;
    o.check_window = false;
    const auto r = full::propagate_full(probe, control, ctx.medium, sim, o);
    double num_sum = 0.0;
    double den_sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      num_sum += std::norm(r.probe_out[i]);
      den_sum += std::norm(probe[i]);
    }
    trans[k] = num_sum / den_sum;
    t.rows.push_back({num(hz(offsets[k])), num(trans[k])});
  }
  const auto report = dg::delay_bandwidth_report(opt.modulation_bandwidth, offsets, trans);
  add(rec, "eit.gamma_eit_Hz", hz(report.gamma_eit));
  add(rec, "eit.bandwidth_Hz", hz(report.bandwidth));
  add(rec, "eit.enhancement", report.enhancement);
  add(rec, "eit.peak_transmission", *std::max_element(trans.begin(), trans.end()));
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << csv_cell(columns[i]);
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json run_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["run_index"] = r.run_index;
  j["config_hash"] = r.config_hash;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["status"] = r.ok() ? "ok" : "error";
  if (r.error) j["error"] = {{"kind", std::string(to_string(r.error->kind))}, {"message", r.error->message}};
  j["warnings"] = r.warnings;
  j["scalars"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.scalars) j["scalars"][k] = json_number(v);
  j["provenance"] = {{"version", r.provenance.version},
                     {"resolution", r.provenance.resolution},
                     {"n_time_samples", r.provenance.n_time_samples},
                     {"dt_s", r.provenance.dt},
                     {"z_slices", r.provenance.z_slices},
                     {"velocity_classes", r.provenance.velocity_classes}};
  return j;
}

}  // namespace

std::string_view version() { return MMEIT_VERSION; }

std::optional<double> RunRecord::scalar(std::string_view name) const {
  for (const auto& [k, v] : scalars)
    if (k == name) return v;
  return std::nullopt;
}

RunRecord execute(const ScenarioConfig& cfg, std::size_t run_index,
                  std::vector<std::pair<std::string, std::string>> parameters) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.run_index = run_index;
  rec.scenario = cfg.name;
  rec.config_hash = config::config_hash(cfg);
  rec.parameters = std::move(parameters);
  rec.provenance.version = std::string(version());
  rec.provenance.n_time_samples = cfg.grid.n_samples();
  rec.provenance.dt = cfg.grid.dt;
  rec.provenance.z_slices = cfg.grid.z_slices;
  rec.provenance.velocity_classes = cfg.grid.velocity_classes;

  try {
    if (cfg.measurements.empty()) {
      rec.provenance.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return rec;
    }
    const Context ctx = build_context(cfg);
    const auto outs = propagate_all(ctx, ctx.probe, ctx.control, &rec);
    for (auto m : cfg.measurements) {
      switch (m) {
        case Measurement::transmission: measure_transmission(ctx, outs, rec); break;
        case Measurement::spectrum: measure_spectrum(ctx, outs, rec); break;
        case Measurement::zero_span: measure_zero_span(ctx, outs, rec); break;
        case Measurement::delay: measure_delay(ctx, outs, rec); break;
        case Measurement::overlap: measure_overlap(ctx, outs, rec); break;
        case Measurement::margins: measure_margins(ctx, rec); break;
        case Measurement::conversion: measure_conversion(ctx, outs, rec); break;
        case Measurement::storage: measure_storage(ctx, rec); break;
        case Measurement::waveform: measure_waveform(ctx, outs, rec); break;
        case Measurement::eit_scan: measure_eit_scan(ctx, rec); break;
      }
    }
    if (cfg.solver == SolverChoice::both) {
      const double l2 = dg::relative_l2(outs[0].out, outs[1].out);
      table(rec, "cross_solver", {"relative_l2"}).rows.push_back({num(l2)});
      add(rec, "cross_solver.relative_l2", l2);
    }
  } catch (const Error& e) {
    rec.error = RunFailure{e.kind(), e.what()};
  } catch (const std::exception& e) {
    rec.error = RunFailure{ErrorKind::invalid_argument, e.what()};
  }
  if (rec.error) {
    rec.scalars.clear();
    rec.tables.clear();
  }
  rec.provenance.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

namespace {

std::filesystem::path output_dir(const ScenarioConfig& cfg, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  return std::filesystem::path(cfg.outputs.directory) / cfg.name;
}

}  // namespace

RunRecord run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioConfig cfg = config::apply_resolution(config, options.resolution);
  cfg.sweep.reset();
  RunRecord rec = execute(cfg);
  rec.provenance.resolution = std::string(config::to_string(options.resolution));
  if (options.write) write_outputs(cfg, {rec}, output_dir(cfg, options), options.resolution);
  if (rec.error) throw Error(rec.error->kind, "scenario '" + cfg.name + "': " + rec.error->message);
  return rec;
}

std::vector<RunRecord> run_sweep(const ScenarioConfig& config, const config::SweepSpec& sweep,
                                 const RunOptions& options) {
  const auto members = config::expand_sweep(config, sweep);
  std::vector<RunRecord> records(members.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < members.size(); k = next++) {
      const auto& m = members[k];
      if (m.config) {
        records[k] = execute(config::apply_resolution(*m.config, options.resolution), m.index, m.assignments);
      } else {
        RunRecord& r = records[k];
        r.run_index = m.index;
        r.scenario = config.name;
        r.parameters = m.assignments;
        r.provenance.version = std::string(version());
        r.error = RunFailure{ErrorKind::validation, m.error};
      }
      records[k].provenance.resolution = std::string(config::to_string(options.resolution));
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, members.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (options.write) {
    ScenarioConfig base = config::apply_resolution(config, options.resolution);
    base.sweep = sweep;
    write_outputs(base, records, output_dir(base, options), options.resolution);
  }
  return records;
}

std::vector<RunRecord> run(const ScenarioConfig& config, const RunOptions& options) {
  if (config.sweep) return run_sweep(config, *config.sweep, options);
  ScenarioConfig cfg = config::apply_resolution(config, options.resolution);
  RunRecord rec = execute(cfg);
  rec.provenance.resolution = std::string(config::to_string(options.resolution));
  std::vector<RunRecord> records{std::move(rec)};
  if (options.write) write_outputs(cfg, records, output_dir(cfg, options), options.resolution);
  return records;
}

void write_outputs(const ScenarioConfig& cfg, const std::vector<RunRecord>& records, const std::filesystem::path& dir,
                   config::Resolution resolution) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  const auto has_format = [&](const char* f) {
    return std::find(cfg.outputs.formats.begin(), cfg.outputs.formats.end(), f) != cfg.outputs.formats.end();
  };

  write_text(dir / "config.yaml", config::serialize_config(cfg));

  if (has_format("csv")) {
    std::vector<std::string> stems;
    for (const auto& r : records)
      for (const auto& [stem, tbl] : r.tables)
        if (std::find(stems.begin(), stems.end(), stem) == stems.end()) stems.push_back(stem);
    for (const auto& stem : stems) {
      std::vector<std::string> columns{"run_index"};
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : records) {
        const auto it = r.tables.find(stem);
        if (it == r.tables.end()) continue;
        if (columns.size() == 1) columns.insert(columns.end(), it->second.columns.begin(), it->second.columns.end());
        for (const auto& row : it->second.rows) {
          std::vector<std::string> full_row{num(r.run_index)};
          full_row.insert(full_row.end(), row.begin(), row.end());
          rows.push_back(std::move(full_row));
        }
      }
      write_csv(dir / (stem + ".csv"), columns, rows);
    }

    if (cfg.sweep) {
      std::vector<std::string> params;
      for (const auto& axis : cfg.sweep->axes) params.push_back(axis.parameter);
      std::vector<std::string> scalars;
      for (const auto& r : records)
        for (const auto& [k, v] : r.scalars)
          if (std::find(scalars.begin(), scalars.end(), k) == scalars.end()) scalars.push_back(k);
      std::vector<std::string> columns{"run_index", "status"};
      columns.insert(columns.end(), params.begin(), params.end());
      columns.insert(columns.end(), scalars.begin(), scalars.end());
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : records) {
        std::vector<std::string> row{num(r.run_index), r.ok() ? "ok" : "error"};
        for (std::size_t a = 0; a < params.size(); ++a)
          row.push_back(a < r.parameters.size() ? r.parameters[a].second : "");
        for (const auto& name : scalars) {
          const auto v = r.scalar(name);
          row.push_back(v ? num(*v) : "");
        }
        rows.push_back(std::move(row));
      }
      write_csv(dir / "sweep_summary.csv", columns, rows);
    }
  }

  if (has_format("json")) {
    nlohmann::ordered_json summary;
    summary["scenario"] = cfg.name;
    summary["description"] = cfg.description;
    summary["config_hash"] = config::config_hash(cfg);
    summary["version"] = std::string(version());
    summary["resolution"] = std::string(config::to_string(resolution));
    summary["runs"] = nlohmann::ordered_json::array();
    std::filesystem::create_directories(dir / "runs", ec);
    for (const auto& r : records) {
      auto j = run_json(r);
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu.json", r.run_index);
      write_text(dir / "runs" / name, j.dump(2) + "\n");
      summary["runs"].push_back(std::move(j));
    }
    write_text(dir / "summary.json", summary.dump(2) + "\n");
  }

  nlohmann::ordered_json timing;
  double total = 0.0;
  timing["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    total += r.provenance.wall_seconds;
    timing["runs"].push_back({{"run_index", r.run_index}, {"wall_seconds", r.provenance.wall_seconds}});
  }
  timing["total_wall_seconds"] = total;
  timing["runtime_budget_s"] = cfg.runtime_budget;
  timing["over_budget"] = total > cfg.runtime_budget;
  write_text(dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace mmeit::runner
