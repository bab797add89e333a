#include "mmeit/waveforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmeit {

std::string_view to_string(EnvelopeShape shape) {
  switch (shape) {
    case EnvelopeShape::constant: return "constant";
    case EnvelopeShape::gaussian: return "gaussian";
    case EnvelopeShape::flattop: return "flattop";
  }
  return "constant";
}

EnvelopeShape envelope_shape_from_string(std::string_view name) {
  if (name == "constant") return EnvelopeShape::constant;
  if (name == "gaussian") return EnvelopeShape::gaussian;
  if (name == "flattop") return EnvelopeShape::flattop;
  throw_invalid("unknown envelope shape '" + std::string(name) + "'");
}

namespace {

// 0 below -w/2, 1 above +w/2, raised-cosine in between.
double smooth_step(double x, double width) {
  if (width <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  if (x <= -0.5 * width) return 0.0;
  if (x >= 0.5 * width) return 1.0;
  return 0.5 * (1.0 + std::sin(std::numbers::pi * x / width));
}

}  // namespace

double Envelope::operator()(double t) const {
  switch (shape) {
    case EnvelopeShape::constant:
      return 1.0;
    case EnvelopeShape::gaussian: {
      const double x = (t - center) / duration;
      return std::exp(-2.0 * std::numbers::ln2 * x * x);
    }
    case EnvelopeShape::flattop:
      return smooth_step(t - start, rise) * smooth_step(end - t, rise);
  }
  return 0.0;
}

void Envelope::validate() const {
  if (shape == EnvelopeShape::gaussian && !(duration > 0.0))
    throw_invalid("envelope: gaussian duration must be > 0");
  if (shape == EnvelopeShape::flattop) {
    if (!(end > start)) throw_invalid("envelope: flattop end must exceed start");
    if (rise < 0.0 || rise > end - start) throw_invalid("envelope: flattop rise must be in [0, end - start]");
  }
}

void PulseTrainSpec::validate() const {
  if (!(frequency_hz >= 0.0) || !std::isfinite(frequency_hz)) throw_invalid("modulation: frequency must be >= 0");
  if (!(duty > 0.0) || duty > 1.0) throw_invalid("modulation: duty must be in (0, 1]");
  if (!std::isfinite(phase)) throw_invalid("modulation: phase must be finite");
  if (edge_rise < 0.0) throw_invalid("modulation: edge_rise must be >= 0");
  const double rho = edge_rise * frequency_hz;
  if (frequency_hz > 0.0 && duty < 1.0 && rho > std::min(duty, 1.0 - duty))
    throw_invalid("modulation: edge_rise exceeds the on or off time");
}

void ControlComponent::validate() const {
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw_invalid("control component: amplitude must be >= 0");
  if (!std::isfinite(frequency_offset)) throw_invalid("control component: frequency_offset must be finite");
  envelope.validate();
  if (modulation) modulation->validate();
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (!(gate[i].end > gate[i].begin)) throw_invalid("control component: gate interval must have end > begin");
    if (i > 0 && gate[i].begin < gate[i - 1].end)
      throw_invalid("control component: gate intervals must be sorted and non-overlapping");
  }
}

bool ControlComponent::operator==(const ControlComponent& other) const {
  if (gate.size() != other.gate.size()) return false;
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i].begin != other.gate[i].begin || gate[i].end != other.gate[i].end) return false;
  }
  return amplitude == other.amplitude && frequency_offset == other.frequency_offset && phase == other.phase &&
         envelope == other.envelope && modulation == other.modulation;
}

void ControlProgram::validate() const {
  if (components.empty()) throw_invalid("control program: at least one component is required");
  for (const auto& c : components) c.validate();
}

double ControlProgram::max_frequency_hz() const {
  double f = 0.0;
  for (const auto& c : components) {
    if (c.modulation && c.modulation->duty < 1.0) f = std::max(f, c.modulation->frequency_hz);
    f = std::max(f, std::abs(c.frequency_offset) / kTwoPi);
  }
  return f;
}

bool gate_open(const std::vector<TimeInterval>& gate, double t) {
  if (gate.empty()) return true;
  return std::any_of(gate.begin(), gate.end(), [t](const TimeInterval& g) { return t >= g.begin && t < g.end; });
}

std::vector<TimeInterval> close_gate(const std::vector<TimeInterval>& gate, double t_off, double t_on,
                                     double t_min, double t_max) {
  std::vector<TimeInterval> base = gate;
  if (base.empty()) base.push_back({t_min, std::nextafter(t_max, INFINITY)});
  if (!(t_on > t_off)) return base;
  std::vector<TimeInterval> out;
  for (const auto& g : base) {
    if (g.end <= t_off || g.begin >= t_on) {
      out.push_back(g);
      continue;
    }
    if (g.begin < t_off) out.push_back({g.begin, t_off});
    if (g.end > t_on) out.push_back({t_on, g.end});
  }
  return out;
}

FieldEnvelope pulse_train(const TimeGrid& grid, double frequency_hz, double duty, double phase, double edge_rise) {
  PulseTrainSpec{frequency_hz, duty, phase, edge_rise}.validate();
  grid.require_resolves(frequency_hz);
  std::vector<Complex> s(grid.size(), Complex(1.0, 0.0));
  if (duty >= 1.0 || frequency_hz == 0.0) return FieldEnvelope(grid, std::move(s));
  constexpr double eps = 1e-9;
  const double rho = edge_rise * frequency_hz;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.time(i) * frequency_hz - phase;
    const double r = x - std::floor(x + eps);  // position within the period, [0, 1)
    double v;
    if (rho <= 0.0) {
      v = r < duty - eps ? 1.0 : 0.0;
    } else {
      const double s_wrapped = r < 0.5 * (1.0 + duty) ? r : r - 1.0;
      v = smooth_step(s_wrapped, rho) * smooth_step(duty - s_wrapped, rho);
    }
    s[i] = Complex(v, 0.0);
  }
  return FieldEnvelope(grid, std::move(s));
}

double modulation_rms(const TimeGrid& grid, const std::optional<PulseTrainSpec>& modulation) {
  if (!modulation || modulation->duty >= 1.0 || modulation->frequency_hz == 0.0) return 1.0;
  const auto train = pulse_train(grid, modulation->frequency_hz, modulation->duty, modulation->phase,
                                 modulation->edge_rise);
  return std::sqrt(train.average_power());
}

FieldEnvelope evaluate_program(const ControlProgram& program, const TimeGrid& grid) {
  program.validate();
  grid.require_resolves(program.max_frequency_hz());
  std::vector<Complex> total(grid.size());
  for (const auto& c : program.components) {
    std::optional<FieldEnvelope> train;
    if (c.modulation && c.modulation->duty < 1.0)
      train = pulse_train(grid, c.modulation->frequency_hz, c.modulation->duty, c.modulation->phase,
                          c.modulation->edge_rise);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid.time(i);
      if (!gate_open(c.gate, t)) continue;
      double a = c.amplitude * c.envelope(t);
      if (train) a *= (*train)[i].real();
      if (a == 0.0) continue;
      total[i] += std::polar(a, c.frequency_offset * t + c.phase);
    }
  }
  return FieldEnvelope(grid, std::move(total));
}

FieldEnvelope matched_probe(const FieldEnvelope& control_mode, const FieldEnvelope& envelope) {
  if (!(control_mode.grid() == envelope.grid())) throw_invalid("matched_probe: grid mismatch");
  const double peak = control_mode.peak_magnitude();
  if (peak <= 0.0) throw Error(ErrorKind::zero_energy, "matched_probe: control mode is identically zero");
  std::vector<Complex> out(envelope.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = envelope[i] * (control_mode[i] / peak);
  return FieldEnvelope(envelope.grid(), std::move(out), envelope.carrier_offset());
}

FieldEnvelope sample_envelope(const TimeGrid& grid, const Envelope& envelope, double amplitude,
                              double frequency_offset) {
  envelope.validate();
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = grid.time(i);
    out[i] = std::polar(amplitude * envelope(t), frequency_offset * t);
  }
  return FieldEnvelope(grid, std::move(out));
}

}  // namespace mmeit
