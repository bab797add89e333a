#pragma once

// Control and probe temporal modes: square pulse trains, slow envelopes,
// gates and multi-frequency control programs.

#include <optional>
#include <string_view>
#include <vector>

#include "mmeit/error.hpp"
#include "mmeit/model.hpp"

namespace mmeit {

enum class EnvelopeShape { constant, gaussian, flattop };

std::string_view to_string(EnvelopeShape shape);
EnvelopeShape envelope_shape_from_string(std::string_view name);

/// Slow envelope, unit peak.
///  - constant: 1 everywhere.
///  - gaussian: intensity FWHM `duration` centred on `center`.
///  - flattop: 1 on [start, end], raised-cosine edges of width `rise`
///    centred on start and end.
struct Envelope {
  EnvelopeShape shape = EnvelopeShape::constant;
  double center = 0.0;
  double duration = 0.0;
  double start = 0.0;
  double end = 0.0;
  double rise = 0.0;

  double operator()(double t) const;
  void validate() const;

  bool operator==(const Envelope&) const = default;
};

/// Square-wave modulation; frequency 0 or duty 1 is unmodulated. `phase` is a
/// fraction of a period; `edge_rise` (s) optionally replaces the
/// sample-aligned edges by raised-cosine edges centred on the nominal
/// switching times.
struct PulseTrainSpec {
  double frequency_hz = 0.0;
  double duty = 1.0;
  double phase = 0.0;
  double edge_rise = 0.0;

  void validate() const;
  bool operator==(const PulseTrainSpec&) const = default;
};

struct ControlComponent {
  double amplitude = 0.0;          // rad/s
  double frequency_offset = 0.0;   // rad/s, two-photon offset of this colour
  double phase = 0.0;              // rad, relative phase at tau = 0
  Envelope envelope;
  std::vector<TimeInterval> gate;  // on-intervals; empty means always on
  std::optional<PulseTrainSpec> modulation;

  void validate() const;
  bool operator==(const ControlComponent& other) const;
};

struct ControlProgram {
  std::vector<ControlComponent> components;

  void validate() const;
  /// Highest frequency (Hz) the grid must resolve: modulation rates and
  /// colour offsets.
  double max_frequency_hz() const;
  bool operator==(const ControlProgram&) const = default;
};

/// Unit-amplitude real square wave on the grid.
FieldEnvelope pulse_train(const TimeGrid& grid, double frequency_hz, double duty, double phase = 0.0,
                          double edge_rise = 0.0);

/// Sum over components of amplitude x envelope x gate x modulation x
/// exp(i (offset tau + phase)).
FieldEnvelope evaluate_program(const ControlProgram& program, const TimeGrid& grid);

/// `envelope` multiplied pointwise by the control's fast factor (the control
/// normalised to unit peak).
FieldEnvelope matched_probe(const FieldEnvelope& control_mode, const FieldEnvelope& envelope);

/// Samples `amplitude * envelope(tau) * exp(i offset tau)`.
FieldEnvelope sample_envelope(const TimeGrid& grid, const Envelope& envelope, double amplitude,
                              double frequency_offset = 0.0);

/// sqrt of the mean square of a modulation on the grid (sqrt(duty) for
/// sample-aligned edges).
double modulation_rms(const TimeGrid& grid, const std::optional<PulseTrainSpec>& modulation);

/// True if `t` lies inside one of the on-intervals (or the gate is empty).
bool gate_open(const std::vector<TimeInterval>& gate, double t);

/// Complement of [t_off, t_on) applied to an existing gate.
std::vector<TimeInterval> close_gate(const std::vector<TimeInterval>& gate, double t_off, double t_on,
                                     double t_min, double t_max);

}  // namespace mmeit
