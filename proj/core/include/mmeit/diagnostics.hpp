#pragma once

// Measurement emulation and derived metrics on simulated fields.

#include <span>
#include <string_view>
#include <vector>

#include "mmeit/model.hpp"
#include "mmeit/solver_full.hpp"

namespace mmeit::diagnostics {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Equivalent noise bandwidth of the gaussian analyzer filter in units of
/// its FWHM: sqrt(pi / (4 ln 2)).
inline constexpr double kGaussianEnbw = 1.0644670194312262;

enum class SpectrumMode { swept, zero_span };

std::string_view to_string(SpectrumMode mode);

struct SpectrumTrace {
  std::vector<double> frequencies;  // rad/s, beat offset from the local oscillator, ascending
  std::vector<double> power;        // |Omega|^2 units, filter peak-normalised
  double rbw = 0.0;                 // rad/s (FWHM of the filter)
  SpectrumMode mode = SpectrumMode::swept;

  /// Sum of power x bin width / ENBW; equals the field's average power.
  double integrated_power() const;
};

/// Swept heterodyne trace: the DFT power of the beat between `field` and a
/// local oscillator at absolute offset `lo_offset`, smoothed by a gaussian
/// filter of FWHM `rbw` and evaluated at every DFT bin.
/// Throws spectral_resolution when rbw < 2 pi / span or the LO beat lies
/// beyond Nyquist.
SpectrumTrace heterodyne_spectrum(const FieldEnvelope& field, double lo_offset, double rbw);

/// Power inside one rectangular rbw window centred on the field's carrier.
double zero_span_power(const FieldEnvelope& field, double rbw);
/// Same, centred on the absolute frequency `center` (rad/s).
double zero_span_power(const FieldEnvelope& field, double rbw, double center);

/// Overlaps below this are reported as 0.
inline constexpr double kOverlapFloor = 1e-12;

/// |<p, c>|^2 / (<p, p> <c, c>), or 0 below kOverlapFloor. Throws zero_energy
/// if either field is null.
double mode_overlap(const FieldEnvelope& probe, const FieldEnvelope& control);

/// ||a - b|| / ||b|| over the sample vectors.
double relative_l2(const FieldEnvelope& a, const FieldEnvelope& b);

/// Output over input energy.
double energy_transmission(const FieldEnvelope& out, const FieldEnvelope& in);

struct GroupVelocity {
  double delay = 0.0;    // s
  double v_local = 0.0;  // m/s, L / delay
  double v_lab = 0.0;    // m/s, (1/v_local + 1/c)^-1
  bool precision_warning = false;  // |delay| below two time steps
};

/// Centroid delay of `out` relative to `reference` and the implied velocities.
GroupVelocity group_velocity_estimate(const FieldEnvelope& out, const FieldEnvelope& reference,
                                      const LambdaMedium& medium);
GroupVelocity group_velocity_estimate(const full::PropagationResult& result, const FieldEnvelope& reference,
                                      const LambdaMedium& medium);

struct AdiabaticityReport {
  double margin_a = 0.0;  // min |Omega_c| T
  double margin_b = 0.0;  // min |Omega_c|^2 T T1
  double margin_c = 0.0;  // min |Omega_c|^2 T / Gamma
  double T = 0.0;         // inverse RMS bandwidth of c_c, s
  double T1 = 0.0;        // inverse RMS bandwidth of Omega_c, s
  double tau_min = 0.0;   // where the control envelope is weakest on the support of c_c
  bool mode_mismatch = false;

  double min_margin() const;
};

/// Evaluates the three adiabaticity margins. c_c = -Omega_p/Omega_c is formed
/// where the control is on and bridged across control-off gaps by linear
/// interpolation (the coherence is frozen there). The control magnitude in the
/// margins is its envelope, the running maximum of |Omega_c| over a window of
/// width T, minimised over the support of c_c. A probe present where the
/// control is absent sets mode_mismatch and leaves all margins 0, since c_c is
/// then division noise. A timescale whose
/// RMS bandwidth vanishes is capped at the grid span.
AdiabaticityReport adiabaticity_check(const FieldEnvelope& probe, const FieldEnvelope& control,
                                      const LambdaMedium& medium);

struct LinewidthFit {
  double peak_offset = 0.0;  // rad/s
  double peak_value = 0.0;
  double floor_value = 0.0;
  double fwhm = 0.0;         // rad/s
};

/// FWHM of a transmission peak sampled on ascending `offsets`. The peak is
/// refined by a parabola through the three highest samples; the half level is
/// midway between the refined peak and the scan minimum; the crossings are
/// linearly interpolated. Throws unresolved_linewidth when a side has no
/// crossing or fewer than three samples lie above half maximum.
LinewidthFit eit_linewidth(std::span<const double> offsets, std::span<const double> transmission);

struct DelayBandwidthReport {
  double bandwidth = 0.0;  // W, rad/s
  double gamma_eit = 0.0;  // rad/s
  double enhancement = 0.0;
};

DelayBandwidthReport delay_bandwidth_report(double bandwidth, double gamma_eit);
DelayBandwidthReport delay_bandwidth_report(double bandwidth, std::span<const double> offsets,
                                            std::span<const double> transmission);

}  // namespace mmeit::diagnostics
