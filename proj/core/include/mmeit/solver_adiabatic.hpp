#pragma once

// Ideal adiabatic propagation of the dark-state coherence c_c = -Omega_p/Omega_c
// along characteristics of d c_c/d zeta = -(1/V) d c_c/d tau, V = |Omega_c|^2/g.

#include <vector>

#include "mmeit/model.hpp"

namespace mmeit::adiabatic {

/// Division guards: control counts as present above kControlThreshold x its
/// peak; probe counts as present above kProbeThreshold x its peak.
inline constexpr double kControlThreshold = 1e-6;
inline constexpr double kProbeThreshold = 1e-9;

class PolaritonState {
 public:
  PolaritonState(std::vector<Complex> coherence, std::vector<bool> defined, FieldEnvelope control);

  const TimeGrid& grid() const noexcept { return control_.grid(); }
  const std::vector<Complex>& coherence() const noexcept { return coherence_; }
  /// Samples where c_c came from a well-posed division (control present).
  const std::vector<bool>& defined() const noexcept { return defined_; }
  const FieldEnvelope& control() const noexcept { return control_; }

  /// Excited-state amplitude c_a = -i (d c_c/d tau) / conj(Omega_c), by
  /// central differences, zero where the control is absent.
  std::vector<Complex> excited_amplitude() const;

 private:
  std::vector<Complex> coherence_;
  std::vector<bool> defined_;
  FieldEnvelope control_;
};

/// c_c = -Omega_p / Omega_c. Throws ModeMismatchError with the offending
/// intervals when the probe is present while the control is absent.
PolaritonState from_fields(const FieldEnvelope& probe, const FieldEnvelope& control);

/// Cumulative-trapezoid characteristic coordinate S(tau) = int V(tau') dtau' (m).
std::vector<double> characteristic_coordinate(const FieldEnvelope& control, const LambdaMedium& medium);

/// Advances the coherence by `distance` metres. Storage (zero control) keeps
/// the polariton stationary. Throws WindowOverrunError when a characteristic
/// carrying non-negligible coherence leaves the time grid.
PolaritonState propagate(const PolaritonState& state, const LambdaMedium& medium, double distance);

/// Omega_p = -c_c Omega_c,out; the probe inherits every colour of control_out.
FieldEnvelope to_probe(const PolaritonState& state, const FieldEnvelope& control_out);

/// Norm carried by the polariton: sum |c_c|^2 V dt (conserved by propagate).
double polariton_norm(const PolaritonState& state, const LambdaMedium& medium);

}  // namespace mmeit::adiabatic
