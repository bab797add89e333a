#pragma once

// Direct integration of the weak-probe Lambda-system amplitude equations
//
//   d c_c/d tau = i conj(Omega_c) c_a - gamma_bc c_c
//   d c_a/d tau = -(Gamma/2 + i Delta) c_a + i Omega_p + i Omega_c c_c
//
// coupled to the local-time field equation d Omega_p / d zeta = i g <c_a>,
// where <.> averages over velocity classes.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "mmeit/error.hpp"
#include "mmeit/model.hpp"
#include "mmeit/waveforms.hpp"

namespace mmeit::full {

struct AtomState {
  Complex excited;    // c_a
  Complex coherence;  // c_c
};

struct Drive {
  Complex probe;
  Complex control;
};

/// Largest |lambda| h and |Omega| h allowed in one RK4 substep.
inline constexpr double kMaxDecayPhase = 1.0;
inline constexpr double kMaxCouplingPhase = 0.5;

/// Advances (c_a, c_c) from t0 to t0 + dt under `drive(t)`. The linear decay
/// -(Gamma/2 + i Delta) c_a and -gamma_bc c_c is integrated exactly through an
/// integrating factor; the couplings advance with classical RK4 (fourth order
/// for smooth drives). The step is split into substeps so that
/// |lambda| h <= kMaxDecayPhase and (|Omega_c| + |Omega_p|) h <= kMaxCouplingPhase.
/// `substeps_taken`, when given, receives the number of substeps.
template <class DriveFn>
AtomState atomic_step(AtomState state, DriveFn&& drive, double t0, double dt, double detuning,
                      const LambdaMedium& medium, int* substeps_taken = nullptr) {
  const Complex lambda(0.5 * medium.gamma(), detuning);
  const double gamma_bc = medium.ground_decoherence();
  double rate = 0.0;
  for (double frac : {0.0, 0.5, 1.0}) {
    const Drive d = drive(t0 + frac * dt);
    rate = std::max(rate, std::abs(d.control) + std::abs(d.probe));
  }
  const double need = std::max({std::abs(lambda) * dt / kMaxDecayPhase, rate * dt / kMaxCouplingPhase,
                                gamma_bc * dt / kMaxDecayPhase, 1.0});
  const int n_sub = static_cast<int>(std::ceil(need - 1e-12));
  if (substeps_taken) *substeps_taken = n_sub;
  const double h = dt / n_sub;
  const Complex I(0.0, 1.0);
  const Complex lam_half = std::exp(lambda * (0.5 * h));
  const Complex lam_full = lam_half * lam_half;
  const double gbc_half = std::exp(gamma_bc * 0.5 * h);
  const double gbc_full = gbc_half * gbc_half;

  Complex cc = state.coherence;
  Complex ca = state.excited;
  for (int k = 0; k < n_sub; ++k) {
    const double ts = t0 + k * h;
    const Drive d0 = drive(ts);
    const Drive dm = drive(ts + 0.5 * h);
    const Drive d1 = drive(ts + h);
    // Transformed variables y1 = e^{gamma_bc s} c_c, y2 = e^{lambda s} c_a.
    auto rhs = [&](const Drive& d, Complex ef_l, double ef_g, Complex y1, Complex y2, Complex& dy1, Complex& dy2) {
      const Complex c_c = y1 / ef_g;
      const Complex c_a = y2 / ef_l;
      dy1 = ef_g * (I * std::conj(d.control) * c_a);
      dy2 = ef_l * (I * d.probe + I * d.control * c_c);
    };
    Complex k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    rhs(d0, 1.0, 1.0, cc, ca, k1a, k1b);
    rhs(dm, lam_half, gbc_half, cc + 0.5 * h * k1a, ca + 0.5 * h * k1b, k2a, k2b);
    rhs(dm, lam_half, gbc_half, cc + 0.5 * h * k2a, ca + 0.5 * h * k2b, k3a, k3b);
    rhs(d1, lam_full, gbc_full, cc + h * k3a, ca + h * k3b, k4a, k4b);
    const Complex y1 = cc + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    const Complex y2 = ca + (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    cc = y1 / gbc_full;
    ca = y2 / lam_full;
  }
  if (!std::isfinite(std::abs(cc)) || !std::isfinite(std::abs(ca)))
    throw Error(ErrorKind::divergence, "atomic_step: non-finite amplitudes at t = " + std::to_string(t0));
  return {ca, cc};
}

/// Exact propagator of the amplitude equations over an interval h with
/// constant fields, y = (c_c, c_a), A the constant system matrix:
///   y(h)          = transfer y(0) + integral[:, 1] i Omega_p
///   int_0^h y ds  = integral y(0) + double_integral[:, 1] i Omega_p
/// with integral = int_0^h e^{A s} ds and double_integral = int_0^h int_0^s e^{A r} dr ds.
struct ConstantFieldPropagator {
  Complex transfer[2][2];
  Complex integral[2][2];
  Complex double_integral[2][2];
};

ConstantFieldPropagator constant_field_propagator(Complex control, double detuning, const LambdaMedium& medium,
                                                  double h);

enum class Integrator {
  /// Each sample holds its field values over [t_i - dt/2, t_i + dt/2]; every
  /// half cell is advanced with the closed-form 2x2 matrix exponential and
  /// c_a is averaged over the sample interval exactly.
  piecewise_exact,
  /// Same field model, advanced with atomic_step (integrating-factor RK4);
  /// interval averages by Simpson's rule on quarter cells.
  exponential_rk4,
};

struct SolverOptions {
  Integrator integrator = Integrator::piecewise_exact;
  std::size_t threads = 1;          // velocity-class workers
  std::size_t snapshot_stride = 0;  // 0 disables slice snapshots
  bool check_window = true;
  /// Cache the control-dependent propagators across slices when they fit.
  std::size_t cache_limit_bytes = std::size_t{512} << 20;
};

struct AtomicSlice {
  std::size_t z_index = 0;
  std::vector<std::vector<Complex>> excited;    // [class][tau], c_a averaged over each sample interval
  std::vector<std::vector<Complex>> coherence;  // [class][tau], c_c at the sample times
};

struct Margins {
  double margin_a = 0.0;
  double margin_b = 0.0;
  double margin_c = 0.0;
};

struct SolverMetadata {
  std::size_t n_z_slices = 0;
  std::size_t n_time_samples = 0;
  std::size_t n_velocity_classes = 0;
  std::size_t atomic_cell_updates = 0;
  double max_coherence = 0.0;
  double max_excited = 0.0;
  bool weak_probe_warning = false;
  double wall_seconds = 0.0;
  std::optional<Margins> margins;
};

struct PropagationResult {
  FieldEnvelope probe_out;
  std::vector<AtomicSlice> slices;
  SolverMetadata metadata;
};

/// Weak-probe threshold on max |c_c| above which a warning is recorded.
inline constexpr double kWeakProbeLimit = 0.1;

/// Marches the probe through the cell slice by slice with a midpoint
/// predictor-corrector step in zeta.
PropagationResult propagate_full(const FieldEnvelope& probe_in, const FieldEnvelope& control,
                                 const LambdaMedium& medium, const SimulationGrid& sim,
                                 const SolverOptions& options = {});

struct StorageResult {
  PropagationResult stored;
  PropagationResult reference;  // same run without the gate
  double storage_time = 0.0;
  double efficiency = 0.0;      // stored output energy / reference output energy
  double added_delay = 0.0;     // centroid(stored) - centroid(reference)
  double span_begin = 0.0;      // polariton extent at switch-off, m
  double span_end = 0.0;
};

/// Fraction of input energy allowed outside the cell at switch-off.
inline constexpr double kContainmentTolerance = 1e-2;

/// Switches every control component off on [t_off, t_on) and compares with
/// the ungated reference. Throws ContainmentError when the polariton is not
/// inside the cell at t_off.
StorageResult store_and_retrieve(const FieldEnvelope& probe_in, const ControlProgram& program, double t_off,
                                 double t_on, const LambdaMedium& medium, const SimulationGrid& sim,
                                 const SolverOptions& options = {});

}  // namespace mmeit::full
