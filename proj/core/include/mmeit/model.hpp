#pragma once

// Physical and numerical data types shared by the solvers and diagnostics.
//
// Units: every angular frequency, Rabi frequency and decay rate is in rad/s,
// times are in seconds, lengths in metres. Fields are complex Rabi-frequency
// envelopes sampled on a uniform grid in local time tau = t - z/c.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace mmeit {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts a frequency in Hz to an angular frequency in rad/s.
constexpr double angular(double hz) { return kTwoPi * hz; }

enum class DetuningProfile { none, gaussian, lorentzian };

std::string_view to_string(DetuningProfile profile);
DetuningProfile detuning_profile_from_string(std::string_view name);

struct MediumParams {
  double gamma = angular(6.0e6);       // excited-state decay rate
  double coupling_density = 0.0;       // g = mu^2 omega N / (2 hbar eps0 c), rad/(s m)
  double length = 0.12;                // m
  double inhomogeneous_width = 0.0;    // FWHM of the one-photon detuning distribution
  DetuningProfile detuning_profile = DetuningProfile::none;
  double ground_decoherence = 0.0;     // decay rate of c_c

  bool operator==(const MediumParams&) const = default;
};

/// A Lambda-type atomic medium. Immutable after construction.
class LambdaMedium {
 public:
  explicit LambdaMedium(const MediumParams& params);

  /// Builds a medium whose coupling density yields the requested optical depth.
  static LambdaMedium with_optical_depth(MediumParams params, double optical_depth);

  const MediumParams& params() const noexcept { return params_; }
  double gamma() const noexcept { return params_.gamma; }
  double coupling_density() const noexcept { return params_.coupling_density; }
  double length() const noexcept { return params_.length; }
  double inhomogeneous_width() const noexcept { return params_.inhomogeneous_width; }
  DetuningProfile detuning_profile() const noexcept { return params_.detuning_profile; }
  double ground_decoherence() const noexcept { return params_.ground_decoherence; }

  /// Local-time group velocity |Omega_c|^2 / g for a given control power.
  double local_group_velocity(double control_power) const;

 private:
  MediumParams params_;
};

/// Resonant optical depth d = 4 g L / Gamma; exp(-d) is the control-off
/// intensity transmission of a resonant cw probe in a homogeneous medium.
double optical_depth(const LambdaMedium& medium);

/// Uniform local-time grid. dt = (t_end - t_start) / (n_samples - 1).
class TimeGrid {
 public:
  /// `max_modulation_hz` > 0 asserts that the grid resolves that modulation
  /// frequency with at least `kMinSamplesPerPeriod` samples per period.
  TimeGrid(double t_start, double t_end, std::size_t n_samples, double max_modulation_hz = 0.0);

  /// Grid starting at t_start with step dt covering at least [t_start, t_end].
  static TimeGrid with_step(double t_start, double t_end, double dt, double max_modulation_hz = 0.0);

  static constexpr double kMinSamplesPerPeriod = 16.0;

  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t size() const noexcept { return n_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t i) const noexcept { return t_start_ + static_cast<double>(i) * dt_; }
  /// Length of the DFT period, n * dt.
  double span() const noexcept { return static_cast<double>(n_) * dt_; }

  /// Throws a grid-resolution error when `frequency_hz` has fewer than
  /// kMinSamplesPerPeriod samples per period.
  void require_resolves(double frequency_hz) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double t_start_;
  double t_end_;
  std::size_t n_;
  double dt_;
};

/// Complex Rabi-frequency samples on a TimeGrid, with a carrier-offset tag
/// (rad/s) locating the reference carrier relative to the nominal transition.
class FieldEnvelope {
 public:
  FieldEnvelope(TimeGrid grid, std::vector<Complex> samples, double carrier_offset = 0.0);

  static FieldEnvelope zeros(const TimeGrid& grid, double carrier_offset = 0.0);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> samples() const noexcept { return samples_; }
  const Complex& operator[](std::size_t i) const noexcept { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  double carrier_offset() const noexcept { return carrier_offset_; }

  /// Mean of |Omega|^2 over the grid samples.
  double average_power() const;
  /// Sum of |Omega|^2 dt.
  double energy() const;
  double peak_magnitude() const;
  /// Energy-weighted mean local time; throws zero_energy for a null field.
  double centroid() const;

  FieldEnvelope scaled(Complex factor) const;

 private:
  TimeGrid grid_;
  std::vector<Complex> samples_;
  double carrier_offset_;
};

enum class Quadrature { stratified, gauss_hermite };

std::string_view to_string(Quadrature q);
Quadrature quadrature_from_string(std::string_view name);

struct VelocityClasses {
  std::vector<double> detunings;  // rad/s
  std::vector<double> weights;    // sum to 1
};

/// Discretises the one-photon detuning distribution of the medium into `n`
/// classes (n odd). A homogeneous medium always yields ([0], [1]).
///
/// Gaussian, stratified: equal-probability strata of the CDF, each node at the
/// stratum's conditional mean, then rescaled so the discrete second moment
/// equals sigma^2. Gaussian, gauss_hermite: Gauss-Hermite nodes and weights.
/// Lorentzian: stratified quantile midpoints (its moments do not exist).
VelocityClasses make_velocity_classes(const LambdaMedium& medium, std::size_t n,
                                      Quadrature quadrature = Quadrature::stratified);

/// Discretisation of the medium: time grid, cell slices and velocity classes.
class SimulationGrid {
 public:
  SimulationGrid(TimeGrid time, std::size_t n_z_slices, VelocityClasses classes);

  static SimulationGrid make(const TimeGrid& time, std::size_t n_z_slices, const LambdaMedium& medium,
                             std::size_t n_velocity_classes,
                             Quadrature quadrature = Quadrature::stratified);

  const TimeGrid& time() const noexcept { return time_; }
  std::size_t n_z_slices() const noexcept { return n_z_slices_; }
  std::size_t n_velocity_classes() const noexcept { return classes_.detunings.size(); }
  std::span<const double> class_detunings() const noexcept { return classes_.detunings; }
  std::span<const double> class_weights() const noexcept { return classes_.weights; }

 private:
  TimeGrid time_;
  std::size_t n_z_slices_;
  VelocityClasses classes_;
};

/// Velocity-averaged resonant depth: d * sum_i w_i / (1 + (2 Delta_i / Gamma)^2).
double effective_optical_depth(const LambdaMedium& medium, const SimulationGrid& sim);

}  // namespace mmeit
