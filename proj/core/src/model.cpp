#include "mmeit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmeit/error.hpp"

namespace mmeit {

std::string_view to_string(DetuningProfile profile) {
  switch (profile) {
    case DetuningProfile::none: return "none";
    case DetuningProfile::gaussian: return "gaussian";
    case DetuningProfile::lorentzian: return "lorentzian";
  }
  return "none";
}

DetuningProfile detuning_profile_from_string(std::string_view name) {
  if (name == "none") return DetuningProfile::none;
  if (name == "gaussian") return DetuningProfile::gaussian;
  if (name == "lorentzian") return DetuningProfile::lorentzian;
  throw_invalid("unknown detuning profile '" + std::string(name) + "'");
}

std::string_view to_string(Quadrature q) {
  return q == Quadrature::stratified ? "stratified" : "gauss_hermite";
}

Quadrature quadrature_from_string(std::string_view name) {
  if (name == "stratified") return Quadrature::stratified;
  if (name == "gauss_hermite") return Quadrature::gauss_hermite;
  throw_invalid("unknown quadrature '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// LambdaMedium

LambdaMedium::LambdaMedium(const MediumParams& params) : params_(params) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(params.gamma) || params.gamma <= 0.0) throw_invalid("medium: gamma must be > 0");
  if (!finite(params.length) || params.length <= 0.0) throw_invalid("medium: length must be > 0");
  if (!finite(params.coupling_density) || params.coupling_density < 0.0)
    throw_invalid("medium: coupling_density must be >= 0");
  if (!finite(params.inhomogeneous_width) || params.inhomogeneous_width < 0.0)
    throw_invalid("medium: inhomogeneous_width must be >= 0");
  if (!finite(params.ground_decoherence) || params.ground_decoherence < 0.0)
    throw_invalid("medium: ground_decoherence must be >= 0");
  if (params.inhomogeneous_width > 0.0 && params.detuning_profile == DetuningProfile::none)
    throw_invalid("medium: inhomogeneous_width > 0 requires a detuning profile");
}

LambdaMedium LambdaMedium::with_optical_depth(MediumParams params, double depth) {
  if (!std::isfinite(depth) || depth < 0.0) throw_invalid("optical depth must be >= 0");
  if (params.length <= 0.0 || params.gamma <= 0.0) throw_invalid("medium: gamma and length must be > 0");
  params.coupling_density = depth * params.gamma / (4.0 * params.length);
  return LambdaMedium(params);
}

double LambdaMedium::local_group_velocity(double control_power) const {
  if (params_.coupling_density == 0.0) return std::numeric_limits<double>::infinity();
  return control_power / params_.coupling_density;
}

double optical_depth(const LambdaMedium& medium) {
  return 4.0 * medium.coupling_density() * medium.length() / medium.gamma();
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_samples, double max_modulation_hz)
    : t_start_(t_start), t_end_(t_end), n_(n_samples), dt_(0.0) {
  if (n_samples < 2) throw_invalid("time grid: n_samples must be >= 2");
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start))
    throw_invalid("time grid: t_end must exceed t_start");
  dt_ = (t_end - t_start) / static_cast<double>(n_samples - 1);
  if (max_modulation_hz > 0.0) require_resolves(max_modulation_hz);
}

TimeGrid TimeGrid::with_step(double t_start, double t_end, double dt, double max_modulation_hz) {
  if (!(dt > 0.0)) throw_invalid("time grid: dt must be > 0");
  const double steps = std::ceil((t_end - t_start) / dt - 1e-9);
  const auto n = static_cast<std::size_t>(std::max(1.0, steps)) + 1;
  return TimeGrid(t_start, t_start + static_cast<double>(n - 1) * dt, n, max_modulation_hz);
}

void TimeGrid::require_resolves(double frequency_hz) const {
  if (frequency_hz <= 0.0) return;
  const double samples_per_period = 1.0 / (frequency_hz * dt_);
  if (samples_per_period < kMinSamplesPerPeriod * (1.0 - 1e-9)) {
    throw Error(ErrorKind::grid_resolution,
                "time grid: " + std::to_string(frequency_hz) + " Hz has only " +
                    std::to_string(samples_per_period) + " samples per period (need >= 16)");
  }
}

// ---------------------------------------------------------------------------
// FieldEnvelope

FieldEnvelope::FieldEnvelope(TimeGrid grid, std::vector<Complex> samples, double carrier_offset)
    : grid_(grid), samples_(std::move(samples)), carrier_offset_(carrier_offset) {
  if (samples_.size() != grid_.size())
    throw_invalid("field envelope: sample count does not match grid");
}

FieldEnvelope FieldEnvelope::zeros(const TimeGrid& grid, double carrier_offset) {
  return FieldEnvelope(grid, std::vector<Complex>(grid.size()), carrier_offset);
}

double FieldEnvelope::average_power() const {
  double sum = 0.0;
  for (const auto& s : samples_) sum += std::norm(s);
  return sum / static_cast<double>(samples_.size());
}

double FieldEnvelope::energy() const {
  double sum = 0.0;
  for (const auto& s : samples_) sum += std::norm(s);
  return sum * grid_.dt();
}

double FieldEnvelope::peak_magnitude() const {
  double peak = 0.0;
  for (const auto& s : samples_) peak = std::max(peak, std::abs(s));
  return peak;
}

double FieldEnvelope::centroid() const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double p = std::norm(samples_[i]);
    num += p * grid_.time(i);
    den += p;
  }
  if (den <= 0.0) throw Error(ErrorKind::zero_energy, "centroid of a zero-energy field");
  return num / den;
}

FieldEnvelope FieldEnvelope::scaled(Complex factor) const {
  std::vector<Complex> out(samples_);
  for (auto& s : out) s *= factor;
  return FieldEnvelope(grid_, std::move(out), carrier_offset_);
}

// ---------------------------------------------------------------------------
// Velocity classes

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Inverse standard normal CDF by bisection refined with Newton steps.
double normal_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= (normal_cdf(x) - p) / pdf;
  }
  return x;
}

// Gauss-Hermite nodes/weights for the weight exp(-x^2), Newton on the
// orthonormal recurrence with the usual asymptotic initial guesses.
void gauss_hermite(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const std::size_t m = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(nd, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

VelocityClasses make_velocity_classes(const LambdaMedium& medium, std::size_t n, Quadrature quadrature) {
  if (n == 0 || n % 2 == 0) throw_invalid("velocity classes: n must be odd and >= 1");
  const double width = medium.inhomogeneous_width();
  if (width == 0.0 || medium.detuning_profile() == DetuningProfile::none) {
    return VelocityClasses{{0.0}, {1.0}};
  }
  VelocityClasses out;
  out.detunings.resize(n);
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  const double nd = static_cast<double>(n);

  if (medium.detuning_profile() == DetuningProfile::lorentzian) {
    if (quadrature == Quadrature::gauss_hermite)
      throw_invalid("velocity classes: gauss_hermite requires a gaussian profile");
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(i) + 0.5) / nd;
      out.detunings[i] = half * std::tan(std::numbers::pi * (u - 0.5));
    }
    out.detunings[n / 2] = 0.0;
    return out;
  }

  const double sigma = width / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  if (quadrature == Quadrature::gauss_hermite) {
    std::vector<double> x;
    std::vector<double> w;
    gauss_hermite(n, x, w);
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
      out.detunings[i] = sigma * std::numbers::sqrt2 * x[n - 1 - i];
      out.weights[i] = w[n - 1 - i] * norm;
    }
  } else {
    std::vector<double> edges(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const double p = static_cast<double>(i) / nd;
      edges[i] = i == 0 ? -INFINITY : (i == n ? INFINITY : normal_quantile(p));
    }
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::isinf(edges[i]) ? 0.0 : normal_pdf(edges[i]);
      const double b = std::isinf(edges[i + 1]) ? 0.0 : normal_pdf(edges[i + 1]);
      out.detunings[i] = nd * (a - b);
      second += out.detunings[i] * out.detunings[i] / nd;
    }
    const double rescale = n > 1 ? sigma / std::sqrt(second) : 0.0;
    for (std::size_t i = 0; i < n; ++i) out.detunings[i] *= rescale;
    // enforce exact antisymmetry
    for (std::size_t i = 0; i < n / 2; ++i) {
      const double s = 0.5 * (out.detunings[n - 1 - i] - out.detunings[i]);
      out.detunings[i] = -s;
      out.detunings[n - 1 - i] = s;
    }
    out.detunings[n / 2] = 0.0;
  }
  // normalise in fixed order
  double total = 0.0;
  for (double w : out.weights) total += w;
  for (double& w : out.weights) w /= total;
  return out;
}

// ---------------------------------------------------------------------------
// SimulationGrid

SimulationGrid::SimulationGrid(TimeGrid time, std::size_t n_z_slices, VelocityClasses classes)
    : time_(time), n_z_slices_(n_z_slices), classes_(std::move(classes)) {
  if (n_z_slices_ < 2) throw_invalid("simulation grid: n_z_slices must be >= 2");
  const std::size_t n = classes_.detunings.size();
  if (n == 0 || n % 2 == 0 || classes_.weights.size() != n)
    throw_invalid("simulation grid: velocity classes must be an odd, consistent set");
  double total = 0.0;
  for (double w : classes_.weights) {
    if (!(w >= 0.0)) throw_invalid("simulation grid: negative class weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw_invalid("simulation grid: class weights must sum to 1");
}

SimulationGrid SimulationGrid::make(const TimeGrid& time, std::size_t n_z_slices, const LambdaMedium& medium,
                                    std::size_t n_velocity_classes, Quadrature quadrature) {
  return SimulationGrid(time, n_z_slices, make_velocity_classes(medium, n_velocity_classes, quadrature));
}

double effective_optical_depth(const LambdaMedium& medium, const SimulationGrid& sim) {
  const double half_gamma = 0.5 * medium.gamma();
  double factor = 0.0;
  for (std::size_t i = 0; i < sim.n_velocity_classes(); ++i) {
    const double x = sim.class_detunings()[i] / half_gamma;
    factor += sim.class_weights()[i] / (1.0 + x * x);
  }
  return optical_depth(medium) * factor;
}

}  // namespace mmeit
