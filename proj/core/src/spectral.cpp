#include "mmeit/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "mmeit/error.hpp"

namespace mmeit::spectral {
namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<Complex> transform(std::span<const Complex> x, int sign) {
  const int n = static_cast<int>(x.size());
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  if (n == 0) return out;
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return transform(x, FFTW_FORWARD); }

std::vector<Complex> inverse(std::span<const Complex> X) {
  auto out = transform(X, FFTW_BACKWARD);
  const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> bin_frequencies(const TimeGrid& grid) {
  const std::size_t n = grid.size();
  const double df = kTwoPi / grid.span();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<double>(k);
    f[k] = (2 * k < n ? kk : kk - static_cast<double>(n)) * df;
  }
  return f;
}

std::vector<double> power_spectrum(const FieldEnvelope& field) {
  const auto X = forward(field.samples());
  const double n2 = static_cast<double>(X.size()) * static_cast<double>(X.size());
  std::vector<double> p(X.size());
  for (std::size_t k = 0; k < X.size(); ++k) p[k] = std::norm(X[k]) / n2;
  return p;
}

FieldEnvelope bandpass(const FieldEnvelope& field, double center, double half_width) {
  auto X = forward(field.samples());
  const auto f = bin_frequencies(field.grid());
  for (std::size_t k = 0; k < X.size(); ++k) {
    if (std::abs(f[k] + field.carrier_offset() - center) > half_width) X[k] = 0.0;
  }
  return FieldEnvelope(field.grid(), inverse(X), field.carrier_offset());
}

double rms_bandwidth(std::span<const Complex> samples, const TimeGrid& grid) {
  const std::size_t n = samples.size();
  if (n < 3) throw_invalid("rms bandwidth needs at least three samples");
  const double dt = grid.dt();
  const double L = static_cast<double>(n - 1) * dt;
  const Complex c0 = samples[0];
  const Complex c1 = samples[n - 1];
  const Complex d0 = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * dt);
  const Complex d1 = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * dt);

  // Cubic Hermite through the end values and slopes; its removal leaves a
  // signal that wraps with a continuous value and slope.
  std::vector<Complex> detrended(n);
  std::vector<Complex> trend_slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    const double u2 = u * u;
    const double u3 = u2 * u;
    const Complex h = (2 * u3 - 3 * u2 + 1) * c0 + (u3 - 2 * u2 + u) * L * d0 + (3 * u2 - 2 * u3) * c1 +
                      (u3 - u2) * L * d1;
    trend_slope[i] = (6 * u2 - 6 * u) / L * (c0 - c1) + (3 * u2 - 4 * u + 1) * d0 + (3 * u2 - 2 * u) * d1;
    detrended[i] = samples[i] - h;
  }
  auto X = forward(detrended);
  const auto w = bin_frequencies(grid);
  for (std::size_t k = 0; k < n; ++k) X[k] *= Complex(0.0, w[k]);
  const auto deriv = inverse(X);
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex d = deriv[i] + trend_slope[i];
    p0 += std::norm(samples[i]);
    p1 += std::imag(std::conj(samples[i]) * d);
    p2 += std::norm(d);
  }
  if (p0 <= 0.0) throw Error(ErrorKind::zero_energy, "rms bandwidth of a zero signal");
  const double mean = p1 / p0;
  return std::sqrt(std::max(0.0, p2 / p0 - mean * mean));
}

}  // namespace mmeit::spectral
