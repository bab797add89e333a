#include "mmeit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <string>

#include "mmeit/error.hpp"
#include "mmeit/spectral.hpp"

namespace mmeit::diagnostics {

std::string_view to_string(SpectrumMode mode) { return mode == SpectrumMode::swept ? "swept" : "zero_span"; }

double SpectrumTrace::integrated_power() const {
  if (frequencies.size() < 2 || rbw <= 0.0) return 0.0;
  const double df = frequencies[1] - frequencies[0];
  return std::accumulate(power.begin(), power.end(), 0.0) * df / (kGaussianEnbw * rbw);
}

namespace {

void require_rbw(const FieldEnvelope& field, double rbw) {
  const double resolution = kTwoPi / field.grid().span();
  if (!(rbw >= resolution * (1.0 - 1e-9)))
    throw Error(ErrorKind::spectral_resolution, "rbw " + std::to_string(rbw / kTwoPi) +
                                                    " Hz is below the grid resolution " +
                                                    std::to_string(resolution / kTwoPi) + " Hz");
}

}  // namespace

SpectrumTrace heterodyne_spectrum(const FieldEnvelope& field, double lo_offset, double rbw) {
  require_rbw(field, rbw);
  const double nyquist = std::numbers::pi / field.grid().dt();
  if (std::abs(field.carrier_offset() - lo_offset) > nyquist)
    throw Error(ErrorKind::spectral_resolution, "local oscillator beat lies beyond the Nyquist frequency");

  const auto p = spectral::power_spectrum(field);
  const auto f = spectral::bin_frequencies(field.grid());
  const std::size_t n = p.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

  SpectrumTrace trace;
  trace.rbw = rbw;
  trace.mode = SpectrumMode::swept;
  trace.frequencies.resize(n);
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.frequencies[i] = f[order[i]] + field.carrier_offset() - lo_offset;
    sorted[i] = p[order[i]];
  }

  // Filter taps on the uniform bin grid, truncated where they drop below 1e-16.
  const double df = kTwoPi / field.grid().span();
  const double a = 4.0 * std::numbers::ln2 / (rbw * rbw);
  const auto reach = static_cast<std::size_t>(std::ceil(std::sqrt(16.0 * std::log(10.0) / a) / df));
  std::vector<double> taps(std::min(reach, n) + 1);
  for (std::size_t j = 0; j < taps.size(); ++j) {
    const double x = static_cast<double>(j) * df;
    taps[j] = std::exp(-a * x * x);
  }
  trace.power.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (sorted[j] == 0.0) continue;
    const std::size_t lo = j >= taps.size() - 1 ? j - (taps.size() - 1) : 0;
    const std::size_t hi = std::min(n - 1, j + taps.size() - 1);
    for (std::size_t i = lo; i <= hi; ++i) trace.power[i] += sorted[j] * taps[i > j ? i - j : j - i];
  }
  return trace;
}

double zero_span_power(const FieldEnvelope& field, double rbw) {
  return zero_span_power(field, rbw, field.carrier_offset());
}

double zero_span_power(const FieldEnvelope& field, double rbw, double center) {
  require_rbw(field, rbw);
  const auto p = spectral::power_spectrum(field);
  const auto f = spectral::bin_frequencies(field.grid());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (std::abs(f[k] + field.carrier_offset() - center) <= 0.5 * rbw) sum += p[k];
  }
  return sum;
}

double mode_overlap(const FieldEnvelope& probe, const FieldEnvelope& control) {
  if (!(probe.grid() == control.grid())) throw_invalid("mode_overlap: grid mismatch");
  Complex cross = 0.0;
  double pp = 0.0;
  double cc = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    cross += probe[i] * std::conj(control[i]);
    pp += std::norm(probe[i]);
    cc += std::norm(control[i]);
  }
  if (pp <= 0.0 || cc <= 0.0) throw Error(ErrorKind::zero_energy, "mode_overlap: zero-energy input");
  const double overlap = std::min(1.0, std::norm(cross) / (pp * cc));
  return overlap < kOverlapFloor ? 0.0 : overlap;
}

double relative_l2(const FieldEnvelope& a, const FieldEnvelope& b) {
  if (a.size() != b.size()) throw_invalid("relative_l2: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (den <= 0.0) throw Error(ErrorKind::zero_energy, "relative_l2: zero reference");
  return std::sqrt(num / den);
}

double energy_transmission(const FieldEnvelope& out, const FieldEnvelope& in) {
  const double e_in = in.energy();
  if (e_in <= 0.0) throw Error(ErrorKind::zero_energy, "transmission: zero input energy");
  return out.energy() / e_in;
}

GroupVelocity group_velocity_estimate(const FieldEnvelope& out, const FieldEnvelope& reference,
                                      const LambdaMedium& medium) {
  GroupVelocity gv;
  gv.delay = out.centroid() - reference.centroid();
  gv.precision_warning = std::abs(gv.delay) < 2.0 * out.grid().dt();
  gv.v_local = gv.delay != 0.0 ? medium.length() / gv.delay : INFINITY;
  gv.v_lab = 1.0 / (1.0 / gv.v_local + 1.0 / kSpeedOfLight);
  return gv;
}

GroupVelocity group_velocity_estimate(const full::PropagationResult& result, const FieldEnvelope& reference,
                                      const LambdaMedium& medium) {
  return group_velocity_estimate(result.probe_out, reference, medium);
}

double AdiabaticityReport::min_margin() const { return std::min({margin_a, margin_b, margin_c}); }

AdiabaticityReport adiabaticity_check(const FieldEnvelope& probe, const FieldEnvelope& control,
                                      const LambdaMedium& medium) {
  if (!(probe.grid() == control.grid())) throw_invalid("adiabaticity_check: grid mismatch");
  const double ctrl_peak = control.peak_magnitude();
  const double probe_peak = probe.peak_magnitude();
  if (ctrl_peak <= 0.0 || probe_peak <= 0.0)
    throw Error(ErrorKind::zero_energy, "adiabaticity_check: fields must be nonzero");
  const double ctrl_eps = 1e-6 * ctrl_peak;
  const double probe_eps = 1e-9 * probe_peak;

  const std::size_t n = probe.size();
  const TimeGrid& grid = probe.grid();
  AdiabaticityReport r;
  std::vector<Complex> cc(n);
  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(control[i]) > ctrl_eps) {
      cc[i] = -probe[i] / control[i];
      defined.push_back(i);
    } else if (std::abs(probe[i]) > probe_eps) {
      r.mode_mismatch = true;
    }
  }
  if (defined.empty()) throw Error(ErrorKind::zero_energy, "adiabaticity_check: control below threshold everywhere");

  // Bridge control-off gaps; hold the end values outside the first/last defined sample.
  for (std::size_t i = 0; i < defined.front(); ++i) cc[i] = cc[defined.front()];
  for (std::size_t i = defined.back() + 1; i < n; ++i) cc[i] = cc[defined.back()];
  for (std::size_t k = 0; k + 1 < defined.size(); ++k) {
    const std::size_t a = defined[k];
    const std::size_t b = defined[k + 1];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
      cc[i] = (1.0 - w) * cc[a] + w * cc[b];
    }
  }

  const double cap = grid.span();
  auto timescale = [cap](double bandwidth) { return bandwidth > 1.0 / cap ? 1.0 / bandwidth : cap; };
  r.T = timescale(spectral::rms_bandwidth(cc, grid));
  r.T1 = timescale(spectral::rms_bandwidth(control.samples(), grid));

  // Control envelope: running maximum of |Omega_c| over one coherence time,
  // so modulation faster than T counts as the fast factor, not the envelope.
  const auto half = static_cast<std::size_t>(0.5 * r.T / grid.dt());
  std::vector<double> envelope(n);
  {
    std::deque<std::size_t> window;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (; next < n && next <= i + half; ++next) {
        while (!window.empty() && std::abs(control[window.back()]) <= std::abs(control[next])) window.pop_back();
        window.push_back(next);
      }
      while (window.front() + half < i) window.pop_front();
      envelope[i] = std::abs(control[window.front()]);
    }
  }

  double cc_peak = 0.0;
  for (std::size_t i : defined) cc_peak = std::max(cc_peak, std::abs(cc[i]));
  double omega_min = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(cc[i]) < 1e-2 * cc_peak) continue;
    if (envelope[i] < omega_min) {
      omega_min = envelope[i];
      r.tau_min = grid.time(i);
    }
  }
  if (!std::isfinite(omega_min)) omega_min = 0.0;
  if (r.mode_mismatch) return r;
  r.margin_a = omega_min * r.T;
  r.margin_b = omega_min * omega_min * r.T * r.T1;
  r.margin_c = omega_min * omega_min * r.T / medium.gamma();
  return r;
}

LinewidthFit eit_linewidth(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw_invalid("eit_linewidth: need at least three matching samples");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) throw_invalid("eit_linewidth: offsets must be strictly ascending");
  }
  const auto imax = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  LinewidthFit fit;
  fit.floor_value = *std::min_element(y.begin(), y.end());
  fit.peak_offset = x[imax];
  fit.peak_value = y[imax];
  if (imax > 0 && imax + 1 < n) {
    // Parabola through the three highest points.
    const double x0 = x[imax - 1], x1 = x[imax], x2 = x[imax + 1];
    const double y0 = y[imax - 1], y1 = y[imax], y2 = y[imax + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double c2 = (d12 - d01) / (x2 - x0);
    if (c2 < 0.0) {
      const double c1 = d01 - c2 * (x0 + x1);
      const double xv = -c1 / (2.0 * c2);
      if (xv > x0 && xv < x2) {
        fit.peak_offset = xv;
        fit.peak_value = y1 + c1 * (xv - x1) + c2 * (xv * xv - x1 * x1);
      }
    }
  }
  const double half = 0.5 * (fit.peak_value + fit.floor_value);
  std::size_t above = 0;
  for (double v : y) above += v >= half ? 1 : 0;
  std::optional<double> left;
  for (std::size_t i = imax; i > 0; --i) {
    if (y[i - 1] < half) {
      left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t i = imax; i + 1 < n; ++i) {
    if (y[i + 1] < half) {
      right = x[i] + (y[i] - half) * (x[i + 1] - x[i]) / (y[i] - y[i + 1]);
      break;
    }
  }
  if (!left || !right || above < 3)
    throw Error(ErrorKind::unresolved_linewidth, "eit_linewidth: the transmission peak is not resolved by the scan");
  fit.fwhm = *right - *left;
  return fit;
}

DelayBandwidthReport delay_bandwidth_report(double bandwidth, double gamma_eit) {
  if (!(bandwidth > 0.0) || !(gamma_eit > 0.0))
    throw Error(ErrorKind::unresolved_linewidth, "delay_bandwidth_report: W and gamma_eit must be > 0");
  return {bandwidth, gamma_eit, bandwidth / gamma_eit};
}

DelayBandwidthReport delay_bandwidth_report(double bandwidth, std::span<const double> offsets,
                                            std::span<const double> transmission) {
  return delay_bandwidth_report(bandwidth, eit_linewidth(offsets, transmission).fwhm);
}

}  // namespace mmeit::diagnostics
