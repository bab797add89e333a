#include "mmeit/solver_adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmeit/error.hpp"

namespace mmeit::adiabatic {

PolaritonState::PolaritonState(std::vector<Complex> coherence, std::vector<bool> defined, FieldEnvelope control)
    : coherence_(std::move(coherence)), defined_(std::move(defined)), control_(std::move(control)) {
  if (coherence_.size() != control_.size() || defined_.size() != control_.size())
    throw_invalid("polariton state: size mismatch with control grid");
  for (const auto& c : coherence_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::divergence, "polariton state: non-finite coherence");
  }
}

std::vector<Complex> PolaritonState::excited_amplitude() const {
  const std::size_t n = coherence_.size();
  const double dt = grid().dt();
  std::vector<Complex> ca(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!defined_[i]) continue;
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    const Complex deriv = (coherence_[b] - coherence_[a]) / (static_cast<double>(b - a) * dt);
    ca[i] = Complex(0.0, -1.0) * deriv / std::conj(control_[i]);
  }
  return ca;
}

PolaritonState from_fields(const FieldEnvelope& probe, const FieldEnvelope& control) {
  if (!(probe.grid() == control.grid())) throw_invalid("from_fields: probe and control grids differ");
  const double ctrl_eps = kControlThreshold * control.peak_magnitude();
  const double probe_eps = kProbeThreshold * probe.peak_magnitude();
  const std::size_t n = probe.size();
  std::vector<Complex> cc(n);
  std::vector<bool> defined(n, false);
  std::vector<TimeInterval> bad;
  const TimeGrid& grid = probe.grid();
  for (std::size_t i = 0; i < n; ++i) {
    const bool control_on = std::abs(control[i]) > ctrl_eps && control.peak_magnitude() > 0.0;
    const bool probe_on = std::abs(probe[i]) > probe_eps && probe.peak_magnitude() > 0.0;
    if (control_on) {
      cc[i] = -probe[i] / control[i];
      defined[i] = true;
    } else if (probe_on) {
      const double t = grid.time(i);
      if (!bad.empty() && std::abs(bad.back().end - t) < 0.5 * grid.dt()) {
        bad.back().end = t + grid.dt();
      } else {
        bad.push_back({t, t + grid.dt()});
      }
    }
  }
  if (!bad.empty()) {
    std::string msg = "from_fields: probe present where control is absent in " + std::to_string(bad.size()) +
                      " interval(s), first at tau = " + std::to_string(bad.front().begin) + " s";
    throw ModeMismatchError(msg, std::move(bad));
  }
  return PolaritonState(std::move(cc), std::move(defined), control);
}

std::vector<double> characteristic_coordinate(const FieldEnvelope& control, const LambdaMedium& medium) {
  const std::size_t n = control.size();
  std::vector<double> s(n, 0.0);
  const double g = medium.coupling_density();
  const double dt = control.grid().dt();
  for (std::size_t i = 1; i < n; ++i) {
    const double v0 = std::norm(control[i - 1]) / g;
    const double v1 = std::norm(control[i]) / g;
    s[i] = s[i - 1] + 0.5 * dt * (v0 + v1);
  }
  return s;
}

PolaritonState propagate(const PolaritonState& state, const LambdaMedium& medium, double distance) {
  if (!(distance >= 0.0) || distance > medium.length() * (1.0 + 1e-12))
    throw_invalid("propagate: distance must lie in [0, medium length]");
  if (distance == 0.0 || medium.coupling_density() == 0.0) return state;

  const auto& cc = state.coherence();
  const auto& defined = state.defined();
  const std::size_t n = cc.size();
  const auto s = characteristic_coordinate(state.control(), medium);

  double peak = 0.0;
  for (const auto& c : cc) peak = std::max(peak, std::abs(c));
  const double significant = 1e-3 * peak;
  const double s_end = s.back();
  const double tol = 1e-12 * std::max(1.0, s_end);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(cc[i]) <= significant) continue;
    const double reach = s[i] + distance;
    if (reach > s_end + tol) {
      const double v_end = std::norm(state.control()[n - 1]) / medium.coupling_density();
      const double extension = v_end > 0.0 ? (reach - s_end) / v_end : std::numeric_limits<double>::infinity();
      throw WindowOverrunError("propagate: polariton from tau = " + std::to_string(state.grid().time(i)) +
                                   " s does not exit within the time window; extend by " +
                                   std::to_string(extension) + " s",
                               extension);
    }
  }

  std::vector<Complex> out(n);
  std::vector<bool> out_defined(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const double target = s[j] - distance;
    if (target < -tol) continue;  // maps to before the window: quiet medium
    const auto it = std::lower_bound(s.begin(), s.end(), target - tol);
    const auto k1 = static_cast<std::size_t>(std::distance(s.begin(), it));
    if (k1 >= n) continue;
    Complex value;
    bool ok = false;
    if (k1 == 0 || std::abs(s[k1] - target) <= tol) {
      value = cc[k1];
      ok = defined[k1];
    } else {
      const std::size_t k0 = k1 - 1;
      const double w = (target - s[k0]) / (s[k1] - s[k0]);
      if (defined[k0] && defined[k1]) {
        value = (1.0 - w) * cc[k0] + w * cc[k1];
        ok = true;
      } else if (defined[k0]) {
        value = cc[k0];
        ok = true;
      } else if (defined[k1]) {
        value = cc[k1];
        ok = true;
      }
    }
    if (ok) {
      out[j] = value;
      out_defined[j] = true;
    }
  }
  return PolaritonState(std::move(out), std::move(out_defined), state.control());
}

FieldEnvelope to_probe(const PolaritonState& state, const FieldEnvelope& control_out) {
  if (!(state.grid() == control_out.grid())) throw_invalid("to_probe: grid mismatch");
  std::vector<Complex> out(control_out.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -state.coherence()[i] * control_out[i];
  return FieldEnvelope(control_out.grid(), std::move(out), control_out.carrier_offset());
}

double polariton_norm(const PolaritonState& state, const LambdaMedium& medium) {
  double sum = 0.0;
  for (std::size_t i = 0; i < state.coherence().size(); ++i)
    sum += std::norm(state.coherence()[i]) * std::norm(state.control()[i]) / medium.coupling_density();
  return sum * state.grid().dt();
}

}  // namespace mmeit::adiabatic
