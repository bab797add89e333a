#include "mmeit/solver_full.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "mmeit/solver_adiabatic.hpp"

namespace mmeit::full {
namespace {

const Complex kI(0.0, 1.0);

// (e^z - 1) / z
Complex phi1(Complex z) {
  if (std::abs(z) < 1e-2) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
  return (std::exp(z) - 1.0) / z;
}

// (e^z - 1 - z) / z^2
Complex phi2(Complex z) {
  if (std::abs(z) < 1e-2) return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0)));
  return (std::exp(z) - 1.0 - z) / (z * z);
}

// int_0^1 u e^{z u} du
Complex psi1(Complex z) {
  if (std::abs(z) < 1e-2) return 0.5 + z * (1.0 / 3.0 + z * (1.0 / 8.0 + z * (1.0 / 30.0 + z / 144.0)));
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// int_0^1 (1 - u) u e^{z u} du
Complex psi2(Complex z) {
  if (std::abs(z) < 1e-2) return 1.0 / 6.0 + z * (1.0 / 12.0 + z * (1.0 / 40.0 + z * (1.0 / 180.0 + z / 1008.0)));
  const Complex ez = std::exp(z);
  const Complex z2 = z * z;
  return (ez * (z - 1.0) + 1.0) / z2 - (ez * (z2 - 2.0 * z + 2.0) - 2.0) / (z2 * z);
}

// One sample cell [t_i, t_{i+1}], split at the midpoint between the held
// values of sample i and sample i+1. With s_i = i Omega_p,i:
//   y_{i+1}                    = p y_i + u s_i + v s_{i+1}
//   int over first half of c_a = la . y_i + lp s_i
//   int over second half       = rb . y_i + ru s_i + rv s_{i+1}
struct CellPropagator {
  Complex p[2][2];
  Complex u[2];
  Complex v[2];
  Complex la[2];
  Complex lp;
  Complex rb[2];
  Complex ru;
  Complex rv;
};

CellPropagator cell_propagator(Complex control_left, Complex control_right, double detuning,
                               const LambdaMedium& medium, double dt) {
  const auto a = constant_field_propagator(control_left, detuning, medium, 0.5 * dt);
  const auto b = constant_field_propagator(control_right, detuning, medium, 0.5 * dt);
  CellPropagator c;
  for (int r = 0; r < 2; ++r) {
    for (int col = 0; col < 2; ++col)
      c.p[r][col] = b.transfer[r][0] * a.transfer[0][col] + b.transfer[r][1] * a.transfer[1][col];
    c.u[r] = b.transfer[r][0] * a.integral[0][1] + b.transfer[r][1] * a.integral[1][1];
    c.v[r] = b.integral[r][1];
  }
  for (int col = 0; col < 2; ++col) {
    c.la[col] = a.integral[1][col];
    c.rb[col] = b.integral[1][0] * a.transfer[0][col] + b.integral[1][1] * a.transfer[1][col];
  }
  c.lp = a.double_integral[1][1];
  c.ru = b.integral[1][0] * a.integral[0][1] + b.integral[1][1] * a.integral[1][1];
  c.rv = b.double_integral[1][1];
  return c;
}

struct PassStats {
  double max_coherence = 0.0;
  double max_excited = 0.0;
};

// Atomic response of one velocity class to the probe on the grid: writes
// the interval-averaged c_a and optionally c_c at the sample times.
class ClassIntegrator {
 public:
  ClassIntegrator(const FieldEnvelope& control, double detuning, const LambdaMedium& medium,
                  const SolverOptions& options, bool cache)
      : control_(control), detuning_(detuning), medium_(medium), options_(options) {
    if (cache && options.integrator == Integrator::piecewise_exact) {
      const std::size_t n = control.size();
      cells_.resize(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i)
        cells_[i] = cell_propagator(control[i], control[i + 1], detuning, medium, control.grid().dt());
    }
  }

  PassStats run(std::span<const Complex> probe, std::vector<Complex>& excited,
                std::vector<Complex>* coherence) const {
    const std::size_t n = probe.size();
    const double dt = control_.grid().dt();
    excited.assign(n, Complex{});
    if (coherence) coherence->assign(n, Complex{});
    PassStats stats;
    Complex cc = 0.0;
    Complex ca = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Complex sl = kI * probe[i];
      const Complex sr = kI * probe[i + 1];
      if (options_.integrator == Integrator::piecewise_exact) {
        const CellPropagator cell =
            cells_.empty() ? cell_propagator(control_[i], control_[i + 1], detuning_, medium_, dt) : cells_[i];
        excited[i] += cell.la[0] * cc + cell.la[1] * ca + cell.lp * sl;
        excited[i + 1] += cell.rb[0] * cc + cell.rb[1] * ca + cell.ru * sl + cell.rv * sr;
        const Complex ncc = cell.p[0][0] * cc + cell.p[0][1] * ca + sl * cell.u[0] + sr * cell.v[0];
        const Complex nca = cell.p[1][0] * cc + cell.p[1][1] * ca + sl * cell.u[1] + sr * cell.v[1];
        cc = ncc;
        ca = nca;
      } else {
        const double t = control_.grid().time(i);
        const Drive left{probe[i], control_[i]};
        const Drive right{probe[i + 1], control_[i + 1]};
        const double q = 0.25 * dt;
        AtomState s{ca, cc};
        const AtomState s1 = atomic_step(s, [&](double) { return left; }, t, q, detuning_, medium_);
        const AtomState s2 = atomic_step(s1, [&](double) { return left; }, t + q, q, detuning_, medium_);
        const AtomState s3 = atomic_step(s2, [&](double) { return right; }, t + 2 * q, q, detuning_, medium_);
        const AtomState s4 = atomic_step(s3, [&](double) { return right; }, t + 3 * q, q, detuning_, medium_);
        excited[i] += (2.0 * q / 6.0) * (s.excited + 4.0 * s1.excited + s2.excited);
        excited[i + 1] += (2.0 * q / 6.0) * (s2.excited + 4.0 * s3.excited + s4.excited);
        ca = s4.excited;
        cc = s4.coherence;
      }
      if (coherence) (*coherence)[i + 1] = cc;
      stats.max_coherence = std::max(stats.max_coherence, std::abs(cc));
      stats.max_excited = std::max(stats.max_excited, std::abs(ca));
    }
    for (std::size_t i = 0; i < n; ++i) excited[i] /= (i == 0 || i + 1 == n) ? 0.5 * dt : dt;
    if (!std::isfinite(stats.max_coherence) || !std::isfinite(stats.max_excited))
      throw Error(ErrorKind::divergence, "propagate_full: non-finite atomic amplitudes (detuning " +
                                             std::to_string(detuning_) + " rad/s)");
    return stats;
  }

 private:
  const FieldEnvelope& control_;
  double detuning_;
  const LambdaMedium& medium_;
  const SolverOptions& options_;
  std::vector<CellPropagator> cells_;
};

}  // namespace

ConstantFieldPropagator constant_field_propagator(Complex control, double detuning, const LambdaMedium& medium,
                                                  double h) {
  // A = [[-gamma_bc, i conj(Oc)], [i Oc, -lambda]] acting on (c_c, c_a);
  // A = m I + N with N^2 = q^2 I, so every function of A is f0 I + f1 N.
  const double gbc = medium.ground_decoherence();
  const Complex lambda(0.5 * medium.gamma(), detuning);
  const Complex m = -0.5 * (gbc + lambda);
  const Complex n00 = 0.5 * (lambda - gbc);
  const Complex nmat[2][2] = {{n00, kI * std::conj(control)}, {kI * control, -n00}};
  const Complex q = std::sqrt(n00 * n00 - std::norm(control));
  const Complex qh = q * h;
  const Complex mh = m * h;
  const bool small = std::abs(qh) < 1e-4;

  Complex e0, e1;  // e^{A h}
  if (small) {
    e0 = 1.0 + 0.5 * qh * qh;
    e1 = h * (1.0 + qh * qh / 6.0);
  } else {
    e0 = std::cosh(qh);
    e1 = std::sinh(qh) / q;
  }
  const Complex emh = std::exp(mh);
  e0 *= emh;
  e1 *= emh;

  Complex s0, s1, d0, d1;  // int e^{A s}, double integral
  {
    const Complex ep = h * phi1(mh + qh);
    const Complex em = h * phi1(mh - qh);
    const Complex fp = h * h * phi2(mh + qh);
    const Complex fm = h * h * phi2(mh - qh);
    s0 = 0.5 * (ep + em);
    d0 = 0.5 * (fp + fm);
    if (small) {
      s1 = h * h * psi1(mh);
      d1 = h * h * h * psi2(mh);
    } else {
      s1 = (ep - em) / (2.0 * q);
      d1 = (fp - fm) / (2.0 * q);
    }
  }

  ConstantFieldPropagator out;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double id = r == c ? 1.0 : 0.0;
      out.transfer[r][c] = e0 * id + e1 * nmat[r][c];
      out.integral[r][c] = s0 * id + s1 * nmat[r][c];
      out.double_integral[r][c] = d0 * id + d1 * nmat[r][c];
    }
  }
  return out;
}

PropagationResult propagate_full(const FieldEnvelope& probe_in, const FieldEnvelope& control,
                                 const LambdaMedium& medium, const SimulationGrid& sim,
                                 const SolverOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  if (!(probe_in.grid() == control.grid()) || !(probe_in.grid() == sim.time()))
    throw_invalid("propagate_full: probe, control and simulation grids must be identical");

  const std::size_t n = probe_in.size();
  const std::size_t n_classes = sim.n_velocity_classes();
  const std::size_t n_slices = sim.n_z_slices();
  const double dz = medium.length() / static_cast<double>(n_slices);
  const double g = medium.coupling_density();

  const std::size_t cache_bytes = n_classes * (n - 1) * sizeof(CellPropagator);
  const bool cache = cache_bytes <= options.cache_limit_bytes;

  std::vector<ClassIntegrator> integrators;
  integrators.reserve(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k)
    integrators.emplace_back(control, sim.class_detunings()[k], medium, options, cache);

  std::vector<std::vector<Complex>> excited(n_classes);
  std::vector<std::vector<Complex>> coherence(n_classes);
  std::vector<PassStats> stats(n_classes);

  PropagationResult result{FieldEnvelope::zeros(sim.time(), probe_in.carrier_offset()), {}, {}};
  SolverMetadata& meta = result.metadata;
  meta.n_z_slices = n_slices;
  meta.n_time_samples = n;
  meta.n_velocity_classes = n_classes;

  // Velocity-averaged c_a for the given probe, reduced in fixed class order.
  auto response = [&](std::span<const Complex> probe, bool keep_coherence, std::vector<Complex>& avg) {
    auto work = [&](std::size_t k) {
      stats[k] = integrators[k].run(probe, excited[k], keep_coherence ? &coherence[k] : nullptr);
    };
    const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(options.threads, 1), n_classes);
    if (workers <= 1) {
      for (std::size_t k = 0; k < n_classes; ++k) work(k);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t k = w; k < n_classes; k += workers) work(k);
        });
      }
    }
    avg.assign(n, Complex{});
    for (std::size_t k = 0; k < n_classes; ++k) {
      const double wk = sim.class_weights()[k];
      for (std::size_t i = 0; i < n; ++i) avg[i] += wk * excited[k][i];
      meta.max_coherence = std::max(meta.max_coherence, stats[k].max_coherence);
      meta.max_excited = std::max(meta.max_excited, stats[k].max_excited);
    }
    meta.atomic_cell_updates += n_classes * (n - 1);
  };

  std::vector<Complex> field(probe_in.samples().begin(), probe_in.samples().end());
  std::vector<Complex> mid(n);
  std::vector<Complex> avg;
  for (std::size_t z = 0; z < n_slices; ++z) {
    const bool snapshot = options.snapshot_stride > 0 && z % options.snapshot_stride == 0;
    response(field, snapshot, avg);
    if (snapshot) result.slices.push_back(AtomicSlice{z, excited, coherence});
    for (std::size_t i = 0; i < n; ++i) mid[i] = field[i] + (0.5 * dz * g) * kI * avg[i];
    response(mid, false, avg);
    for (std::size_t i = 0; i < n; ++i) field[i] += (dz * g) * kI * avg[i];
  }
  if (options.snapshot_stride > 0) {
    response(field, true, avg);
    result.slices.push_back(AtomicSlice{n_slices, excited, coherence});
  }

  result.probe_out = FieldEnvelope(sim.time(), std::move(field), probe_in.carrier_offset());
  meta.weak_probe_warning = meta.max_coherence > kWeakProbeLimit;

  if (options.check_window) {
    const std::size_t edge = std::max<std::size_t>(1, n / 100);
    double tail = 0.0;
    for (std::size_t i = n - edge; i < n; ++i) tail += std::norm(result.probe_out[i]);
    tail *= sim.time().dt();
    const double total = probe_in.energy();
    if (total > 0.0 && tail > 1e-4 * total) {
      throw WindowOverrunError("propagate_full: " + std::to_string(tail / total) +
                                   " of the probe energy sits at the end of the time window; extend t_end",
                               static_cast<double>(edge) * sim.time().dt());
    }
  }
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

StorageResult store_and_retrieve(const FieldEnvelope& probe_in, const ControlProgram& program, double t_off,
                                 double t_on, const LambdaMedium& medium, const SimulationGrid& sim,
                                 const SolverOptions& options) {
  if (t_on < t_off) throw_invalid("store_and_retrieve: t_on must not precede t_off");
  const TimeGrid& grid = sim.time();
  const FieldEnvelope control_ref = evaluate_program(program, grid);

  const double storage_time = t_on - t_off;
  double span_begin = 0.0;
  double span_end = 0.0;

  // Containment at t_off from the characteristics of the ungated control.
  if (storage_time > 0.0) {
    const auto s = adiabatic::characteristic_coordinate(control_ref, medium);
    const auto idx_off = static_cast<std::size_t>(
        std::clamp(std::round((t_off - grid.t_start()) / grid.dt()), 0.0, static_cast<double>(grid.size() - 1)));
    const double s_off = s[idx_off];
    double outside = 0.0;
    double total = 0.0;
    std::vector<std::pair<double, double>> positions;  // (position, energy)
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = std::norm(probe_in[i]);
      if (e == 0.0) continue;
      total += e;
      const double pos = i <= idx_off ? s_off - s[i] : -INFINITY;
      positions.emplace_back(pos, e);
      if (!(pos >= 0.0 && pos <= medium.length())) outside += e;
    }
    std::sort(positions.begin(), positions.end());
    double acc = 0.0;
    span_begin = positions.empty() ? 0.0 : positions.front().first;
    span_end = positions.empty() ? 0.0 : positions.back().first;
    bool begin_set = false;
    for (const auto& [pos, e] : positions) {
      acc += e;
      if (!begin_set && acc >= 0.005 * total) {
        span_begin = pos;
        begin_set = true;
      }
      if (acc >= 0.995 * total) {
        span_end = pos;
        break;
      }
    }
    if (total > 0.0 && outside > kContainmentTolerance * total) {
      throw ContainmentError("store_and_retrieve: " + std::to_string(outside / total) +
                                 " of the pulse energy is outside the cell at t_off (span " +
                                 std::to_string(span_begin) + " .. " + std::to_string(span_end) + " m)",
                             span_begin, span_end);
    }
  }

  ControlProgram gated = program;
  for (auto& c : gated.components) c.gate = close_gate(c.gate, t_off, t_on, grid.t_start(), grid.t_end());
  const FieldEnvelope control_gated = evaluate_program(gated, grid);

  PropagationResult reference = propagate_full(probe_in, control_ref, medium, sim, options);
  PropagationResult stored =
      storage_time > 0.0 ? propagate_full(probe_in, control_gated, medium, sim, options) : reference;
  StorageResult out{std::move(stored), std::move(reference), storage_time, 0.0, 0.0, span_begin, span_end};
  const double e_ref = out.reference.probe_out.energy();
  if (e_ref <= 0.0) throw Error(ErrorKind::zero_energy, "store_and_retrieve: reference output carries no energy");
  out.efficiency = out.stored.probe_out.energy() / e_ref;
  out.added_delay = out.stored.probe_out.centroid() - out.reference.probe_out.centroid();
  return out;
}

}  // namespace mmeit::full
