// Acceptance suite: runs the shipped scenarios (plus two inline configs) and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.
//
//   mmeit_acceptance [--out <dir>] [--only <n>[,<n>...]]

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmeit/builtin_scenarios.hpp"
#include "mmeit/config.hpp"
#include "mmeit/diagnostics.hpp"
#include "mmeit/model.hpp"
#include "mmeit/runner.hpp"
#include "mmeit/units.hpp"

namespace {

using namespace mmeit;
using config::Resolution;
using config::ScenarioConfig;
using runner::RunRecord;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Outcome outcome(std::string detail) const {
    if (failures_.empty()) return {true, std::move(detail)};
    std::string msg = detail + " | failed: ";
    for (std::size_t i = 0; i < failures_.size(); ++i) msg += (i ? "; " : "") + failures_[i];
    return {false, msg};
  }

 private:
  std::vector<std::string> failures_;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string pct(double rel) { return fmt("%.3g%%", 100.0 * rel); }

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

double scalar(const RunRecord& r, const std::string& name) {
  const auto v = r.scalar(name);
  if (!v) throw std::runtime_error(r.scenario + " run " + std::to_string(r.run_index) + ": no scalar " + name);
  return *v;
}

double min_margin(const RunRecord& r) {
  return std::min({scalar(r, "margin_a"), scalar(r, "margin_b"), scalar(r, "margin_c")});
}

double parameter(const RunRecord& r, std::size_t axis, units::Dimension dim) {
  return units::parse(r.parameters.at(axis).second, dim, r.parameters.at(axis).first);
}

std::vector<RunRecord> run_all(const ScenarioConfig& cfg, Resolution res = Resolution::standard,
                               std::size_t workers = 1) {
  runner::RunOptions opt;
  opt.write = false;
  opt.resolution = res;
  opt.workers = workers;
  auto records = runner::run(cfg, opt);
  for (const auto& r : records) {
    if (!r.ok())
      throw std::runtime_error(cfg.name + " run " + std::to_string(r.run_index) + ": " + r.error->message);
  }
  return records;
}

class Suite {
 public:
  explicit Suite(fs::path out) : out_(std::move(out)) {}

  const std::vector<RunRecord>& shipped(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end()) it = cache_.emplace(name, run_all(scenarios::load_builtin(name))).first;
    return it->second;
  }

  const fs::path& out() const { return out_; }
  const std::map<std::string, std::vector<RunRecord>>& cache() const { return cache_; }

 private:
  fs::path out_;
  std::map<std::string, std::vector<RunRecord>> cache_;
};

// 1. Beer-Lambert: control off, T = exp(-d) within 2%, < 30 s per point.
Outcome beer_lambert(Suite& s) {
  Check c;
  std::string detail = "T/exp(-d):";
  for (const auto& r : s.shipped("beer_lambert")) {
    const double d = std::stod(r.parameters.at(0).second);
    const double t = scalar(r, "full.steady_transmission");
    const double ratio = t / std::exp(-d);
    detail += " d=" + fmt("%g", d) + " " + fmt("%.4f", ratio);
    c.require(std::abs(ratio - 1.0) <= 0.02, "d=" + fmt("%g", d) + " off by " + pct(ratio - 1.0));
    c.require(r.provenance.wall_seconds < 30.0, "d=" + fmt("%g", d) + " took " + fmt("%.1f s", r.provenance.wall_seconds));
  }
  return c.outcome(detail + " (tol 2%)");
}

// 2. Dark state: matched cw pair, margins > 10, gamma_bc = 0, T >= 0.99, < 1 min.
Outcome dark_state(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("dark_state_cw");
  const auto& r = s.shipped("dark_state_cw").at(0);
  const double t = scalar(r, "full.transmission");
  c.require(cfg.medium.params.ground_decoherence == 0.0, "ground decoherence is not zero");
  c.require(min_margin(r) > 10.0, "min margin " + fmt("%.3g", min_margin(r)));
  c.require(t >= 0.99, "transmission " + fmt("%.5f", t));
  c.require(r.provenance.wall_seconds < 60.0, "took " + fmt("%.1f s", r.provenance.wall_seconds));
  return c.outcome("T = " + fmt("%.5f", t) + ", min margin " + fmt("%.3g", min_margin(r)) + " (need T >= 0.99)");
}

double energy_in(const RunRecord& r) {
  const auto& t = r.tables.at("transmission");
  return std::stod(t.rows.at(0).at(1));
}

// 3. cw probe through the duty-0.2 comb: zero-span output 0.20 +- 0.03 of the
//    matched case at equal average probe power, d_eff >= 8, < 5 min.
Outcome mode_filter_ratio(Suite& s) {
  Check c;
  const auto cw = scenarios::load_builtin("fig1c_transmitted_spectrum");
  const auto& r_cw = s.shipped("fig1c_transmitted_spectrum").at(0);
  const auto& r_matched = s.shipped("fig1d_matched_probe").at(1);
  const double f_mod = parameter(r_matched, 0, units::Dimension::frequency);
  c.require(f_mod == 1e6, "matched reference is not the 1 MHz member");
  const auto medium = cw.medium.build();
  const auto grid = cw.grid.time_grid(1e6);
  const double d_eff = effective_optical_depth(
      medium, SimulationGrid::make(grid, cw.grid.z_slices, medium, cw.grid.velocity_classes, cw.grid.quadrature));
  const double ratio = scalar(r_cw, "full.zero_span_power") / scalar(r_matched, "full.zero_span_power");
  const double e_ratio = energy_in(r_cw) / energy_in(r_matched);
  c.require(d_eff >= 8.0, "effective optical depth " + fmt("%.3g", d_eff));
  c.require(std::abs(e_ratio - 1.0) < 0.01, "input energies differ by " + pct(e_ratio - 1.0));
  c.require(std::abs(ratio - 0.20) <= 0.03, "ratio " + fmt("%.4f", ratio));
  const double wall = r_cw.provenance.wall_seconds + r_matched.provenance.wall_seconds;
  c.require(wall < 300.0, "took " + fmt("%.1f s", wall));
  return c.outcome("ratio = " + fmt("%.4f", ratio) + " (0.20 +- 0.03), d_eff = " + fmt("%.3g", d_eff));
}

// 4. Matched modulated pair within 2% of the cw pair at equal average power.
Outcome matched_lossless(Suite& s) {
  Check c;
  const auto& runs = s.shipped("fig1d_matched_probe");
  const double t_cw = scalar(runs.at(0), "full.transmission");
  const double t_mod = scalar(runs.at(1), "full.transmission");
  c.require(parameter(runs.at(0), 0, units::Dimension::frequency) == 0.0, "member 0 is not the cw pair");
  c.require(rel_diff(t_mod, t_cw) <= 0.02, "differ by " + pct(rel_diff(t_mod, t_cw)));
  return c.outcome("T_mod = " + fmt("%.5f", t_mod) + ", T_cw = " + fmt("%.5f", t_cw) + " (tol 2%)");
}

// 5. Transmitted spectrum of criterion 3 at 30 kHz rbw: lines only at integer
//    MHz, secondary structure < 1% of the line power.
Outcome comb_spectrum(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("fig1c_transmitted_spectrum");
  const auto& r = s.shipped("fig1c_transmitted_spectrum").at(0);
  const double rbw_hz = cfg.options.spectrum_rbw / kTwoPi;
  const double peak_hz = scalar(r, "full.spectrum_peak_Hz");
  const double secondary = scalar(r, "full.secondary_level");
  c.require(std::abs(rbw_hz - 30e3) < 1e-6, "rbw " + fmt("%g Hz", rbw_hz));
  c.require(std::remainder(peak_hz, 1e6) == 0.0, "peak at " + fmt("%g Hz", peak_hz));
  c.require(secondary < 0.01, "secondary level " + fmt("%.3g", secondary));

  // Every local maximum above 1% of the peak sits on a 1 MHz line.
  const auto& rows = r.tables.at("spectrum").rows;
  std::vector<std::pair<double, double>> trace;
  for (const auto& row : rows)
    if (row.at(0) == "full") trace.emplace_back(std::stod(row.at(1)), std::stod(row.at(2)));
  double top = 0.0;
  for (const auto& [f, p] : trace) top = std::max(top, p);
  std::size_t lines = 0;
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    const auto [f, p] = trace[i];
    if (p < 0.01 * top || p < trace[i - 1].second || p < trace[i + 1].second) continue;
    ++lines;
    c.require(std::abs(std::remainder(f, 1e6)) <= 100e3, "line at " + fmt("%g Hz", f));
  }
  c.require(lines >= 3, "only " + std::to_string(lines) + " lines found");
  return c.outcome(std::to_string(lines) + " lines on the 1 MHz grid, secondary = " + fmt("%.3g", secondary) +
                   " of the line power (need < 0.01)");
}

// 6. Delay depends on average control power only: modulation {cw, 0.5, 1, 2}
//    MHz and duty {0.1, 0.2, 0.5, 0.8} agree within 5%; delay ~ 1/P within 5%
//    over one decade.
Outcome average_power_law(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("fig3_groupvel");
  const auto medium = cfg.medium.build();
  const double gl = medium.coupling_density() * medium.length();
  std::map<double, std::vector<double>> by_power;
  double worst_law = 0.0;
  double p_min = INFINITY;
  double p_max = 0.0;
  for (const auto& r : s.shipped("fig3_groupvel")) {
    const double rms = parameter(r, 0, units::Dimension::angular_frequency);
    const double p = rms * rms;
    const double delay = scalar(r, "full.delay_s");
    by_power[p].push_back(delay);
    worst_law = std::max(worst_law, rel_diff(delay, gl / p));
    p_min = std::min(p_min, p);
    p_max = std::max(p_max, p);
  }
  double worst_spread = 0.0;
  for (const auto& [p, delays] : by_power) {
    const auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
    worst_spread = std::max(worst_spread, *hi / *lo - 1.0);
  }
  c.require(by_power.size() == 5, "expected 5 power levels");
  c.require(p_max / p_min >= 9.9, "power range " + fmt("%.3g", p_max / p_min));
  c.require(worst_spread <= 0.05, "modulation spread " + pct(worst_spread));
  c.require(worst_law <= 0.05, "delay vs gL/P off by " + pct(worst_law));

  auto base = cfg;
  base.sweep.reset();
  config::SweepSpec duty;
  duty.axes.push_back({"control.0.modulation.duty", {"0.1", "0.2", "0.5", "0.8"}});
  runner::RunOptions opt;
  opt.write = false;
  std::vector<double> delays;
  for (const auto& r : runner::run_sweep(base, duty, opt)) {
    if (!r.ok()) throw std::runtime_error("duty sweep: " + r.error->message);
    delays.push_back(scalar(r, "full.delay_s"));
  }
  const auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
  const double duty_spread = *hi / *lo - 1.0;
  c.require(duty_spread <= 0.05, "duty spread " + pct(duty_spread));
  return c.outcome("modulation spread " + pct(worst_spread) + ", duty spread " + pct(duty_spread) +
                   ", worst delay vs gL/P " + pct(worst_law) + " over x" + fmt("%.3g", p_max / p_min) +
                   " in power (tol 5%)");
}

// 7. Full vs adiabatic exit envelopes < 5% relative L2 at margins > 10.
Outcome cross_solver(Suite& s) {
  Check c;
  const auto& r = s.shipped("fig2a_broadband_delay").at(0);
  const double l2 = scalar(r, "cross_solver.relative_l2");
  c.require(min_margin(r) > 10.0, "min margin " + fmt("%.3g", min_margin(r)));
  c.require(l2 < 0.05, "relative L2 " + fmt("%.4f", l2));
  return c.outcome("relative L2 = " + fmt("%.4f", l2) + " (need < 0.05), min margin " + fmt("%.3g", min_margin(r)));
}

// 8. Storage: efficiency > 0.95 and added delay = gate within 2 steps at
//    gamma_bc = 0; efficiency vs exp(-2 gamma_bc t_g) within 5% otherwise.
Outcome storage(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("fig2b_broadband_storage");
  const double t_g = cfg.storage->t_on - cfg.storage->t_off;
  const double dt = cfg.grid.dt;
  std::string detail;
  bool saw_zero = false;
  bool saw_decay = false;
  for (const auto& r : s.shipped("fig2b_broadband_storage")) {
    const double gamma_bc = parameter(r, 0, units::Dimension::angular_frequency);
    const double eff = scalar(r, "storage.efficiency");
    const double added = scalar(r, "storage.added_delay_s");
    if (gamma_bc == 0.0) {
      saw_zero = true;
      const double steps = (added - t_g) / dt;
      c.require(eff > 0.95, "efficiency " + fmt("%.4f", eff));
      c.require(std::abs(steps) <= 2.0, "added delay off by " + fmt("%.3g steps", steps));
      detail += "gamma_bc=0: eff " + fmt("%.5f", eff) + ", delay error " + fmt("%.3g steps", steps) + "; ";
    } else {
      saw_decay = true;
      const double expected = std::exp(-2.0 * gamma_bc * t_g);
      c.require(rel_diff(eff, expected) <= 0.05, "decay efficiency off by " + pct(rel_diff(eff, expected)));
      detail += "gamma_bc=" + fmt("%g", gamma_bc) + ": eff " + fmt("%.5f", eff) + " vs " + fmt("%.5f", expected);
    }
  }
  c.require(saw_zero && saw_decay, "sweep lacks a zero and a nonzero gamma_bc");
  return c.outcome(detail);
}

// 9. Conversion by 160 MHz: exact peak shift, efficiency >= 0.9 at margins > 10.
Outcome conversion(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("fig4a_conversion");
  const auto& r = s.shipped("fig4a_conversion").at(0);
  const double shift = scalar(r, "full.peak_shift_Hz");
  const double target = cfg.conversion->offset / kTwoPi;
  const double eff = scalar(r, "full.conversion_efficiency");
  c.require(std::abs(target - 160e6) < 1e-3, "configured offset " + fmt("%g Hz", target));
  c.require(shift == 160e6, "peak shift " + fmt("%.17g Hz", shift));
  c.require(eff >= 0.9, "efficiency " + fmt("%.4f", eff));
  c.require(min_margin(r) > 10.0, "min margin " + fmt("%.3g", min_margin(r)));
  return c.outcome("shift = " + fmt("%.17g", shift) + " Hz, efficiency " + fmt("%.5f", eff) +
                   " (need >= 0.9; experimental reference 0.87), min margin " + fmt("%.3g", min_margin(r)));
}

// 10. Two colours: power ratios within 5%, centroids within 2 steps, delay
//     set by P1 + P2 within 5%.
Outcome two_colour(Suite& s) {
  Check c;
  const auto cfg = scenarios::load_builtin("fig4b_two_color");
  const auto medium = cfg.medium.build();
  const double total = std::pow(cfg.control.at(0).component.amplitude, 2);
  const double predicted = medium.coupling_density() * medium.length() / total;
  std::string detail;
  for (const auto& r : s.shipped("fig4b_two_color")) {
    const double f = std::stod(r.parameters.at(0).second);
    const double expected = f / (1.0 - f);
    const double ratio = scalar(r, "full.colour_ratio");
    const double steps = (scalar(r, "full.centroid_2_s") - scalar(r, "full.centroid_1_s")) / cfg.grid.dt;
    const double delay = scalar(r, "full.conversion_delay_s");
    c.require(rel_diff(ratio, expected) <= 0.05, "ratio " + fmt("%.4f", ratio) + " vs " + fmt("%.4f", expected));
    c.require(std::abs(steps) <= 2.0, "centroids " + fmt("%.3g steps", steps) + " apart");
    c.require(rel_diff(delay, predicted) <= 0.05, "delay off by " + pct(rel_diff(delay, predicted)));
    detail += "P1:P2=" + fmt("%g", 1.0 - f) + ":" + fmt("%g", f) + " ratio " + fmt("%.4f", ratio) + " centroid diff " +
              fmt("%.2g", steps) + " steps delay err " + pct(rel_diff(delay, predicted)) + "; ";
  }
  return c.outcome(detail);
}

// Intensity transmission of a cw probe with the control detuned by `delta`
// from two-photon resonance, from the steady state of the amplitude equations.
double analytic_eit_transmission(double d, double gamma, double gamma_bc, double omega_c, double delta) {
  const std::complex<double> denom = 0.5 * gamma + omega_c * omega_c / std::complex<double>(gamma_bc, -delta);
  return std::exp(-d * 0.5 * gamma * (1.0 / denom).real());
}

// FWHM of the analytic line over [-span, span], half level midway between the
// peak and the minimum of the scan.
double analytic_fwhm(double d, double gamma, double omega_c, double span) {
  const int n = 20001;
  std::vector<double> x(n), y(n);
  for (int k = 0; k < n; ++k) {
    x[k] = -span + 2.0 * span * k / (n - 1);
    y[k] = analytic_eit_transmission(d, gamma, 0.0, omega_c, x[k]);
  }
  const double peak = analytic_eit_transmission(d, gamma, 0.0, omega_c, 0.0);
  const double half = 0.5 * (peak + *std::min_element(y.begin(), y.end()));
  int k = n / 2;
  while (k + 1 < n && y[k + 1] >= half) ++k;
  const double right = x[k] + (x[k + 1] - x[k]) * (y[k] - half) / (y[k] - y[k + 1]);
  return 2.0 * right;
}

// 11. Enhancement W / gamma_EIT = 50 +- 5% for a cw window tuned to W/50.
Outcome delay_bandwidth(Suite& s) {
  Check c;
  const double d = 100.0;
  const double gamma = angular(6e6);
  const double bandwidth = angular(5e6);
  const double span = angular(300e3);
  const double target = bandwidth / 50.0;
  double lo = angular(0.1e6);
  double hi = angular(10e6);
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (analytic_fwhm(d, gamma, mid, span) < target ? lo : hi) = mid;
  }
  const double omega_c = std::sqrt(lo * hi);

  std::ostringstream y;
  y << "name: acceptance_eit_window\n"
       "medium: {gamma: 6 MHz, optical_depth: 100, length: 12 cm}\n"
       "grid: {duration: 80 us, dt: 50 ns, z_slices: 100}\n"
       "control:\n  - amplitude: "
    << units::format(omega_c, units::Dimension::angular_frequency)
    << "\n"
       "probe:\n  amplitude: 10 kHz\n  matched: true\n"
       "  envelope: {shape: gaussian, center: 20 us, duration: 10 us}\n"
       "solver: full\n"
       "measurements: [eit_scan]\n"
       "measurement_options: {scan_span: 300 kHz, scan_points: 41, scan_duration: 400 us, scan_dt: 50 ns, "
       "modulation_bandwidth: 5 MHz}\n";
  const auto cfg = config::parse_config(y.str());
  const auto r = run_all(cfg).at(0);
  const double gamma_eit = scalar(r, "eit.gamma_eit_Hz");
  const double enh = scalar(r, "eit.enhancement");
  c.require(rel_diff(enh, 5e6 / gamma_eit) < 1e-12, "enhancement is not W / gamma_EIT");
  c.require(rel_diff(enh, 50.0) <= 0.05, "enhancement " + fmt("%.4g", enh));

  // Same report on the broadband storage scenario.
  const auto& r2 = s.shipped("fig2b_broadband_storage").at(0);
  c.require(rel_diff(scalar(r2, "eit.enhancement"), scalar(r2, "eit.bandwidth_Hz") / scalar(r2, "eit.gamma_eit_Hz")) <
                1e-12,
            "fig2b enhancement is not W / gamma_EIT");
  return c.outcome("Omega_c = 2pi x " + fmt("%.5g", omega_c / kTwoPi) + " Hz (analytic FWHM = W/50), simulated gamma_EIT = " +
                   fmt("%.5g", gamma_eit) + " Hz, enhancement = " + fmt("%.4g", enh) + " (50 +- 5%); fig2b reports " +
                   fmt("%.4g", scalar(r2, "eit.enhancement")));
}

// 12. Matched-pulse transmission decreases monotonically as the control power
//     falls through the margin ~ 1 regime.
Outcome adiabaticity_monotone(Suite&) {
  Check c;
  const auto cfg = config::parse_config(
      "name: acceptance_adiabaticity\n"
      "medium: {gamma: 6 MHz, optical_depth: 4, length: 12 cm}\n"
      "grid: {duration: 40 us, dt: 10 ns, z_slices: 50}\n"
      "control:\n  - amplitude: 5 MHz\n"
      "probe:\n  amplitude: 10 kHz\n  matched: true\n"
      "  envelope: {shape: gaussian, center: 5 us, duration: 1 us}\n"
      "solver: full\n"
      "measurements: [transmission, margins]\n"
      "sweep:\n  parameter: control.0.amplitude\n"
      "  values: [5 MHz, 3 MHz, 2 MHz, 1.5 MHz, 1 MHz, 0.7 MHz, 0.5 MHz, 0.35 MHz]\n");
  const auto runs = run_all(cfg);
  std::string detail = "T:";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double t = scalar(runs[i], "full.transmission");
    detail += " " + fmt("%.4f", t) + "(m=" + fmt("%.2g", min_margin(runs[i])) + ")";
    if (i > 0) {
      const double prev = scalar(runs[i - 1], "full.transmission");
      c.require(t < prev, "not decreasing at " + runs[i].parameters.at(0).second);
    }
  }
  c.require(min_margin(runs.front()) > 1.0, "sweep does not start above margin 1");
  c.require(min_margin(runs.back()) < 1.0, "sweep does not end below margin 1");
  return c.outcome(detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 13. Bit-identical outputs for any worker count; halving dt and the slice
//     length changes every reported scalar by < 0.5%.
Outcome determinism_convergence(Suite& s) {
  Check c;
  std::size_t files = 0;
  for (const char* name : {"fig3_groupvel", "fig1d_matched_probe"}) {
    const auto cfg = scenarios::load_builtin(name);
    const fs::path a = s.out() / "determinism" / name / "workers_1";
    const fs::path b = s.out() / "determinism" / name / "workers_4";
    fs::remove_all(a);
    fs::remove_all(b);
    runner::RunOptions opt;
    opt.out_dir = a;
    runner::run(cfg, opt);
    opt.out_dir = b;
    opt.workers = 4;
    runner::run(cfg, opt);
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
      const auto rel = fs::relative(e.path(), a);
      ++files;
      c.require(fs::exists(b / rel) && slurp(e.path()) == slurp(b / rel), std::string(name) + "/" + rel.string() + " differs");
    }
  }

  double worst = 0.0;
  std::string worst_name;
  std::size_t compared = 0;
  for (const auto& entry : scenarios::builtin()) {
    const std::string name(entry.name);
    const auto& coarse = s.shipped(name);
    const auto fine = run_all(scenarios::load_builtin(name), Resolution::fine);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      for (const auto& [key, v] : coarse[i].scalars) {
        const double w = scalar(fine.at(i), key);
        const double diff = v == w ? 0.0 : std::abs(w - v) / std::max(std::abs(v), std::abs(w));
        ++compared;
        if (diff > worst) {
          worst = diff;
          worst_name = name + "[" + std::to_string(i) + "]." + key;
        }
        if (diff >= 0.005) c.require(false, name + "[" + std::to_string(i) + "]." + key + " changed by " + pct(diff));
      }
    }
  }
  return c.outcome(std::to_string(files) + " output files identical for 1 and 4 workers; " + std::to_string(compared) +
                   " scalars compared at fine resolution, worst " + worst_name + " " + pct(worst) + " (tol 0.5%)");
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "mmeit_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--out <dir>] [--only <n>[,<n>...]]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome(Suite&)>>> criteria{
      {"Beer-Lambert oracle", beer_lambert},
      {"dark-state transparency", dark_state},
      {"mode-filter ratio", mode_filter_ratio},
      {"matched-probe losslessness", matched_lossless},
      {"comb spectrum", comb_spectrum},
      {"average-power law", average_power_law},
      {"cross-solver equivalence", cross_solver},
      {"storage", storage},
      {"frequency conversion", conversion},
      {"two-colour splitting", two_colour},
      {"delay-bandwidth enhancement", delay_bandwidth},
      {"adiabaticity monotonicity", adiabaticity_monotone},
      {"determinism and convergence", determinism_convergence},
  };

  Suite suite(out);
  int failed = 0;
  int ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(suite);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++ran;
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed;
}
