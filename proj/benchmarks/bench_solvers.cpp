#include <benchmark/benchmark.h>

#include "mmeit/builtin_scenarios.hpp"
#include "mmeit/config.hpp"
#include "mmeit/diagnostics.hpp"
#include "mmeit/solver_adiabatic.hpp"
#include "mmeit/solver_full.hpp"
#include "mmeit/waveforms.hpp"

namespace {

using namespace mmeit;

struct Setup {
  LambdaMedium medium;
  TimeGrid grid;
  FieldEnvelope control;
  FieldEnvelope probe;
};

Setup make_setup(std::size_t n) {
  const LambdaMedium medium = LambdaMedium::with_optical_depth(MediumParams{}, 40.0);
  const double dt = 12.5e-9;
  TimeGrid grid(0.0, static_cast<double>(n - 1) * dt, n, 1e6);
  ControlProgram program;
  ControlComponent c;
  c.amplitude = angular(4e6);
  c.modulation = PulseTrainSpec{1e6, 0.2, 0.0, 0.0};
  program.components.push_back(c);
  auto control = evaluate_program(program, grid);
  Envelope env{EnvelopeShape::gaussian, 0.4 * static_cast<double>(n) * dt, 0.15 * static_cast<double>(n) * dt};
  auto probe = matched_probe(control, sample_envelope(grid, env, angular(1e4)));
  return {medium, grid, std::move(control), std::move(probe)};
}

void BM_ConstantFieldPropagator(benchmark::State& state) {
  const LambdaMedium medium(MediumParams{});
  double phase = 0.0;
  for (auto _ : state) {
    phase += 1e-3;
    auto p = full::constant_field_propagator(std::polar(angular(5e6), phase), angular(1e6), medium, 6.25e-9);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_ConstantFieldPropagator);

void BM_PropagateFull(benchmark::State& state) {
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const auto sim = SimulationGrid::make(s.grid, static_cast<std::size_t>(state.range(1)), s.medium, 1);
  for (auto _ : state) {
    auto r = full::propagate_full(s.probe, s.control, s.medium, sim);
    benchmark::DoNotOptimize(r.probe_out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_PropagateFull)->Args({2000, 20})->Args({4000, 40})->Unit(benchmark::kMillisecond);

void BM_PropagateFullRk4(benchmark::State& state) {
  const auto s = make_setup(2000);
  const auto sim = SimulationGrid::make(s.grid, 20, s.medium, 1);
  full::SolverOptions options;
  options.integrator = full::Integrator::exponential_rk4;
  for (auto _ : state) {
    auto r = full::propagate_full(s.probe, s.control, s.medium, sim, options);
    benchmark::DoNotOptimize(r.probe_out);
  }
}
BENCHMARK(BM_PropagateFullRk4)->Unit(benchmark::kMillisecond);

void BM_PropagateAdiabatic(benchmark::State& state) {
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto st = adiabatic::propagate(adiabatic::from_fields(s.probe, s.control), s.medium, s.medium.length());
    benchmark::DoNotOptimize(adiabatic::to_probe(st, s.control));
  }
}
BENCHMARK(BM_PropagateAdiabatic)->Arg(4000)->Arg(32000)->Unit(benchmark::kMicrosecond);

void BM_HeterodyneSpectrum(benchmark::State& state) {
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto trace = diagnostics::heterodyne_spectrum(s.probe, 0.0, angular(30e3));
    benchmark::DoNotOptimize(trace.power);
  }
}
BENCHMARK(BM_HeterodyneSpectrum)->Arg(4000)->Arg(32000)->Unit(benchmark::kMillisecond);

void BM_AdiabaticityCheck(benchmark::State& state) {
  const auto s = make_setup(4000);
  for (auto _ : state) benchmark::DoNotOptimize(diagnostics::adiabaticity_check(s.probe, s.control, s.medium));
}
BENCHMARK(BM_AdiabaticityCheck)->Unit(benchmark::kMillisecond);

void BM_ConfigRoundTrip(benchmark::State& state) {
  const auto yaml = *scenarios::builtin_yaml("fig3_groupvel");
  for (auto _ : state) {
    auto c = config::parse_config(yaml);
    benchmark::DoNotOptimize(config::serialize_config(c));
  }
}
BENCHMARK(BM_ConfigRoundTrip)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
