#include <doctest.h>

#include <cmath>
#include <complex>

#include "mmeit/model.hpp"
#include "mmeit/spectral.hpp"
#include "mmeit/waveforms.hpp"

using namespace mmeit;

namespace {

// 20 periods of 1 MHz at 100 samples per period.
TimeGrid comb_grid() { return TimeGrid::with_step(0.0, 20e-6 - 10e-9, 10e-9, 1e6); }

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x); }

}  // namespace

TEST_CASE("pulse train with duty 1 is constant") {
  const auto f = pulse_train(comb_grid(), 1e6, 1.0);
  for (const auto& s : f.samples()) CHECK(s == Complex(1.0, 0.0));
}

TEST_CASE("1 MHz, duty 0.2 is on for 0.2 us of every period") {
  const auto g = comb_grid();
  const auto f = pulse_train(g, 1e6, 0.2);
  for (std::size_t period = 0; period < 20; ++period) {
    double on = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      const double v = f[period * 100 + i].real();
      CHECK((v == 0.0 || v == 1.0));
      on += v * g.dt();
    }
    CHECK(on == doctest::Approx(0.2e-6).epsilon(1e-9));
  }
  CHECK(f.average_power() == doctest::Approx(0.2));
  CHECK(modulation_rms(g, PulseTrainSpec{1e6, 0.2}) == doctest::Approx(std::sqrt(0.2)));
  CHECK(modulation_rms(g, std::nullopt) == 1.0);
  CHECK(modulation_rms(g, PulseTrainSpec{0.0, 0.2}) == 1.0);
}

TEST_CASE("pulse train spectrum is a sinc^2 comb") {
  const auto g = comb_grid();
  const auto f = pulse_train(g, 1e6, 0.2);
  const auto power = spectral::power_spectrum(f);
  const auto freqs = spectral::bin_frequencies(g);
  const double line_hz = 1e6;
  double dc = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k)
    if (freqs[k] == 0.0) dc = power[k];
  REQUIRE(dc == doctest::Approx(0.04));
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double hz = freqs[k] / kTwoPi;
    const double harmonic = std::round(hz / line_hz);
    if (std::abs(hz - harmonic * line_hz) > 1.0) {
      CHECK(power[k] < 1e-20);
      continue;
    }
    const int m = static_cast<int>(std::abs(harmonic));
    if (m == 0 || m > 4) continue;
    CAPTURE(m);
    const double expected = std::pow(sinc(0.2 * m), 2);
    CHECK(power[k] / dc == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("control programs") {
  const auto g = TimeGrid::with_step(0.0, 1e-6 - 0.3125e-9, 0.3125e-9, 160e6);
  const double a = angular(5e6);

  ControlProgram single;
  single.components.push_back(ControlComponent{});
  single.components[0].amplitude = a;
  const auto cw = evaluate_program(single, g);
  for (const auto& s : cw.samples()) CHECK(std::abs(s) == doctest::Approx(a));
  CHECK(cw.average_power() == doctest::Approx(a * a));

  ControlProgram two = single;
  ControlComponent second;
  second.amplitude = 2.0 * a;
  second.frequency_offset = angular(160e6);
  two.components.push_back(second);
  const auto f = evaluate_program(two, g);
  // The 160 MHz beat completes 160 cycles over the grid.
  CHECK(f.average_power() == doctest::Approx(a * a + 4 * a * a).epsilon(1e-9));

  const auto gm = comb_grid();
  ControlProgram pulsed = single;
  pulsed.components[0].modulation = PulseTrainSpec{1e6, 0.2};
  CHECK(evaluate_program(pulsed, gm).average_power() == doctest::Approx(0.2 * a * a));
  CHECK(pulsed.max_frequency_hz() == doctest::Approx(1e6));
  CHECK(two.max_frequency_hz() == doctest::Approx(160e6));
}

TEST_CASE("gated control") {
  const auto g = comb_grid();
  ControlProgram p;
  p.components.push_back(ControlComponent{});
  p.components[0].amplitude = 1.0;
  p.components[0].gate = close_gate({}, 5e-6, 8e-6, g.t_start(), g.t_end());
  CHECK_FALSE(gate_open(p.components[0].gate, 6e-6));
  CHECK(gate_open(p.components[0].gate, 4e-6));
  CHECK(gate_open(p.components[0].gate, 9e-6));
  CHECK(gate_open({}, 1.0));
  const auto f = evaluate_program(p, g);
  CHECK(std::abs(f[600]) == 0.0);
  CHECK(std::abs(f[400]) == 1.0);
}

TEST_CASE("envelopes") {
  Envelope gauss{EnvelopeShape::gaussian, 5e-6, 2e-6};
  CHECK(gauss(5e-6) == doctest::Approx(1.0));
  // Intensity FWHM.
  CHECK(gauss(6e-6) * gauss(6e-6) == doctest::Approx(0.5));
  Envelope flat{EnvelopeShape::flattop, 0, 0, 2e-6, 8e-6, 1e-6};
  CHECK(flat(5e-6) == 1.0);
  CHECK(flat(2e-6) == doctest::Approx(0.5));
  CHECK(flat(1.4e-6) == 0.0);
  CHECK(Envelope{}(123.0) == 1.0);
  Envelope bad{EnvelopeShape::gaussian, 0.0, -1.0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("matched probe") {
  const auto g = comb_grid();
  Envelope env{EnvelopeShape::gaussian, 10e-6, 4e-6};
  const auto envelope = sample_envelope(g, env, 3.0);

  const auto cw = FieldEnvelope(g, std::vector<Complex>(g.size(), Complex(7.0, 0.0)));
  const auto p_cw = matched_probe(cw, envelope);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(p_cw[i] - envelope[i]) < 1e-12);

  const auto train = pulse_train(g, 1e6, 0.2).scaled(5.0);
  const auto p = matched_probe(train, envelope);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (train[i] == Complex(0.0, 0.0)) {
      CHECK(p[i] == Complex(0.0, 0.0));
    } else {
      CHECK(std::abs(p[i] - envelope[i]) < 1e-12);
    }
  }
}
