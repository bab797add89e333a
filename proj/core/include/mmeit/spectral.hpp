#pragma once

#include <span>
#include <vector>

#include "mmeit/model.hpp"

namespace mmeit::spectral {

/// Unnormalised forward DFT, X_k = sum_n x_n exp(-2 pi i k n / N), so a
/// component exp(+i w tau) lands at the positive-frequency bin of w.
std::vector<Complex> forward(std::span<const Complex> x);

/// Inverse of `forward` including the 1/N factor.
std::vector<Complex> inverse(std::span<const Complex> X);

/// Angular frequency (rad/s, relative to the envelope carrier) of every DFT
/// bin in natural FFT order.
std::vector<double> bin_frequencies(const TimeGrid& grid);

/// Per-bin power normalised so the bins sum to the field's average power.
std::vector<double> power_spectrum(const FieldEnvelope& field);

/// Keeps only the bins whose absolute frequency (carrier offset included)
/// lies within [center - half_width, center + half_width].
FieldEnvelope bandpass(const FieldEnvelope& field, double center, double half_width);

/// RMS angular bandwidth sqrt(<w^2> - <w>^2), with <w^n> taken from the
/// time derivative (<w^2> = int |c'|^2 / int |c|^2). The derivative is spectral
/// after removing a cubic through the end values and slopes, so a field
/// truncated by the window does not pick up a jump at the wrap.
double rms_bandwidth(std::span<const Complex> samples, const TimeGrid& grid);

}  // namespace mmeit::spectral
