#pragma once

// Strict "<number> <unit>" quantities for scenario files.
//
//   angular_frequency  Hz kHz MHz GHz (times 2 pi), rad_s, per_s
//   frequency          Hz kHz MHz GHz, rad_s (divided by 2 pi)
//   time               s ms us ns ps
//   length             m cm mm um
//   coupling           rad_s_m
//   dimensionless      bare number only
//
// A dimensional field given as a bare number is rejected.

#include <string>
#include <string_view>

namespace mmeit::units {

enum class Dimension { angular_frequency, frequency, time, length, coupling, dimensionless };

std::string_view to_string(Dimension dim);

/// Parses `text` into SI (rad/s, Hz, s, m, rad/(s m)). Throws ValidationError
/// naming `field` on a malformed number, a missing unit or a unit of the
/// wrong dimension.
double parse(std::string_view text, Dimension dim, const std::string& field);

/// Canonical text for `value` in SI with the base unit suffix; parse() of the
/// result reproduces `value` exactly.
std::string format(double value, Dimension dim);

}  // namespace mmeit::units
