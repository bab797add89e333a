#include "mmeit/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

#include "mmeit/error.hpp"
#include "mmeit/model.hpp"

namespace mmeit::units {
namespace {

struct UnitEntry {
  std::string_view name;
  Dimension dim;
  double scale;
};

constexpr std::array kUnits{
    UnitEntry{"Hz", Dimension::angular_frequency, kTwoPi},
    UnitEntry{"kHz", Dimension::angular_frequency, kTwoPi * 1e3},
    UnitEntry{"MHz", Dimension::angular_frequency, kTwoPi * 1e6},
    UnitEntry{"GHz", Dimension::angular_frequency, kTwoPi * 1e9},
    UnitEntry{"rad_s", Dimension::angular_frequency, 1.0},
    UnitEntry{"per_s", Dimension::angular_frequency, 1.0},
    UnitEntry{"Hz", Dimension::frequency, 1.0},
    UnitEntry{"kHz", Dimension::frequency, 1e3},
    UnitEntry{"MHz", Dimension::frequency, 1e6},
    UnitEntry{"GHz", Dimension::frequency, 1e9},
    UnitEntry{"rad_s", Dimension::frequency, 1.0 / kTwoPi},
    UnitEntry{"s", Dimension::time, 1.0},
    UnitEntry{"ms", Dimension::time, 1e-3},
    UnitEntry{"us", Dimension::time, 1e-6},
    UnitEntry{"ns", Dimension::time, 1e-9},
    UnitEntry{"ps", Dimension::time, 1e-12},
    UnitEntry{"m", Dimension::length, 1.0},
    UnitEntry{"cm", Dimension::length, 1e-2},
    UnitEntry{"mm", Dimension::length, 1e-3},
    UnitEntry{"um", Dimension::length, 1e-6},
    UnitEntry{"rad_s_m", Dimension::coupling, 1.0},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view base_unit(Dimension dim) {
  switch (dim) {
    case Dimension::angular_frequency: return "rad_s";
    case Dimension::frequency: return "Hz";
    case Dimension::time: return "s";
    case Dimension::length: return "m";
    case Dimension::coupling: return "rad_s_m";
    case Dimension::dimensionless: return "";
  }
  return "";
}

}  // namespace

std::string_view to_string(Dimension dim) {
  switch (dim) {
    case Dimension::angular_frequency: return "angular frequency";
    case Dimension::frequency: return "frequency";
    case Dimension::time: return "time";
    case Dimension::length: return "length";
    case Dimension::coupling: return "coupling density";
    case Dimension::dimensionless: return "dimensionless";
  }
  return "dimensionless";
}

double parse(std::string_view text, Dimension dim, const std::string& field) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first)
    throw ValidationError(field, "expected a number, got '" + std::string(s) + "'");
  if (!std::isfinite(value)) throw ValidationError(field, "value must be finite");
  const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));

  if (dim == Dimension::dimensionless) {
    if (!unit.empty())
      throw ValidationError(field, "dimensionless value must be a bare number, got unit '" + std::string(unit) + "'");
    return value;
  }
  if (unit.empty())
    throw ValidationError(field, "bare number is ambiguous; add a " + std::string(to_string(dim)) +
                                     " unit such as " + std::string(base_unit(dim)));
  for (const auto& u : kUnits) {
    if (u.dim == dim && u.name == unit) return value * u.scale;
  }
  throw ValidationError(field, "unit '" + std::string(unit) + "' is not a " + std::string(to_string(dim)) + " unit");
}

std::string format(double value, Dimension dim) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string out(buf);
  if (dim != Dimension::dimensionless) {
    out += ' ';
    out += base_unit(dim);
  }
  return out;
}

}  // namespace mmeit::units
