#include "mmeit/error.hpp"

namespace mmeit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::grid_resolution: return "grid_resolution";
    case ErrorKind::mode_mismatch: return "mode_mismatch";
    case ErrorKind::window_overrun: return "window_overrun";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::containment: return "containment";
    case ErrorKind::spectral_resolution: return "spectral_resolution";
    case ErrorKind::unresolved_linewidth: return "unresolved_linewidth";
    case ErrorKind::zero_energy: return "zero_energy";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void throw_invalid(const std::string& message) {
  throw Error(ErrorKind::invalid_argument, message);
}

}  // namespace mmeit
