#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmeit {

enum class ErrorKind {
  invalid_argument,
  grid_resolution,
  mode_mismatch,
  window_overrun,
  divergence,
  containment,
  spectral_resolution,
  unresolved_linewidth,
  zero_energy,
  validation,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error thrown by the library. The kind is stable and is what
/// the CLI reports in its machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct TimeInterval {
  double begin;
  double end;
};

/// Probe present where the control is absent: the adiabatic map is undefined.
class ModeMismatchError : public Error {
 public:
  ModeMismatchError(const std::string& message, std::vector<TimeInterval> intervals)
      : Error(ErrorKind::mode_mismatch, message), intervals_(std::move(intervals)) {}

  const std::vector<TimeInterval>& intervals() const noexcept { return intervals_; }

 private:
  std::vector<TimeInterval> intervals_;
};

/// The pulse leaves the simulated time window. `required_extension` is the
/// additional local time (s) the window would need.
class WindowOverrunError : public Error {
 public:
  WindowOverrunError(const std::string& message, double required_extension)
      : Error(ErrorKind::window_overrun, message), required_extension_(required_extension) {}

  double required_extension() const noexcept { return required_extension_; }

 private:
  double required_extension_;
};

/// Raised by storage when the polariton is not inside the cell at switch-off.
/// The span is the [trailing, leading] position range in metres.
class ContainmentError : public Error {
 public:
  ContainmentError(const std::string& message, double span_begin, double span_end)
      : Error(ErrorKind::containment, message), span_begin_(span_begin), span_end_(span_end) {}

  double span_begin() const noexcept { return span_begin_; }
  double span_end() const noexcept { return span_end_; }

 private:
  double span_begin_;
  double span_end_;
};

/// Config validation failure with the dotted path of the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(ErrorKind::validation, field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

[[noreturn]] void throw_invalid(const std::string& message);

}  // namespace mmeit
