#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pfplace {

enum class ErrorKind {
  index,
  geometry,
  parameter,
  format,
  stability,
  integrity,
  dimension,
  conservation,
  placement,
};

std::string_view to_string(ErrorKind kind);

// Base class for every failure raised by the library. The kind is stable and
// is what the CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PFPLACE_DEFINE_ERROR(Name, Kind)                         \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(Kind, what) {} \
  };

PFPLACE_DEFINE_ERROR(IndexError, ErrorKind::index)
PFPLACE_DEFINE_ERROR(GeometryError, ErrorKind::geometry)
PFPLACE_DEFINE_ERROR(ParameterError, ErrorKind::parameter)
PFPLACE_DEFINE_ERROR(FormatError, ErrorKind::format)
PFPLACE_DEFINE_ERROR(StabilityError, ErrorKind::stability)
PFPLACE_DEFINE_ERROR(IntegrityError, ErrorKind::integrity)
PFPLACE_DEFINE_ERROR(DimensionError, ErrorKind::dimension)
PFPLACE_DEFINE_ERROR(ConservationError, ErrorKind::conservation)
PFPLACE_DEFINE_ERROR(PlacementError, ErrorKind::placement)

#undef PFPLACE_DEFINE_ERROR

// Rethrows `e` as the same error kind with "context: " prepended.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

// Non-fatal diagnostics (tau snapping, obstruction velocity overrides, ...)
// go through a process-wide handler. The default writes to stderr.
using WarningHandler = void (*)(std::string_view message);
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace pfplace
