#include "pfplace/error.hpp"

#include <atomic>
#include <iostream>

namespace pfplace {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::index: return "index";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::format: return "format";
    case ErrorKind::stability: return "stability";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::conservation: return "conservation";
    case ErrorKind::placement: return "placement";
  }
  return "unknown";
}

void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::index: throw IndexError(what);
    case ErrorKind::geometry: throw GeometryError(what);
    case ErrorKind::parameter: throw ParameterError(what);
    case ErrorKind::format: throw FormatError(what);
    case ErrorKind::stability: throw StabilityError(what);
    case ErrorKind::integrity: throw IntegrityError(what);
    case ErrorKind::dimension: throw DimensionError(what);
    case ErrorKind::conservation: throw ConservationError(what);
    case ErrorKind::placement: throw PlacementError(what);
  }
  throw Error(e.kind(), what);
}

namespace {

void stderr_warning(std::string_view message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningHandler> g_handler{&stderr_warning};

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  return g_handler.exchange(handler ? handler : &stderr_warning);
}

void warn(std::string_view message) { g_handler.load()(message); }

}  // namespace pfplace
