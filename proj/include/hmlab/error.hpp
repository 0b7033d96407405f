#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmlab {

enum class ErrorCode {
  OutsideTubularNeighborhood,
  NotOnTarget,
  NonTangentInput,
  InvalidSpec,
  ShapeMismatch,
  UnsupportedOrder,
  InvalidExponents,
  OffTarget,
  ChartRadiusExceeded,
  NewtonDivergence,
  EigensolveFailure,
  InsufficientSamples,
  InsufficientDecades,
  DegenerateWindow,
  NotCritical,
  InsufficientTail,
  EmptyTrace,
  ConfigParse,
  InadmissibleExponents,
  Io,
  VersionError,
  ParseError,
  SpecMismatch,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI exit-code mapping) can dispatch on it.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hmlab
