#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magflow {

enum class ErrorKind {
  OutsideTubularNeighborhood,
  DegreeOutOfRange,
  DimensionMismatch,
  DegreeMismatch,
  NotApplicable,
  LeftTubularNeighborhood,
  NonFiniteValue,
  AliasedInput,
  UnsupportedDomain,
  UnsupportedModel,
  Unsupported,
  MissingNormConstants,
  GridMismatch,
  WrongMode,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the integrator, the CLI) can map it to a recovery or exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace magflow
