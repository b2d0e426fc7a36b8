#pragma once

#include <stdexcept>
#include <string>

namespace quasistat {

enum class ErrorKind {
  NotHermitian,
  NotPositiveDefinite,
  SchemaError,
  DimensionMismatch,
  Degenerate,
  NotDiagonalizable,
  ComplexSpectrum,
  SingularMetric,
  NotPseudoHermitian,
  NoSolution,
  NoPositiveMember,
  ScalarMatrix,
  OutsideChart,
  GridTooCoarse,
  BranchTrackingFailure,
  StepUnderflow,
  NotClosed,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; the kind drives the C error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace quasistat
