#pragma once

#include <stdexcept>
#include <string>

namespace barframe {

enum class ErrorCode {
  IndexOutOfRange,
  DimensionMismatch,
  InvalidFramework,
  InvalidConstraint,
  DegenerateSpan,
  DegenerateAnchors,
  InvalidPinSpec,
  ProjectionFailed,
  EmptyCone,
  StressVanishes,
  SingularSystem,
  LicqFailure,
  BracketInvalid,
  PairTrackingLost,
  ParseError,
  InvalidDocument,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace barframe
