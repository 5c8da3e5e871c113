#include "barframe/error.hpp"

namespace barframe {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidFramework: return "InvalidFramework";
    case ErrorCode::InvalidConstraint: return "InvalidConstraint";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::DegenerateAnchors: return "DegenerateAnchors";
    case ErrorCode::InvalidPinSpec: return "InvalidPinSpec";
    case ErrorCode::ProjectionFailed: return "ProjectionFailed";
    case ErrorCode::EmptyCone: return "EmptyCone";
    case ErrorCode::StressVanishes: return "StressVanishes";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::LicqFailure: return "LICQFailure";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::PairTrackingLost: return "PairTrackingLost";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace barframe
