#include "scanres/error.hpp"

namespace scanres {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::RegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorCode::WrongRegionClass: return "WrongRegionClass";
    case ErrorCode::UpsampleNotAllowed: return "UpsampleNotAllowed";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::MapTooSmall: return "MapTooSmall";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateFeature: return "DegenerateFeature";
    case ErrorCode::SingleClassError: return "SingleClassError";
    case ErrorCode::InvalidFeature: return "InvalidFeature";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionError: return "VersionError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace scanres
