#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scanres {

enum class ErrorCode {
  InvalidImage,
  InvalidDimensions,
  RegionOutOfBounds,
  WrongRegionClass,
  UpsampleNotAllowed,
  ImageTooSmall,
  MapTooSmall,
  DimMismatch,
  TargetUnreachable,
  InvalidParameter,
  DegenerateFeature,
  SingleClassError,
  InvalidFeature,
  InvalidDimension,
  TooFewSamples,
  EmptyInput,
  ProtocolViolation,
  ParseError,
  IoError,
  VersionError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; code() identifies the
// failure class so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace scanres
