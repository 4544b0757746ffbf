#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bronchometer {

enum class ErrorCode {
  // input / volume_io
  MissingManifest,
  InvalidManifest,
  FrameCountMismatch,
  CorruptFrame,
  UnsupportedBitDepth,
  InvalidArgument,
  // carina
  CropOutOfBounds,
  OverlappingBoxes,
  NoCarinaFound,
  // rll
  DegenerateAngle,
  // measurement
  EmptyRegion,
  AirwayNotFound,
  ArteryNotFound,
  AnisotropicSpacing,
  EmptyBand,
  NoOuterCandidates,
  NegativeWall,
  RoiOutOfBounds,
  // phantom
  SpecOverflow,
  // service
  SessionNotFound,
  ScanNotFound,
  Io,
};

std::string_view to_string(ErrorCode code);

// Input errors map to exit code 2, everything else to 3.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bronchometer
