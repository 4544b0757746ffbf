#include "bronchometer/error.hpp"

namespace bronchometer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::CorruptFrame: return "CorruptFrame";
    case ErrorCode::UnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CropOutOfBounds: return "CropOutOfBounds";
    case ErrorCode::OverlappingBoxes: return "OverlappingBoxes";
    case ErrorCode::NoCarinaFound: return "NoCarinaFound";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::AirwayNotFound: return "AirwayNotFound";
    case ErrorCode::ArteryNotFound: return "ArteryNotFound";
    case ErrorCode::AnisotropicSpacing: return "AnisotropicSpacing";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::NoOuterCandidates: return "NoOuterCandidates";
    case ErrorCode::NegativeWall: return "NegativeWall";
    case ErrorCode::RoiOutOfBounds: return "RoiOutOfBounds";
    case ErrorCode::SpecOverflow: return "SpecOverflow";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::ScanNotFound: return "ScanNotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingManifest:
    case ErrorCode::InvalidManifest:
    case ErrorCode::FrameCountMismatch:
    case ErrorCode::CorruptFrame:
    case ErrorCode::UnsupportedBitDepth:
    case ErrorCode::InvalidArgument:
    case ErrorCode::CropOutOfBounds:
    case ErrorCode::RoiOutOfBounds:
    case ErrorCode::AnisotropicSpacing:
    case ErrorCode::SpecOverflow:
    case ErrorCode::SessionNotFound:
    case ErrorCode::ScanNotFound:
      return true;
    default:
      return false;
  }
}

}  // namespace bronchometer
