#pragma once

#include <optional>
#include <vector>

#include "bronchometer/geometry.hpp"
#include "bronchometer/raster.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer::carina {

struct FrameRange {
  int lo = 0;
  int hi = 0;
};

// Exclusive-lower / inclusive-upper interval, (min_excl, max_incl].
struct OpenClosedRange {
  double min_excl = 0.0;
  double max_incl = 0.0;

  bool contains(double v) const { return v > min_excl && v <= max_incl; }
  bool empty() const { return !(max_incl > min_excl); }
};

enum class DilationMode { automatic, on, off };

struct SearchConfig {
  FrameRange frame_range{120, 200};
  BoundingBox crop_box{120, 200, 350, 300};
  OpenClosedRange area_range{200, 1500};
  OpenClosedRange gap_range{3, 7};
  DilationMode dilation = DilationMode::automatic;

  void validate() const;
  // dilation resolved against the scan length: automatic turns on above 500 frames.
  bool dilation_enabled(int frame_count) const;
};

// Crop box for 512x512 frames, rescaled for other sizes.
inline constexpr BoundingBox kReferenceCropBox{120, 200, 350, 300};
inline constexpr int kReferenceFrameSize = 512;

// Default search window by slice thickness. Unknown thicknesses fall back to the whole scan and
// set `standard` to false so callers can warn.
struct SearchRange {
  FrameRange range;
  bool standard = true;
};
SearchRange search_range(double slice_thickness_mm, int frame_count);

// Mediastinum for 0.67/1 mm, lung for 2 mm and thicker.
WindowKind default_window(double slice_thickness_mm);

// Builds the default config for a scan: search range, rescaled crop box, default filters.
SearchConfig default_config(const ScanManifest& manifest);

Frame preprocess_frame(const Frame& frame, const BoundingBox& crop_box);
Frame dilate_3x3(const Frame& frame);
std::vector<Component> connected_components(const Frame& frame);
std::vector<BoundingBox> component_boxes(const std::vector<Component>& components,
                                         const OpenClosedRange& area_range);
int gap_between(const BoundingBox& a, const BoundingBox& b);

struct Candidate {
  int frame = 0;
  BoundingBox box_a;  // left box
  BoundingBox box_b;  // right box
  int gap = 0;
};

struct Timings {
  double s1 = 0.0;  // preprocessing
  double s2 = 0.0;  // labeling + boxing
  double s3 = 0.0;  // gap analysis
};

struct CarinaResult {
  int carina_frame = 0;
  BoundingBox box_a;
  BoundingBox box_b;
  int gap_px = 0;
  std::vector<Candidate> candidates;
  Timings timings_s;
  // number of frames in range that produced exactly two boxes but failed the gap filter or overlapped
  int rejected_pairs = 0;
};

// Per-frame result of stages 1 and 2; exposed for reporting and tests.
struct FrameBoxes {
  int frame = 0;
  std::vector<BoundingBox> boxes;
};

// Candidate frames only (no minimum selection); empty when nothing qualifies.
std::vector<Candidate> find_candidates(const ScanVolume& volume, const SearchConfig& cfg,
                                       Timings* timings = nullptr,
                                       std::vector<FrameBoxes>* per_frame = nullptr);

// Throws NoCarinaFound when no frame in range has exactly two qualifying boxes with a valid gap.
CarinaResult detect_carina(const ScanVolume& volume, const SearchConfig& cfg);

}  // namespace bronchometer::carina
