#include "bronchometer/carina.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

#include "bronchometer/error.hpp"

namespace bronchometer::carina {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool near(double a, double b) { return std::abs(a - b) < 1e-3; }

}  // namespace

void SearchConfig::validate() const {
  if (frame_range.lo > frame_range.hi) throw Error(ErrorCode::InvalidArgument, "frame range lo > hi");
  if (!crop_box.valid()) throw Error(ErrorCode::InvalidArgument, "crop box is inverted");
  if (area_range.empty()) throw Error(ErrorCode::InvalidArgument, "area range is empty");
  if (gap_range.empty()) throw Error(ErrorCode::InvalidArgument, "gap range is empty");
}

bool SearchConfig::dilation_enabled(int frame_count) const {
  switch (dilation) {
    case DilationMode::on: return true;
    case DilationMode::off: return false;
    case DilationMode::automatic: return frame_count > 500;
  }
  return false;
}

SearchRange search_range(double slice_thickness_mm, int frame_count) {
  if (!(slice_thickness_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "slice thickness must be positive");
  if (near(slice_thickness_mm, 0.67)) return {{120, 200}, true};
  if (near(slice_thickness_mm, 1.0)) return {{30, 80}, true};
  if (near(slice_thickness_mm, 2.0)) return {{10, 40}, true};
  return {{0, std::max(0, frame_count - 1)}, false};
}

WindowKind default_window(double slice_thickness_mm) {
  return slice_thickness_mm <= 1.0 + 1e-3 ? WindowKind::mediastinum : WindowKind::lung;
}

SearchConfig default_config(const ScanManifest& manifest) {
  SearchConfig cfg;
  cfg.frame_range = search_range(manifest.slice_thickness_mm, manifest.frame_count).range;
  const auto sx = scale_rect(kReferenceCropBox, kReferenceFrameSize, manifest.width);
  const auto sy = scale_rect(kReferenceCropBox, kReferenceFrameSize, manifest.height);
  cfg.crop_box = {sx.x_min, sy.y_min, sx.x_max, sy.y_max};
  return cfg;
}

Frame preprocess_frame(const Frame& frame, const BoundingBox& crop_box) {
  if (!crop_box.valid() || crop_box.x_min < 0 || crop_box.y_min < 0 || crop_box.x_max >= frame.width ||
      crop_box.y_max >= frame.height)
    throw Error(ErrorCode::CropOutOfBounds, "crop box exceeds frame bounds");

  Frame out(frame.width, frame.height, 0, frame.index);
  for (int y = crop_box.y_min; y <= crop_box.y_max; ++y)
    for (int x = crop_box.x_min; x <= crop_box.x_max; ++x) out.at(x, y) = frame.at(x, y) == 0 ? 0 : 255;
  return out;
}

Frame dilate_3x3(const Frame& frame) {
  Frame out(frame.width, frame.height, 255, frame.index);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (frame.at(x, y) != 0) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (out.in_bounds(x + dx, y + dy)) out.at(x + dx, y + dy) = 0;
    }
  }
  return out;
}

std::vector<Component> connected_components(const Frame& frame) {
  return label_components(frame.width, frame.height, [&](int x, int y) { return frame.at(x, y) == 0; });
}

std::vector<BoundingBox> component_boxes(const std::vector<Component>& components,
                                         const OpenClosedRange& area_range) {
  std::vector<BoundingBox> boxes;
  for (const auto& c : components) {
    if (c.empty()) continue;
    const auto box = bounding_box(c);
    if (area_range.contains(static_cast<double>(box.area()))) boxes.push_back(box);
  }
  return boxes;
}

int gap_between(const BoundingBox& a, const BoundingBox& b) {
  const auto& left = a.x_max <= b.x_max ? a : b;
  const auto& right = a.x_max <= b.x_max ? b : a;
  const int gap = right.x_min - left.x_max;
  if (gap <= 0) throw Error(ErrorCode::OverlappingBoxes, "boxes overlap horizontally");
  return gap;
}

std::vector<Candidate> find_candidates(const ScanVolume& volume, const SearchConfig& cfg, Timings* timings,
                                       std::vector<FrameBoxes>* per_frame) {
  cfg.validate();
  const bool dilate = cfg.dilation_enabled(volume.frame_count());
  const int lo = std::max(cfg.frame_range.lo, 0);
  const int hi = std::min(cfg.frame_range.hi, volume.frame_count() - 1);

  Timings t;
  std::vector<FrameBoxes> boxed;
  for (int f = lo; f <= hi; ++f) {
    auto start = Clock::now();
    Frame binary = preprocess_frame(volume.frames[static_cast<std::size_t>(f)], cfg.crop_box);
    if (dilate) binary = dilate_3x3(binary);
    t.s1 += seconds_since(start);

    start = Clock::now();
    boxed.push_back({f, component_boxes(connected_components(binary), cfg.area_range)});
    t.s2 += seconds_since(start);
  }

  const auto start = Clock::now();
  std::vector<Candidate> candidates;
  for (const auto& fb : boxed) {
    if (fb.boxes.size() != 2) continue;
    const auto& [a, b] = std::tie(fb.boxes[0], fb.boxes[1]);
    const bool a_left = a.x_max <= b.x_max;
    const auto& left = a_left ? a : b;
    const auto& right = a_left ? b : a;
    const int gap = right.x_min - left.x_max;
    if (gap <= 0 || !cfg.gap_range.contains(gap)) continue;
    candidates.push_back({fb.frame, left, right, gap});
  }
  t.s3 += seconds_since(start);

  if (timings) *timings = t;
  if (per_frame) *per_frame = std::move(boxed);
  return candidates;
}

CarinaResult detect_carina(const ScanVolume& volume, const SearchConfig& cfg) {
  CarinaResult result;
  std::vector<FrameBoxes> per_frame;
  result.candidates = find_candidates(volume, cfg, &result.timings_s, &per_frame);

  const auto start = Clock::now();
  for (const auto& fb : per_frame)
    if (fb.boxes.size() == 2) ++result.rejected_pairs;
  result.rejected_pairs -= static_cast<int>(result.candidates.size());

  if (result.candidates.empty())
    throw Error(ErrorCode::NoCarinaFound, "no frame in [" + std::to_string(cfg.frame_range.lo) + ", " +
                                              std::to_string(cfg.frame_range.hi) +
                                              "] has two main-bronchus boxes with a qualifying gap");

  // Strict comparison keeps the earliest frame on equal gaps.
  const Candidate* best = &result.candidates.front();
  for (const auto& c : result.candidates)
    if (c.gap < best->gap) best = &c;

  result.carina_frame = best->frame;
  result.box_a = best->box_a;
  result.box_b = best->box_b;
  result.gap_px = best->gap;
  result.timings_s.s3 += seconds_since(start);
  return result;
}

}  // namespace bronchometer::carina
