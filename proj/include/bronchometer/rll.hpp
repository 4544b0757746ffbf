#pragma once

#include <array>
#include <vector>

#include "bronchometer/carina.hpp"
#include "bronchometer/geometry.hpp"
#include "bronchometer/raster.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer::rll {

struct RllSchedule {
  int dx = 10;               // X decrement per frame
  int dy = 5;                // Y decrement per frame once X reaches 0
  double angle_deg = 270.0;  // initial ray direction

  void validate() const;
};

// 0.67 mm -> (10, 5), 1 mm -> (25, 12), 2 mm -> (50, 25); other thicknesses use the nearest.
RllSchedule schedule_for(double slice_thickness_mm);

struct RllPolygon {
  Point start_point;
  Point end_point;
  Point fourth_point;
  Point right_point;

  std::array<Point, 4> vertices() const { return {start_point, end_point, fourth_point, right_point}; }
};

// Which y_max to take from the two carina boxes.
enum class StartCorner { min_y_max, max_y_max };

Point start_point_from_boxes(const BoundingBox& a, const BoundingBox& b,
                             StartCorner corner = StartCorner::min_y_max);

Point initial_endpoint(Point start, double angle_deg, int frame_w, int frame_h);
Point advance_endpoint(Point endpoint, const RllSchedule& schedule);
RllPolygon build_polygon(Point start, Point end, int frame_h);

// Even-odd fill, boundary inclusive. Zero-area polygons retain nothing.
bool polygon_contains(const std::array<Point, 4>& poly, Point p);
Frame crop_polygon(const Frame& frame, const RllPolygon& poly);

struct RllFrame {
  int frame_index = 0;
  Frame cropped;
  RllPolygon polygon;
};

struct ExtractOptions {
  StartCorner corner = StartCorner::min_y_max;
  bool include_carina_frame = false;
};

// Endpoint schedule only, one polygon per emitted frame.
std::vector<std::pair<int, RllPolygon>> plan_polygons(const ScanVolume& volume, const carina::CarinaResult& carina,
                                                      const RllSchedule& schedule, const ExtractOptions& opts = {});

std::vector<RllFrame> extract_rll(const ScanVolume& volume, const carina::CarinaResult& carina,
                                  const RllSchedule& schedule, const ExtractOptions& opts = {});

}  // namespace bronchometer::rll
