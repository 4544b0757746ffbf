#include "bronchometer/rll.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bronchometer/error.hpp"

namespace bronchometer::rll {

void RllSchedule::validate() const {
  if (dx <= 0 || dy <= 0) throw Error(ErrorCode::InvalidArgument, "schedule steps must be positive");
  if (angle_deg < 180.0 || angle_deg >= 360.0) throw Error(ErrorCode::InvalidArgument, "angle must be in [180, 360)");
}

RllSchedule schedule_for(double t) {
  if (t < (0.67 + 1.0) / 2) return {10, 5, 270.0};
  if (t < (1.0 + 2.0) / 2) return {25, 12, 270.0};
  return {50, 25, 270.0};
}

Point start_point_from_boxes(const BoundingBox& a, const BoundingBox& b, StartCorner corner) {
  const int x = std::max(a.x_max, b.x_max);
  const int y = corner == StartCorner::min_y_max ? std::min(a.y_max, b.y_max) : std::max(a.y_max, b.y_max);
  return {x, y};
}

Point initial_endpoint(Point start, double angle_deg, int frame_w, int frame_h) {
  if (angle_deg < 180.0 || angle_deg >= 360.0) throw Error(ErrorCode::InvalidArgument, "angle must be in [180, 360)");
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Distance along the ray to the left edge and to the bottom edge.
  const double to_left = std::abs(c) < 1e-9 ? kInf : -start.x / c;
  const double to_bottom = std::abs(s) < 1e-9 ? kInf : (frame_h - start.y) / -s;

  double length = kInf;
  for (double d : {to_left, to_bottom})
    if (std::isfinite(d) && d >= 0.0) length = std::min(length, d);
  if (!std::isfinite(length)) throw Error(ErrorCode::DegenerateAngle, "ray reaches neither the left nor bottom edge");

  const long x = round_half_up(start.x + length * c);
  const long y = round_half_up(start.y - length * s);
  return {static_cast<int>(std::clamp<long>(x, 0, frame_w - 1)), static_cast<int>(std::clamp<long>(y, 0, frame_h - 1))};
}

Point advance_endpoint(Point endpoint, const RllSchedule& schedule) {
  if (endpoint.x > 0) return {std::max(0, endpoint.x - schedule.dx), endpoint.y};
  return {0, std::max(0, endpoint.y - schedule.dy)};
}

RllPolygon build_polygon(Point start, Point end, int frame_h) {
  return {start, end, {0, frame_h - 1}, {start.x, frame_h - 1}};
}

namespace {

long twice_area(const std::array<Point, 4>& poly) {
  long acc = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    acc += static_cast<long>(a.x) * b.y - static_cast<long>(b.x) * a.y;
  }
  return std::abs(acc);
}

bool on_segment(Point a, Point b, Point p) {
  const long cross = static_cast<long>(b.x - a.x) * (p.y - a.y) - static_cast<long>(b.y - a.y) * (p.x - a.x);
  if (cross != 0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool polygon_contains(const std::array<Point, 4>& poly, Point p) {
  if (twice_area(poly) == 0) return false;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if (on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + static_cast<double>(p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Frame crop_polygon(const Frame& frame, const RllPolygon& poly) {
  Frame out(frame.width, frame.height, 0, frame.index);
  const auto verts = poly.vertices();
  if (twice_area(verts) == 0) return out;

  int x0 = frame.width, y0 = frame.height, x1 = -1, y1 = -1;
  for (const auto& v : verts) {
    x0 = std::min(x0, v.x);
    y0 = std::min(y0, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, frame.width - 1);
  y1 = std::min(y1, frame.height - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (polygon_contains(verts, {x, y})) out.at(x, y) = frame.at(x, y);
  return out;
}

std::vector<std::pair<int, RllPolygon>> plan_polygons(const ScanVolume& volume, const carina::CarinaResult& carina,
                                                      const RllSchedule& schedule, const ExtractOptions& opts) {
  schedule.validate();
  const int w = volume.manifest.width;
  const int h = volume.manifest.height;
  const Point start = start_point_from_boxes(carina.box_a, carina.box_b, opts.corner);
  if (start.x < 0 || start.y < 0 || start.x >= w || start.y >= h)
    throw Error(ErrorCode::InvalidArgument, "carina boxes lie outside the frame");

  std::vector<std::pair<int, RllPolygon>> plan;
  Point end = initial_endpoint(start, schedule.angle_deg, w, h);
  if (opts.include_carina_frame && carina.carina_frame < volume.frame_count())
    plan.emplace_back(carina.carina_frame, build_polygon(start, end, h));
  for (int f = carina.carina_frame + 1; f < volume.frame_count(); ++f) {
    end = advance_endpoint(end, schedule);
    plan.emplace_back(f, build_polygon(start, end, h));
  }
  return plan;
}

std::vector<RllFrame> extract_rll(const ScanVolume& volume, const carina::CarinaResult& carina,
                                  const RllSchedule& schedule, const ExtractOptions& opts) {
  const auto plan = plan_polygons(volume, carina, schedule, opts);
  std::vector<RllFrame> out(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& [f, poly] = plan[i];
    out[i] = {f, crop_polygon(volume.frames[static_cast<std::size_t>(f)], poly), poly};
  }
  return out;
}

}  // namespace bronchometer::rll
