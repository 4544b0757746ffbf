#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace bronchometer {

struct Point {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

inline std::int64_t squared_distance(Point a, Point b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Axis-aligned box, both corners inclusive.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  // (x_max - x_min) * (y_max - y_min), matching how the detector filters boxes.
  constexpr long area() const {
    return static_cast<long>(x_max - x_min) * static_cast<long>(y_max - y_min);
  }
  constexpr int width() const { return x_max - x_min + 1; }
  constexpr int height() const { return y_max - y_min + 1; }
  constexpr bool valid() const { return x_min <= x_max && y_min <= y_max; }
  constexpr bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Round half away from zero towards +inf for positives (half-up). Used project-wide.
inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

}  // namespace bronchometer
