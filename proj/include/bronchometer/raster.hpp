#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bronchometer/geometry.hpp"

namespace bronchometer {

// Row-major 8-bit grayscale raster.
struct Frame {
  int index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0, int idx = 0)
      : index(idx), width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  // Copy of the inclusive rectangle; caller guarantees it is in bounds.
  Frame crop(const BoundingBox& r) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Binary raster, 1 = set.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool get(int x, int y) const { return in_bounds(x, y) && data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  static Mask from_points(int w, int h, std::span<const Point> pts);
  std::vector<Point> points() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

using Component = std::vector<Point>;

// Maximal 8-connected sets of pixels satisfying `is_foreground`, found with an
// explicit-stack depth-first search. Components are ordered by the raster-scan
// position of their first pixel; pixels within a component follow DFS order.
std::vector<Component> label_components(int width, int height,
                                        const std::function<bool(int, int)>& is_foreground);

BoundingBox bounding_box(const Component& component);

// Largest 8-connected region of a mask (first in raster order on ties).
Mask largest_region(const Mask& mask);

}  // namespace bronchometer
