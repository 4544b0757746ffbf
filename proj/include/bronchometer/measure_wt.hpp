#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bronchometer/measure_bar.hpp"
#include "bronchometer/measurement.hpp"
#include "bronchometer/raster.hpp"

namespace bronchometer::wt {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct WallConfig {
  double threshold_px = 4.0;
  double sector_half_width_deg = 30.0;
};

// value <= 20 -> B, otherwise G.
LabelRaster label_wall(const Frame& roi);
std::vector<Point> gray_coords(const LabelRaster& raster);

struct WallBand {
  std::vector<Point> gray_coords;
  std::vector<Point> band_coords;
  RegionPerimeter outer_perimeter;
  double threshold_px = 4.0;
};

// Gray pixels within `threshold_px` of any inner-perimeter pixel; the outer perimeter is the traced
// outer contour of that band. Throws EmptyBand.
WallBand wall_band(const std::vector<Point>& gray, const std::vector<Point>& inner_perimeter, double threshold_px,
                   int width, int height);

struct CardinalPoint {
  Direction direction = Direction::north;
  Point point;
};

// Arcs by angle from the perimeter centroid with image-up as north: N [45,135), W [135,225),
// S [225,315), E otherwise. One uniform draw per arc; empty arcs fall back to the pixel whose
// angle is closest to the arc centre. Order: north, south, east, west.
std::array<CardinalPoint, 4> cardinal_points(const std::vector<Point>& inner_perimeter, std::uint64_t seed);

struct WallResult {
  double wt_px = 0.0;
  double wt_mm = 0.0;
  std::array<WallSample, 4> samples;
  std::vector<Point> outer_perimeter;
  bool clipped = false;  // wt_px reached the band threshold
};

// For each cardinal inner point the paired outer pixel is the one radially aligned with it (smallest
// centroid-angle difference inside the sector; farthest wins among equally aligned pixels).
WallResult wall_thickness_from_band(const std::vector<Point>& inner_perimeter, const WallBand& band,
                                    double pixel_spacing_mm, std::uint64_t seed, const WallConfig& cfg = {});

WallResult wall_thickness(const Frame& roi, const std::vector<Point>& inner_perimeter, double pixel_spacing_mm,
                          std::uint64_t seed, const WallConfig& cfg = {});

// Clinicians' estimate, (oad - iad) / 2. Throws NegativeWall when oad < iad.
double wt_symmetric(double oad_mm, double iad_mm);

// BAR + WT for one ROI of a frame. Geometry in the result is ROI-local.
Measurement measure_roi(const Frame& frame, const Roi& roi, const PixelSpacing& spacing, std::uint64_t seed,
                        const WallConfig& cfg = {}, const bar::BarOptions& bar_opts = {});

}  // namespace bronchometer::wt
