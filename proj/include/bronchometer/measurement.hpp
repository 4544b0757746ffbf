#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bronchometer/geometry.hpp"
#include "bronchometer/raster.hpp"

namespace bronchometer {

enum class Label : std::uint8_t { B = 0, G = 80, M = 255 };

struct LabelRaster {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;

  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

enum class RegionKind { inner_airway, artery, outer_airway };
std::string to_string(RegionKind kind);

struct RegionPerimeter {
  RegionKind kind = RegionKind::inner_airway;
  std::vector<Point> coords;  // clockwise, closed
  Mask mask;                  // filled region
};

struct Chord {
  Point p1;
  Point p2;
  double length_px = 0.0;
};

struct DiameterEstimate {
  std::vector<Chord> chords;  // chords[0] is the major axis
  double mean_px = 0.0;
  double mean_mm = 0.0;
};

enum class Direction { north, south, east, west };
std::string to_string(Direction d);

struct WallSample {
  Direction direction = Direction::north;
  Point inner_pt;
  Point outer_pt;
  double dist_px = 0.0;
};

struct Roi {
  std::string scan_id;
  int frame_index = 0;
  BoundingBox rect;  // frame coordinates, inclusive
  std::string label;
};

// Geometry in ROI-local coordinates; add rect.x_min / y_min to place it on the frame.
struct Measurement {
  Roi roi;
  DiameterEstimate iad;
  DiameterEstimate ard;
  double bar = 0.0;
  double wt_mm = 0.0;
  double wt_px = 0.0;
  std::vector<WallSample> wt_samples;
  std::uint64_t wt_seed = 0;
  std::vector<Point> airway_perimeter;
  std::vector<Point> artery_perimeter;
  std::vector<Point> outer_airway_perimeter;
  std::vector<std::string> warnings;
  std::string method_version;
};

inline constexpr const char* kMethodVersion = "bronchometer-1.0";

}  // namespace bronchometer
