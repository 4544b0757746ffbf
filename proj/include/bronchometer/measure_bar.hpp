#pragma once

#include <vector>

#include "bronchometer/measurement.hpp"
#include "bronchometer/raster.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer::bar {

// value <= 25 -> B, otherwise G.
LabelRaster label_airway(const Frame& roi);
// <= 25 -> B, (25, 45] -> M, everything above 45 -> G.
LabelRaster label_artery(const Frame& roi);

enum class Family { airway, artery };

struct RowMatch {
  int row = 0;
  int col_start = 0;  // boundary label, inclusive
  int col_end = 0;    // boundary label, inclusive

  friend bool operator==(const RowMatch&, const RowMatch&) = default;
};

// airway: G B^k G, k in [1, 13]; artery: M G^k M, k in [7, 22].
std::vector<RowMatch> match_row_sequences(const LabelRaster& raster, Family family);

// Marks matched spans (interior only, or the full pattern with `include_boundary`), closes
// with a 2x2 element and keeps the largest 8-connected region. Throws EmptyRegion.
Mask build_region_mask(const std::vector<RowMatch>& matches, int width, int height, bool include_boundary = false);

// 2x2 closing: dilation by {(0,0),(1,0),(0,1),(1,1)} then erosion by its reflection.
// Out-of-raster pixels count as unset for dilation and set for erosion.
Mask close_2x2(const Mask& mask);

// Moore-neighbour tracing of the region holding the topmost-leftmost set pixel. Clockwise,
// starts at that pixel, every boundary pixel listed once. Throws EmptyRegion.
RegionPerimeter trace_perimeter(const Mask& mask, RegionKind kind = RegionKind::inner_airway);

// Longest chord over all perimeter pixel pairs; ties go to the lexicographically smallest (p1, p2).
Chord max_chord(const std::vector<Point>& perimeter);

// Major axis plus chords rotated around the perimeter by index offsets {4, 8} (major <= 20 px)
// or {4, 8, 12} (major > 20 px), both endpoints shifted in the same direction.
std::vector<Chord> chord_fan(const std::vector<Point>& perimeter, const Chord& major);

DiameterEstimate mean_diameter(const std::vector<Chord>& chords, const PixelSpacing& spacing);

struct BarResult {
  DiameterEstimate iad;
  DiameterEstimate ard;
  double bar = 0.0;
  RegionPerimeter airway;
  RegionPerimeter artery;
};

// Grows `seed` through 4-connected pixels carrying the family's object labels (airway: B;
// artery: M or G). Returns the seed unchanged when the fill reaches the raster border, which means
// it escaped into the surrounding tissue.
Mask fill_region(const Mask& seed, const LabelRaster& raster, Family family);

struct BarOptions {
  // Artery spans include their M boundary pixels, so the diameter is the outer artery diameter.
  bool artery_include_boundary = true;
  // Seed-fill the matched rows; recovers the short cap rows the artery pattern cannot match.
  bool fill_regions = true;
};

// Full inner-airway / artery pipeline on an ROI raster. Throws AirwayNotFound / ArteryNotFound.
BarResult measure_bar(const Frame& roi, const PixelSpacing& spacing, const BarOptions& opts = {});

// Single-region diameter pipeline: trace, major axis, fan, mean.
DiameterEstimate region_diameter(const Mask& region, const PixelSpacing& spacing, RegionPerimeter* perimeter = nullptr);

}  // namespace bronchometer::bar
