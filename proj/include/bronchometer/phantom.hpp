#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bronchometer/geometry.hpp"
#include "bronchometer/raster.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer::phantom {

// Disc of `diameter` pixels whose pixel-centre footprint spans exactly `diameter` columns and rows.
// (x0, y0) is the top-left pixel of that footprint.
Mask rasterize_disc(int width, int height, int x0, int y0, int diameter);

struct BaIntensities {
  std::uint8_t lumen = 5;
  std::uint8_t wall = 200;
  std::uint8_t parenchyma = 10;
  std::uint8_t artery_edge = 35;
  std::uint8_t artery_core = 75;
};

struct BaPhantomSpec {
  int lumen_d_px = 10;
  int wall_t_px = 3;
  int artery_d_px = 12;
  // Parenchyma between the airway wall and the artery edge. Kept above the airway pattern's
  // 13-pixel limit so the gap itself never reads as a lumen.
  int separation_px = 16;
  BaIntensities intensities;
  double noise_sigma = 0.0;
  int frame_size = 128;

  void validate() const;
};

struct BaGroundTruth {
  double iad_px = 0.0;
  double oad_px = 0.0;
  double ard_px = 0.0;
  double wt_px = 0.0;
};

struct BaPhantom {
  Frame frame;
  BaGroundTruth truth;
  BoundingBox roi;  // tight box around the pair plus a small margin
  Mask lumen_mask;
  Mask artery_mask;
};

// Throws SpecOverflow when the pair does not fit in the frame.
BaPhantom gen_ba_pair(const BaPhantomSpec& spec, std::uint64_t seed);

struct TracheaPhantomSpec {
  int n_frames = 100;
  int split_frame = 50;
  int lumen_radius_px = 10;
  int bronchi_gap_px = 5;
  int frame_size = 512;
  double slice_thickness_mm = 1.0;
  double pixel_spacing_mm = 0.7;
  double noise_sigma_hu = 10.0;
  // Parenchyma patch with an air pocket beside the trachea in the frames just before the split.
  // Renders as a separate dark box only under the lung window.
  int clutter_frames = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr std::int16_t kLumenHu = -1300;  // below both window floors: black in either preset
inline constexpr std::int16_t kTissueHu = 40;
inline constexpr std::int16_t kParenchymaHu = -850;

// Gap between the two bronchi in frame f (>= split): bronchi_gap_px + (f - split).
int trachea_gap_at(const TracheaPhantomSpec& spec, int frame);

std::vector<HuImage> gen_trachea_hu(const TracheaPhantomSpec& spec);
std::pair<ScanVolume, int> gen_trachea_volume(const TracheaPhantomSpec& spec,
                                              WindowKind window = WindowKind::mediastinum);

// Exhaustive all-pairs maximum distance over every set pixel (not just the boundary).
double oracle_max_diameter(const Mask& filled);

}  // namespace bronchometer::phantom
