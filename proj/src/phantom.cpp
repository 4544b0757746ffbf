#include "bronchometer/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bronchometer/carina.hpp"
#include "bronchometer/error.hpp"

namespace bronchometer::phantom {

Mask rasterize_disc(int width, int height, int x0, int y0, int diameter) {
  Mask m(width, height);
  const double r = diameter / 2.0;
  const double cx = x0 + (diameter - 1) / 2.0;
  const double cy = y0 + (diameter - 1) / 2.0;
  for (int y = y0; y < y0 + diameter; ++y)
    for (int x = x0; x < x0 + diameter; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= r * r && m.in_bounds(x, y)) m.set(x, y);
    }
  return m;
}

void BaPhantomSpec::validate() const {
  if (lumen_d_px <= 0 || wall_t_px <= 0 || artery_d_px <= 0 || separation_px <= 0 || frame_size <= 0)
    throw Error(ErrorCode::InvalidArgument, "phantom geometry must be positive");
  const auto& i = intensities;
  if (i.lumen > 20 || i.parenchyma > 20) throw Error(ErrorCode::InvalidArgument, "lumen/parenchyma must be <= 20");
  if (i.wall <= 100) throw Error(ErrorCode::InvalidArgument, "wall must be > 100");
  if (i.artery_edge <= 25 || i.artery_edge > 45) throw Error(ErrorCode::InvalidArgument, "artery edge must be in (25,45]");
  if (i.artery_core <= 45) throw Error(ErrorCode::InvalidArgument, "artery core must be > 45");
}

namespace {

struct Band {
  int lo;
  int hi;
};

std::uint8_t noisy(std::uint8_t v, Band band, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return v;
  std::normal_distribution<double> n(0.0, sigma);
  return static_cast<std::uint8_t>(std::clamp<long>(round_half_up(v + n(rng)), band.lo, band.hi));
}

bool has_outside_4neighbor(const Mask& m, int x, int y) {
  return !m.get(x - 1, y) || !m.get(x + 1, y) || !m.get(x, y - 1) || !m.get(x, y + 1);
}

}  // namespace

BaPhantom gen_ba_pair(const BaPhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int oad = spec.lumen_d_px + 2 * spec.wall_t_px;
  const int margin = 6;
  const int span_x = oad + spec.separation_px + spec.artery_d_px;
  const int span_y = std::max(oad, spec.artery_d_px);
  if (span_x + 2 * margin > spec.frame_size || span_y + 2 * margin > spec.frame_size)
    throw Error(ErrorCode::SpecOverflow, "BA pair does not fit in the frame");

  const int n = spec.frame_size;
  const int left = (n - span_x) / 2;
  const int mid_y = n / 2;
  const int airway_y0 = mid_y - oad / 2;
  const int artery_x0 = left + oad + spec.separation_px;
  const int artery_y0 = mid_y - spec.artery_d_px / 2;

  BaPhantom ph;
  const Mask outer = rasterize_disc(n, n, left, airway_y0, oad);
  ph.lumen_mask = rasterize_disc(n, n, left + spec.wall_t_px, airway_y0 + spec.wall_t_px, spec.lumen_d_px);
  ph.artery_mask = rasterize_disc(n, n, artery_x0, artery_y0, spec.artery_d_px);

  const auto& iv = spec.intensities;
  const Band core_band = iv.artery_core <= 100 ? Band{46, 100} : Band{101, 255};
  std::mt19937_64 rng(seed);
  ph.frame = Frame(n, n, 0, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      std::uint8_t v;
      if (ph.lumen_mask.get(x, y))
        v = noisy(iv.lumen, {0, 20}, spec.noise_sigma, rng);
      else if (outer.get(x, y))
        v = noisy(iv.wall, {101, 255}, spec.noise_sigma, rng);
      else if (ph.artery_mask.get(x, y))
        v = has_outside_4neighbor(ph.artery_mask, x, y) ? noisy(iv.artery_edge, {26, 45}, spec.noise_sigma, rng)
                                                        : noisy(iv.artery_core, core_band, spec.noise_sigma, rng);
      else
        v = noisy(iv.parenchyma, {0, 20}, spec.noise_sigma, rng);
      ph.frame.at(x, y) = v;
    }
  }

  ph.truth = {static_cast<double>(spec.lumen_d_px), static_cast<double>(oad), static_cast<double>(spec.artery_d_px),
              static_cast<double>(spec.wall_t_px)};
  const int roi_margin = 3;
  ph.roi = {left - roi_margin, std::min(airway_y0, artery_y0) - roi_margin, left + span_x - 1 + roi_margin,
            std::max(airway_y0 + oad, artery_y0 + spec.artery_d_px) - 1 + roi_margin};
  return ph;
}

void TracheaPhantomSpec::validate() const {
  if (n_frames < 1 || split_frame <= 0 || split_frame >= n_frames)
    throw Error(ErrorCode::InvalidArgument, "split frame must lie inside the volume");
  if (lumen_radius_px <= 0 || bronchi_gap_px <= 0 || frame_size < 64)
    throw Error(ErrorCode::InvalidArgument, "phantom geometry must be positive");
  if (clutter_frames < 0) throw Error(ErrorCode::InvalidArgument, "clutter_frames must be >= 0");
}

int trachea_gap_at(const TracheaPhantomSpec& spec, int frame) {
  return spec.bronchi_gap_px + (frame - spec.split_frame);
}

namespace {

void fill_ellipse(HuImage& img, int cx, int cy, int rx, int ry, std::int16_t hu) {
  for (int y = cy - ry; y <= cy + ry; ++y)
    for (int x = cx - rx; x <= cx + rx; ++x) {
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      const double nx = static_cast<double>(x - cx) / rx;
      const double ny = static_cast<double>(y - cy) / ry;
      if (nx * nx + ny * ny <= 1.0) img.values[static_cast<std::size_t>(y) * img.width + x] = hu;
    }
}

void fill_rect(HuImage& img, const BoundingBox& r, std::int16_t hu) {
  for (int y = std::max(r.y_min, 0); y <= std::min(r.y_max, img.height - 1); ++y)
    for (int x = std::max(r.x_min, 0); x <= std::min(r.x_max, img.width - 1); ++x)
      img.values[static_cast<std::size_t>(y) * img.width + x] = hu;
}

}  // namespace

std::vector<HuImage> gen_trachea_hu(const TracheaPhantomSpec& spec) {
  spec.validate();
  const int n = spec.frame_size;
  const auto crop = scale_rect(carina::kReferenceCropBox, carina::kReferenceFrameSize, n);
  const int cx = (crop.x_min + crop.x_max) / 2;
  const int cy = (crop.y_min + crop.y_max) / 2;
  const int rx = spec.lumen_radius_px;
  const int ry = std::max(1, spec.lumen_radius_px * 4 / 5);
  const int trachea_r = spec.lumen_radius_px * 3 / 2;
  const int last_gap = trachea_gap_at(spec, spec.n_frames - 1);
  const int half_span = std::max(trachea_r, rx + (last_gap + 1) / 2 + rx);
  const int drop = std::min(spec.n_frames - 1 - spec.split_frame, 20);
  if (cx - half_span - rx < 0 || cx + half_span + rx >= n || cy - trachea_r < 0 || cy + std::max(trachea_r, drop + ry) >= n)
    throw Error(ErrorCode::SpecOverflow, "trachea phantom does not fit in the frame");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma_hu > 0 ? spec.noise_sigma_hu : 1.0);

  std::vector<HuImage> frames;
  frames.reserve(static_cast<std::size_t>(spec.n_frames));
  for (int f = 0; f < spec.n_frames; ++f) {
    HuImage img{n, n, std::vector<std::int16_t>(static_cast<std::size_t>(n) * n, kTissueHu)};
    if (spec.noise_sigma_hu > 0)
      for (auto& v : img.values) v = static_cast<std::int16_t>(std::clamp<long>(round_half_up(v + noise(rng)), -90, 200));

    if (f < spec.split_frame) {
      fill_ellipse(img, cx, cy, trachea_r, trachea_r, kLumenHu);
      if (f >= spec.split_frame - spec.clutter_frames) {
        const int patch_x0 = cx + trachea_r + 2;
        fill_rect(img, {patch_x0, cy - 25, patch_x0 + 58, cy + 25}, kParenchymaHu);
        fill_ellipse(img, cx + trachea_r + 5 + rx, cy, rx, ry, kLumenHu);
      }
    } else {
      const int gap = trachea_gap_at(spec, f);
      const int y = cy + std::min(f - spec.split_frame, 20);
      const int left_cx = cx - rx - gap / 2;
      fill_ellipse(img, left_cx, y, rx, ry, kLumenHu);
      fill_ellipse(img, left_cx + 2 * rx + gap, y, rx, ry, kLumenHu);
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

std::pair<ScanVolume, int> gen_trachea_volume(const TracheaPhantomSpec& spec, WindowKind window) {
  const auto preset = preset_for(window).value_or(WindowPreset::mediastinum());
  const auto hu = gen_trachea_hu(spec);
  ScanVolume vol;
  vol.manifest = {"phantom-trachea",
                  spec.n_frames,
                  spec.frame_size,
                  spec.frame_size,
                  spec.slice_thickness_mm,
                  {spec.pixel_spacing_mm, spec.pixel_spacing_mm},
                  window == WindowKind::none ? WindowKind::mediastinum : window};
  vol.frames.reserve(hu.size());
  for (std::size_t i = 0; i < hu.size(); ++i) vol.frames.push_back(apply_window(hu[i], preset, static_cast<int>(i)));
  return {std::move(vol), spec.split_frame};
}

double oracle_max_diameter(const Mask& filled) {
  const auto pts = filled.points();
  std::int64_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, squared_distance(pts[i], pts[j]));
  return std::sqrt(static_cast<double>(best));
}

}  // namespace bronchometer::phantom
