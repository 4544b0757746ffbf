#include "bronchometer/measure_wt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bronchometer/error.hpp"

namespace bronchometer::wt {

namespace {

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

Centroid centroid_of(const std::vector<Point>& pts) {
  Centroid c;
  for (const auto& p : pts) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(pts.size());
  c.y /= static_cast<double>(pts.size());
  return c;
}

// Degrees in [0, 360), counter-clockwise with image-up as 90.
double angle_deg(const Centroid& c, Point p) {
  const double a = std::atan2(-(p.y - c.y), p.x - c.x) * 180.0 / std::numbers::pi;
  return a < 0.0 ? a + 360.0 : a;
}

double angular_diff(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

Direction arc_of(double angle) {
  if (angle >= 45.0 && angle < 135.0) return Direction::north;
  if (angle >= 135.0 && angle < 225.0) return Direction::west;
  if (angle >= 225.0 && angle < 315.0) return Direction::south;
  return Direction::east;
}

double arc_centre(Direction d) {
  switch (d) {
    case Direction::north: return 90.0;
    case Direction::west: return 180.0;
    case Direction::south: return 270.0;
    case Direction::east: return 0.0;
  }
  return 0.0;
}

}  // namespace

LabelRaster label_wall(const Frame& roi) {
  LabelRaster out{roi.width, roi.height, std::vector<Label>(roi.pixels.size())};
  std::transform(roi.pixels.begin(), roi.pixels.end(), out.labels.begin(),
                 [](std::uint8_t v) { return v <= 20 ? Label::B : Label::G; });
  return out;
}

std::vector<Point> gray_coords(const LabelRaster& raster) {
  std::vector<Point> out;
  for (int y = 0; y < raster.height; ++y)
    for (int x = 0; x < raster.width; ++x)
      if (raster.at(x, y) == Label::G) out.push_back({x, y});
  return out;
}

WallBand wall_band(const std::vector<Point>& gray, const std::vector<Point>& inner_perimeter, double threshold_px,
                   int width, int height) {
  WallBand band;
  band.gray_coords = gray;
  band.threshold_px = threshold_px;
  if (gray.empty() || inner_perimeter.empty()) throw Error(ErrorCode::EmptyBand, "no gray pixels near the airway");

  const double t2 = threshold_px * threshold_px;
  for (const auto& g : gray) {
    for (const auto& p : inner_perimeter) {
      if (static_cast<double>(squared_distance(g, p)) <= t2) {
        band.band_coords.push_back(g);
        break;
      }
    }
  }
  if (band.band_coords.empty()) throw Error(ErrorCode::EmptyBand, "no gray pixels within threshold");

  const auto mask = largest_region(Mask::from_points(width, height, band.band_coords));
  band.outer_perimeter = bar::trace_perimeter(mask, RegionKind::outer_airway);
  return band;
}

std::array<CardinalPoint, 4> cardinal_points(const std::vector<Point>& inner_perimeter, std::uint64_t seed) {
  if (inner_perimeter.empty()) throw Error(ErrorCode::EmptyRegion, "empty inner perimeter");
  const auto c = centroid_of(inner_perimeter);
  constexpr std::array<Direction, 4> kOrder{Direction::north, Direction::south, Direction::east, Direction::west};

  std::array<std::vector<Point>, 4> arcs;
  for (const auto& p : inner_perimeter) {
    const auto d = arc_of(angle_deg(c, p));
    arcs[static_cast<std::size_t>(std::find(kOrder.begin(), kOrder.end(), d) - kOrder.begin())].push_back(p);
  }

  std::mt19937_64 rng(seed);
  std::array<CardinalPoint, 4> out;
  for (std::size_t i = 0; i < kOrder.size(); ++i) {
    out[i].direction = kOrder[i];
    const auto& arc = arcs[i];
    if (!arc.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, arc.size() - 1);
      out[i].point = arc[pick(rng)];
      continue;
    }
    const double target = arc_centre(kOrder[i]);
    out[i].point = *std::min_element(inner_perimeter.begin(), inner_perimeter.end(), [&](Point a, Point b) {
      return angular_diff(angle_deg(c, a), target) < angular_diff(angle_deg(c, b), target);
    });
  }
  return out;
}

namespace {

// True when most of the outer contour still touches gray pixels the band left out, i.e. the wall
// continues past the threshold.
bool wall_continues(const WallBand& band) {
  const Mask& m = band.outer_perimeter.mask;
  const Mask gray = Mask::from_points(m.width, m.height, band.gray_coords);
  const Mask inside = Mask::from_points(m.width, m.height, band.band_coords);
  std::size_t touching = 0;
  for (const Point p : band.outer_perimeter.coords) {
    bool t = false;
    for (int dy = -1; dy <= 1 && !t; ++dy)
      for (int dx = -1; dx <= 1 && !t; ++dx) t = gray.get(p.x + dx, p.y + dy) && !inside.get(p.x + dx, p.y + dy);
    touching += t;
  }
  return 2 * touching > band.outer_perimeter.coords.size();
}

}  // namespace

WallResult wall_thickness_from_band(const std::vector<Point>& inner_perimeter, const WallBand& band,
                                    double pixel_spacing_mm, std::uint64_t seed, const WallConfig& cfg) {
  const auto& outer = band.outer_perimeter.coords;
  if (outer.empty()) throw Error(ErrorCode::EmptyBand, "outer perimeter is empty");
  const auto c = centroid_of(inner_perimeter);
  const auto cardinals = cardinal_points(inner_perimeter, seed);

  WallResult res;
  res.outer_perimeter = outer;
  double total = 0.0;
  for (std::size_t i = 0; i < cardinals.size(); ++i) {
    const Point inner = cardinals[i].point;
    const double phi = angle_deg(c, inner);

    // Best = smallest angular deviation, then farthest from the inner point.
    const Point* best = nullptr;
    double best_dev = std::numeric_limits<double>::infinity();
    double best_dist = -1.0;
    auto consider = [&](const Point& o, bool in_sector_only) {
      const double dev = angular_diff(angle_deg(c, o), phi);
      if (in_sector_only && dev > cfg.sector_half_width_deg) return;
      const double dist = distance(inner, o);
      if (dev < best_dev - 1e-9 || (std::abs(dev - best_dev) <= 1e-9 && dist > best_dist)) {
        best = &o;
        best_dev = dev;
        best_dist = dist;
      }
    };
    for (const auto& o : outer) consider(o, true);
    if (!best)
      for (const auto& o : outer) consider(o, false);

    res.samples[i] = {cardinals[i].direction, inner, *best, best_dist};
    total += best_dist;
  }
  res.wt_px = total / 4.0;
  res.wt_mm = res.wt_px * pixel_spacing_mm;
  res.clipped = res.wt_px >= band.threshold_px || wall_continues(band);
  return res;
}

WallResult wall_thickness(const Frame& roi, const std::vector<Point>& inner_perimeter, double pixel_spacing_mm,
                          std::uint64_t seed, const WallConfig& cfg) {
  const auto band = wall_band(gray_coords(label_wall(roi)), inner_perimeter, cfg.threshold_px, roi.width, roi.height);
  return wall_thickness_from_band(inner_perimeter, band, pixel_spacing_mm, seed, cfg);
}

double wt_symmetric(double oad_mm, double iad_mm) {
  if (oad_mm < iad_mm) throw Error(ErrorCode::NegativeWall, "outer diameter smaller than inner diameter");
  return (oad_mm - iad_mm) / 2.0;
}

Measurement measure_roi(const Frame& frame, const Roi& roi, const PixelSpacing& spacing, std::uint64_t seed,
                        const WallConfig& cfg, const bar::BarOptions& bar_opts) {
  const auto& r = roi.rect;
  if (!r.valid() || r.x_min < 0 || r.y_min < 0 || r.x_max >= frame.width || r.y_max >= frame.height)
    throw Error(ErrorCode::RoiOutOfBounds, "ROI exceeds frame bounds");
  if (static_cast<long>(r.width()) * r.height() < 9) throw Error(ErrorCode::RoiOutOfBounds, "ROI smaller than 3x3");

  const Frame patch = frame.crop(r);
  const auto ba = bar::measure_bar(patch, spacing, bar_opts);

  Measurement m;
  m.roi = roi;
  m.iad = ba.iad;
  m.ard = ba.ard;
  m.bar = ba.bar;
  m.airway_perimeter = ba.airway.coords;
  m.artery_perimeter = ba.artery.coords;
  m.method_version = kMethodVersion;
  m.wt_seed = seed;

  const auto wall = wall_thickness(patch, ba.airway.coords, spacing.row, seed, cfg);
  m.wt_px = wall.wt_px;
  m.wt_mm = wall.wt_mm;
  m.wt_samples.assign(wall.samples.begin(), wall.samples.end());
  m.outer_airway_perimeter = wall.outer_perimeter;
  if (wall.clipped) m.warnings.push_back("wall thickness reached the band threshold; thicker walls are clipped");
  return m;
}

}  // namespace bronchometer::wt
