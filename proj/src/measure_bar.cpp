#include "bronchometer/measure_bar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>

#include "bronchometer/error.hpp"

namespace bronchometer {

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::inner_airway: return "inner_airway";
    case RegionKind::artery: return "artery";
    case RegionKind::outer_airway: return "outer_airway";
  }
  return "unknown";
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::north: return "north";
    case Direction::south: return "south";
    case Direction::east: return "east";
    case Direction::west: return "west";
  }
  return "unknown";
}

}  // namespace bronchometer

namespace bronchometer::bar {

namespace {

template <typename Fn>
LabelRaster relabel(const Frame& roi, Fn fn) {
  LabelRaster out{roi.width, roi.height, std::vector<Label>(roi.pixels.size())};
  std::transform(roi.pixels.begin(), roi.pixels.end(), out.labels.begin(), fn);
  return out;
}

}  // namespace

LabelRaster label_airway(const Frame& roi) {
  return relabel(roi, [](std::uint8_t v) { return v <= 25 ? Label::B : Label::G; });
}

LabelRaster label_artery(const Frame& roi) {
  return relabel(roi, [](std::uint8_t v) {
    if (v <= 25) return Label::B;
    if (v <= 45) return Label::M;
    return Label::G;
  });
}

std::vector<RowMatch> match_row_sequences(const LabelRaster& raster, Family family) {
  const Label boundary = family == Family::airway ? Label::G : Label::M;
  const Label interior = family == Family::airway ? Label::B : Label::G;
  const int k_min = family == Family::airway ? 1 : 7;
  const int k_max = family == Family::airway ? 13 : 22;

  std::vector<RowMatch> matches;
  for (int y = 0; y < raster.height; ++y) {
    int x = 0;
    while (x < raster.width) {
      if (raster.at(x, y) != boundary) {
        ++x;
        continue;
      }
      int j = x + 1;
      while (j < raster.width && raster.at(j, y) == interior) ++j;
      const int k = j - x - 1;
      if (j < raster.width && raster.at(j, y) == boundary && k >= k_min && k <= k_max) {
        matches.push_back({y, x, j});
        x = j + 1;
      } else {
        // The interior run is maximal, so no pattern can start inside it.
        x = std::max(j, x + 1);
      }
    }
  }
  return matches;
}

Mask close_2x2(const Mask& mask) {
  Mask dilated(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.get(x, y) || mask.get(x - 1, y) || mask.get(x, y - 1) || mask.get(x - 1, y - 1)) dilated.set(x, y);

  auto set_or_outside = [&](int x, int y) { return !dilated.in_bounds(x, y) || dilated.get(x, y); };
  Mask closed(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (set_or_outside(x, y) && set_or_outside(x + 1, y) && set_or_outside(x, y + 1) && set_or_outside(x + 1, y + 1))
        closed.set(x, y);
  return closed;
}

Mask build_region_mask(const std::vector<RowMatch>& matches, int width, int height, bool include_boundary) {
  Mask raw(width, height);
  for (const auto& m : matches) {
    const int a = include_boundary ? m.col_start : m.col_start + 1;
    const int b = include_boundary ? m.col_end : m.col_end - 1;
    for (int x = a; x <= b; ++x)
      if (raw.in_bounds(x, m.row)) raw.set(x, m.row);
  }
  if (raw.empty()) throw Error(ErrorCode::EmptyRegion, "no matched row sequences");
  return largest_region(close_2x2(raw));
}

Mask fill_region(const Mask& seed, const LabelRaster& raster, Family family) {
  auto is_object = [&](int x, int y) {
    const Label l = raster.at(x, y);
    return family == Family::airway ? l == Label::B : l != Label::B;
  };
  Mask out = seed;
  std::vector<Point> stack = seed.points();
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (const Point d : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}}) {
      const int x = p.x + d.x;
      const int y = p.y + d.y;
      if (!out.in_bounds(x, y) || out.get(x, y) || !is_object(x, y)) continue;
      if (x == 0 || y == 0 || x == out.width - 1 || y == out.height - 1) return seed;
      out.set(x, y);
      stack.push_back({x, y});
    }
  }
  return out;
}

namespace {

// Clockwise in image coordinates (y grows downwards), starting west.
constexpr std::array<Point, 8> kMoore{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int direction_of(Point from, Point to) {
  const Point d{to.x - from.x, to.y - from.y};
  for (int i = 0; i < 8; ++i)
    if (kMoore[static_cast<std::size_t>(i)] == d) return i;
  return 0;
}

}  // namespace

RegionPerimeter trace_perimeter(const Mask& mask, RegionKind kind) {
  std::optional<Point> first;
  for (int y = 0; y < mask.height && !first; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.get(x, y)) {
        first = Point{x, y};
        break;
      }
  if (!first) throw Error(ErrorCode::EmptyRegion, "cannot trace an empty mask");

  const Point start = *first;
  std::vector<Point> walk{start};
  Point current = start;
  Point backtrack{start.x - 1, start.y};
  std::optional<Point> second;
  const std::size_t limit = 4 * static_cast<std::size_t>(mask.width) * mask.height + 16;

  while (walk.size() < limit) {
    const int bdir = direction_of(current, backtrack);
    std::optional<Point> next;
    Point last_background = backtrack;
    for (int k = 1; k <= 8; ++k) {
      const auto& d = kMoore[static_cast<std::size_t>((bdir + k) % 8)];
      const Point cand{current.x + d.x, current.y + d.y};
      if (mask.get(cand.x, cand.y)) {
        next = cand;
        break;
      }
      last_background = cand;
    }
    if (!next) break;  // isolated pixel
    if (current == start && second && *next == *second) break;
    if (!second) second = next;
    backtrack = last_background;
    current = *next;
    walk.push_back(current);
  }
  if (walk.size() > 1 && walk.back() == start) walk.pop_back();

  RegionPerimeter out;
  out.kind = kind;
  Mask seen(mask.width, mask.height);
  for (const auto& p : walk) {
    if (seen.get(p.x, p.y)) continue;
    seen.set(p.x, p.y);
    out.coords.push_back(p);
  }

  // Fill: the 8-connected region the trace started from.
  const auto comps = label_components(mask.width, mask.height, [&](int x, int y) { return mask.get(x, y); });
  out.mask = Mask(mask.width, mask.height);
  for (const auto& c : comps) {
    if (std::find(c.begin(), c.end(), start) == c.end()) continue;
    for (const auto& p : c) out.mask.set(p.x, p.y);
    break;
  }
  return out;
}

Chord max_chord(const std::vector<Point>& perimeter) {
  if (perimeter.size() < 2) throw Error(ErrorCode::EmptyRegion, "need at least two boundary pixels");
  std::int64_t best = -1;
  Point bp1, bp2;
  for (std::size_t i = 0; i < perimeter.size(); ++i) {
    for (std::size_t j = i + 1; j < perimeter.size(); ++j) {
      Point p1 = perimeter[i];
      Point p2 = perimeter[j];
      if (p2 < p1) std::swap(p1, p2);
      const auto d = squared_distance(p1, p2);
      if (d > best || (d == best && std::tie(p1, p2) < std::tie(bp1, bp2))) {
        best = d;
        bp1 = p1;
        bp2 = p2;
      }
    }
  }
  return {bp1, bp2, std::sqrt(static_cast<double>(best))};
}

std::vector<Chord> chord_fan(const std::vector<Point>& perimeter, const Chord& major) {
  std::vector<Chord> chords{major};
  const auto n = static_cast<long>(perimeter.size());
  const std::vector<long> offsets = major.length_px > 20.0 ? std::vector<long>{4, 8, 12} : std::vector<long>{4, 8};
  if (n < 2 * offsets.back() + 2) return chords;

  const auto i = std::find(perimeter.begin(), perimeter.end(), major.p1) - perimeter.begin();
  const auto j = std::find(perimeter.begin(), perimeter.end(), major.p2) - perimeter.begin();
  if (i == n || j == n) return chords;

  auto at = [&](long k) { return perimeter[static_cast<std::size_t>(((k % n) + n) % n)]; };
  for (long o : offsets) {
    for (long sign : {1L, -1L}) {
      const Point a = at(i + sign * o);
      const Point b = at(j + sign * o);
      chords.push_back({a, b, distance(a, b)});
    }
  }
  return chords;
}

DiameterEstimate mean_diameter(const std::vector<Chord>& chords, const PixelSpacing& spacing) {
  if (chords.empty()) throw Error(ErrorCode::InvalidArgument, "no chords to average");
  const double hi = std::max(spacing.row, spacing.col);
  if (std::abs(spacing.row - spacing.col) > 0.01 * hi)
    throw Error(ErrorCode::AnisotropicSpacing, "row and column spacing differ by more than 1%");
  DiameterEstimate est;
  est.chords = chords;
  est.mean_px = std::accumulate(chords.begin(), chords.end(), 0.0,
                                [](double acc, const Chord& c) { return acc + c.length_px; }) /
                static_cast<double>(chords.size());
  est.mean_mm = est.mean_px * spacing.row;
  return est;
}

DiameterEstimate region_diameter(const Mask& region, const PixelSpacing& spacing, RegionPerimeter* perimeter) {
  auto traced = trace_perimeter(region);
  if (traced.coords.size() < 2) throw Error(ErrorCode::EmptyRegion, "region is a single pixel");
  const auto major = max_chord(traced.coords);
  auto est = mean_diameter(chord_fan(traced.coords, major), spacing);
  if (perimeter) *perimeter = std::move(traced);
  return est;
}

BarResult measure_bar(const Frame& roi, const PixelSpacing& spacing, const BarOptions& opts) {
  BarResult out;
  try {
    const auto labels = label_airway(roi);
    auto region = build_region_mask(match_row_sequences(labels, Family::airway), roi.width, roi.height, false);
    if (opts.fill_regions) region = fill_region(region, labels, Family::airway);
    out.iad = region_diameter(region, spacing, &out.airway);
    out.airway.kind = RegionKind::inner_airway;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyRegion) throw;
    throw Error(ErrorCode::AirwayNotFound, e.what());
  }
  try {
    const auto labels = label_artery(roi);
    auto region = build_region_mask(match_row_sequences(labels, Family::artery), roi.width, roi.height,
                                    opts.artery_include_boundary);
    if (opts.fill_regions) region = fill_region(region, labels, Family::artery);
    out.ard = region_diameter(region, spacing, &out.artery);
    out.artery.kind = RegionKind::artery;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyRegion) throw;
    throw Error(ErrorCode::ArteryNotFound, e.what());
  }
  out.bar = out.iad.mean_mm / out.ard.mean_mm;
  return out;
}

}  // namespace bronchometer::bar
