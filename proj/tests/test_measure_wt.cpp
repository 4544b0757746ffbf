#include <cmath>
#include <set>

#include "doctest.h"

#include "bronchometer/error.hpp"
#include "bronchometer/measure_bar.hpp"
#include "bronchometer/measure_wt.hpp"
#include "bronchometer/phantom.hpp"

using namespace bronchometer;
using namespace bronchometer::wt;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

// Arc of a point by its angle around the centroid of `pts`, image-up = north.
Direction oracle_arc(const std::vector<Point>& pts, Point p) {
  double cx = 0, cy = 0;
  for (const Point q : pts) {
    cx += q.x;
    cy += q.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double deg = std::atan2(cy - p.y, p.x - cx) * 180.0 / M_PI;
  if (deg < 0) deg += 360.0;
  if (deg >= 45 && deg < 135) return Direction::north;
  if (deg >= 135 && deg < 225) return Direction::west;
  if (deg >= 225 && deg < 315) return Direction::south;
  return Direction::east;
}

phantom::BaPhantom annulus(int lumen, int wall) {
  phantom::BaPhantomSpec spec;
  spec.lumen_d_px = lumen;
  spec.wall_t_px = wall;
  return phantom::gen_ba_pair(spec, 1);
}

std::vector<Point> inner_perimeter_of(const phantom::BaPhantom& ph) {
  return bar::measure_bar(ph.frame.crop(ph.roi), {0.5, 0.5}).airway.coords;
}

}  // namespace

TEST_SUITE("measure_wt") {
  TEST_CASE("label_wall thresholds") {
    CHECK(label_wall(Frame(1, 1, 20)).labels[0] == Label::B);
    CHECK(label_wall(Frame(1, 1, 21)).labels[0] == Label::G);
    CHECK(label_wall(Frame(1, 1, 0)).labels[0] == Label::B);
  }

  TEST_CASE("wall_band examples") {
    const auto band = wall_band({{10, 12}, {10, 16}}, {{10, 10}}, 4.0, 30, 30);
    CHECK(band.band_coords == std::vector<Point>{{10, 12}});
    CHECK(code_of([] { wall_band({}, {{10, 10}}, 4.0, 30, 30); }) == ErrorCode::EmptyBand);
    CHECK(code_of([] { wall_band({{20, 20}}, {{10, 10}}, 4.0, 30, 30); }) == ErrorCode::EmptyBand);
  }

  TEST_CASE("annulus band is the wall ring") {
    const auto ph = annulus(10, 3);
    const Frame roi = ph.frame.crop(ph.roi);
    const auto inner = inner_perimeter_of(ph);
    const auto band = wall_band(gray_coords(label_wall(roi)), inner, 4.0, roi.width, roi.height);
    for (const Point p : band.band_coords) REQUIRE(roi.at(p.x, p.y) > 20);
    // the outer perimeter sits about lumen/2 + wall from the lumen centre
    double mx = 0, my = 0;
    for (const Point p : inner) {
      mx += p.x;
      my += p.y;
    }
    mx /= static_cast<double>(inner.size());
    my /= static_cast<double>(inner.size());
    double mean_r = 0;
    for (const Point p : band.outer_perimeter.coords) mean_r += std::hypot(p.x - mx, p.y - my);
    mean_r /= static_cast<double>(band.outer_perimeter.coords.size());
    CHECK(mean_r == doctest::Approx(ph.truth.oad_px / 2.0).epsilon(0.15));
  }

  TEST_CASE("cardinal points fall one per arc") {
    const Mask disc = phantom::rasterize_disc(60, 60, 10, 10, 30);
    const auto per = bar::trace_perimeter(disc).coords;
    const auto pts = cardinal_points(per, 7);
    const Direction order[4] = {Direction::north, Direction::south, Direction::east, Direction::west};
    for (int i = 0; i < 4; ++i) {
      CHECK(pts[i].direction == order[i]);
      CHECK(oracle_arc(per, pts[i].point) == order[i]);
      CHECK(std::find(per.begin(), per.end(), pts[i].point) != per.end());
    }
    const auto again = cardinal_points(per, 7);
    for (int i = 0; i < 4; ++i) CHECK(again[i].point == pts[i].point);
    std::set<Point> seen;
    for (std::uint64_t s = 0; s < 20; ++s) seen.insert(cardinal_points(per, s)[0].point);
    CHECK(seen.size() > 1);
  }

  TEST_CASE("cardinal points on a degenerate bar") {
    std::vector<Point> bar{{2, 5}, {3, 5}, {4, 5}, {5, 5}, {6, 5}};
    CHECK_NOTHROW(cardinal_points(bar, 1));
    const auto pts = cardinal_points(bar, 1);
    for (const auto& cp : pts) CHECK(std::find(bar.begin(), bar.end(), cp.point) != bar.end());
  }

  TEST_CASE("annulus r=5 / r=8 at 0.33 mm") {
    const auto ph = annulus(10, 3);
    const Frame roi = ph.frame.crop(ph.roi);
    const auto r = wall_thickness(roi, inner_perimeter_of(ph), 0.33, kDefaultSeed);
    CHECK(r.wt_mm >= 0.66);
    CHECK(r.wt_mm <= 1.32);
    CHECK(r.wt_mm == doctest::Approx(r.wt_px * 0.33));
    double sum = 0;
    for (const auto& s : r.samples) sum += s.dist_px;
    CHECK(r.wt_px == doctest::Approx(sum / 4));
  }

  TEST_CASE("zero-width wall") {
    const Mask disc = phantom::rasterize_disc(40, 40, 10, 10, 12);
    const auto inner = bar::trace_perimeter(disc).coords;
    const auto band = wall_band(inner, inner, 4.0, 40, 40);
    const auto r = wall_thickness_from_band(inner, band, 0.5, 3);
    CHECK(r.wt_px <= 1.0);
  }

  TEST_CASE("annulus walls t = 2..4 across seeds") {
    for (int t : {2, 3, 4}) {
      const auto ph = annulus(10, t);
      const Frame roi = ph.frame.crop(ph.roi);
      const auto inner = inner_perimeter_of(ph);
      double lo = 1e9, hi = -1e9;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = wall_thickness(roi, inner, 0.5, seed);
        CHECK(std::abs(r.wt_px - t) <= 1.0);
        CHECK(r.wt_px <= 4.0 + 2.0);
        lo = std::min(lo, r.wt_px);
        hi = std::max(hi, r.wt_px);
      }
      CHECK(hi - lo <= 1.0);
    }
  }

  TEST_CASE("fixed seed is bit-identical and mm scale is linear") {
    const auto ph = annulus(12, 3);
    const Frame roi = ph.frame.crop(ph.roi);
    const auto inner = inner_perimeter_of(ph);
    const auto a = wall_thickness(roi, inner, 0.4, 99);
    const auto b = wall_thickness(roi, inner, 0.4, 99);
    CHECK(a.wt_mm == b.wt_mm);
    CHECK(a.wt_px == b.wt_px);
    const auto c = wall_thickness(roi, inner, 0.8, 99);
    CHECK(c.wt_mm == doctest::Approx(2 * a.wt_mm));
  }

  TEST_CASE("thick walls are clipped and flagged") {
    const auto ph = annulus(10, 7);
    const auto m = measure_roi(ph.frame, Roi{"x", 0, ph.roi, ""}, {0.5, 0.5}, 1);
    CHECK(m.wt_px <= 4.0 + 2.0);
    CHECK_FALSE(m.warnings.empty());
  }

  TEST_CASE("wt_symmetric examples") {
    CHECK(wt_symmetric(5.4, 3.4) == doctest::Approx(1.0));
    CHECK(wt_symmetric(3.0, 3.0) == 0.0);
    CHECK(wt_symmetric(4.9, 3.2) == doctest::Approx(0.85));
    CHECK(code_of([] { wt_symmetric(3.0, 3.2); }) == ErrorCode::NegativeWall);
    for (double c : {0.1, 0.5, 2.0}) CHECK(wt_symmetric(4.9 + c, 3.2 + c) == doctest::Approx(wt_symmetric(4.9, 3.2)));
  }

  TEST_CASE("row 3 wall thickness agrees between method and expert tables") {
    const double method = 1.0, expert = wt_symmetric(5.4, 3.4);
    CHECK(std::floor(expert * 100 + 0.5) / 100 == method);
  }

  TEST_CASE("measure_roi") {
    const auto ph = annulus(10, 3);
    const Roi roi{"scan", 0, ph.roi, "pair"};
    const auto m = measure_roi(ph.frame, roi, {0.33, 0.33}, 5);
    CHECK(m.roi.label == "pair");
    CHECK(m.wt_seed == 5);
    CHECK(m.wt_samples.size() == 4);
    CHECK(m.iad.mean_mm > 0);
    CHECK(m.ard.mean_mm > 0);
    CHECK(m.bar == doctest::Approx(m.iad.mean_mm / m.ard.mean_mm));
    CHECK_FALSE(m.airway_perimeter.empty());
    CHECK_FALSE(m.artery_perimeter.empty());
    CHECK_FALSE(m.outer_airway_perimeter.empty());
    CHECK(m.method_version == kMethodVersion);
    for (const Point p : m.airway_perimeter) {
      CHECK(p.x >= 0);
      CHECK(p.x < ph.roi.width());
    }

    CHECK(code_of([&] { measure_roi(ph.frame, Roi{"s", 0, {100, 100, 200, 120}, ""}, {0.5, 0.5}, 1); }) ==
          ErrorCode::RoiOutOfBounds);
    CHECK(code_of([&] { measure_roi(ph.frame, Roi{"s", 0, {10, 10, 11, 11}, ""}, {0.5, 0.5}, 1); }) ==
          ErrorCode::RoiOutOfBounds);
  }
}
