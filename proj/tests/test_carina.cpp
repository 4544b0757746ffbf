#include <random>
#include <set>

#include "doctest.h"

#include "bronchometer/carina.hpp"
#include "bronchometer/error.hpp"
#include "bronchometer/phantom.hpp"

using namespace bronchometer;
using namespace bronchometer::carina;

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

void fill_box(Frame& f, const BoundingBox& b, std::uint8_t v) {
  for (int y = b.y_min; y <= b.y_max; ++y)
    for (int x = b.x_min; x <= b.x_max; ++x) f.at(x, y) = v;
}

// White 100x100 frame with black boxes.
Frame boxes_frame(int index, const std::vector<BoundingBox>& boxes) {
  Frame f(100, 100, 255, index);
  for (const auto& b : boxes) fill_box(f, b, 0);
  return f;
}

ScanVolume small_volume(const std::vector<std::vector<BoundingBox>>& per_frame) {
  ScanVolume v;
  v.manifest = {"small", static_cast<int>(per_frame.size()), 100, 100, 1.0, {0.7, 0.7}, WindowKind::mediastinum};
  for (int i = 0; i < static_cast<int>(per_frame.size()); ++i) v.frames.push_back(boxes_frame(i, per_frame[i]));
  return v;
}

SearchConfig small_config(int n) {
  SearchConfig c;
  c.frame_range = {0, n - 1};
  c.crop_box = {2, 2, 97, 97};
  c.dilation = DilationMode::off;
  return c;
}

// Two black boxes of bounding area 20x15 = 300 whose edge gap is `gap`.
std::vector<BoundingBox> pair_with_gap(int gap) {
  return {{10, 20, 30, 35}, {30 + gap, 20, 50 + gap, 35}};
}

}  // namespace

TEST_SUITE("carina") {
  TEST_CASE("search_range by thickness") {
    CHECK(search_range(0.67, 465).range.lo == 120);
    CHECK(search_range(0.67, 465).range.hi == 200);
    CHECK(search_range(1.0, 300).range.lo == 30);
    CHECK(search_range(1.0, 300).range.hi == 80);
    CHECK(search_range(2.0, 150).range.lo == 10);
    CHECK(search_range(2.0, 150).range.hi == 40);
    const auto other = search_range(1.5, 90);
    CHECK_FALSE(other.standard);
    CHECK(other.range.lo == 0);
    CHECK(other.range.hi == 89);
    CHECK(search_range(1.0, 300).standard);
  }

  TEST_CASE("default window and config") {
    CHECK(default_window(0.67) == WindowKind::mediastinum);
    CHECK(default_window(1.0) == WindowKind::mediastinum);
    CHECK(default_window(2.0) == WindowKind::lung);
    ScanManifest m{"x", 600, 1024, 1024, 0.67, {0.5, 0.5}, WindowKind::mediastinum};
    const SearchConfig c = default_config(m);
    CHECK(c.crop_box == BoundingBox{240, 400, 700, 600});
    CHECK(c.area_range.min_excl == 200);
    CHECK(c.area_range.max_incl == 1500);
    CHECK(c.gap_range.min_excl == 3);
    CHECK(c.gap_range.max_incl == 7);
  }

  TEST_CASE("dilation switches on above 500 frames") {
    SearchConfig c;
    CHECK_FALSE(c.dilation_enabled(500));
    CHECK(c.dilation_enabled(501));
    c.dilation = DilationMode::off;
    CHECK_FALSE(c.dilation_enabled(900));
    c.dilation = DilationMode::on;
    CHECK(c.dilation_enabled(10));
  }

  TEST_CASE("config validation") {
    SearchConfig c;
    c.frame_range = {50, 10};
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    c = SearchConfig{};
    c.gap_range = {7, 3};
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    CHECK_NOTHROW(SearchConfig{}.validate());
  }

  TEST_CASE("preprocess_frame examples") {
    Frame f(10, 10, 200);
    f.at(3, 3) = 0;
    f.at(4, 3) = 1;
    f.at(5, 3) = 254;
    const Frame p = preprocess_frame(f, {2, 2, 6, 6});
    CHECK(p.at(3, 3) == 0);
    CHECK(p.at(4, 3) == 255);
    CHECK(p.at(5, 3) == 255);
    CHECK(p.at(0, 0) == 0);
    CHECK(p.at(7, 7) == 0);
    CHECK(p.at(6, 6) == 255);
    CHECK(code_of([&] { preprocess_frame(f, {2, 2, 10, 6}); }) == ErrorCode::CropOutOfBounds);
  }

  TEST_CASE("preprocess output is bi-level") {
    std::mt19937 rng(11);
    Frame f(64, 64);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() % 256);
    const Frame p = preprocess_frame(f, {5, 7, 50, 60});
    for (auto v : p.pixels) REQUIRE((v == 0 || v == 255));
  }

  TEST_CASE("dilate_3x3 examples") {
    Frame f(11, 11, 255);
    f.at(5, 5) = 0;
    const Frame d = dilate_3x3(f);
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 11; ++x) CHECK((d.at(x, y) == 0) == (std::abs(x - 5) <= 1 && std::abs(y - 5) <= 1));
    CHECK(dilate_3x3(Frame(11, 11, 255)) == Frame(11, 11, 255));
  }

  TEST_CASE("dilate_3x3 closes a two-pixel gap (enumerated)") {
    Frame f(12, 9, 255);
    f.at(4, 4) = 0;
    f.at(6, 4) = 0;
    // enumerate: black iff some source black pixel lies in the 8-neighbourhood
    std::set<std::pair<int, int>> expected;
    for (auto [sx, sy] : {std::pair{4, 4}, std::pair{6, 4}})
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) expected.insert({sx + dx, sy + dy});
    const Frame d = dilate_3x3(f);
    int black = 0;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 12; ++x) {
        CHECK((d.at(x, y) == 0) == (expected.count({x, y}) == 1));
        black += d.at(x, y) == 0;
      }
    CHECK(black == 15);  // 3 rows x 5 columns
    CHECK(connected_components(d).size() == 1);
  }

  TEST_CASE("connected_components examples") {
    Frame f(5, 5, 255);
    f.at(0, 0) = 0;
    f.at(1, 1) = 0;
    CHECK(connected_components(f).size() == 1);

    Frame g(5, 5, 255);
    g.at(0, 0) = 0;
    g.at(0, 2) = 0;
    CHECK(connected_components(g).size() == 2);

    Frame h(20, 20, 255);
    fill_box(h, {3, 4, 12, 13}, 0);
    const auto cs = connected_components(h);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].size() == 100);
  }

  TEST_CASE("components come out in raster order of their first pixel") {
    Frame f(20, 20, 255);
    fill_box(f, {15, 2, 16, 3}, 0);
    fill_box(f, {1, 10, 2, 11}, 0);
    fill_box(f, {8, 1, 9, 1}, 0);
    const auto cs = connected_components(f);
    REQUIRE(cs.size() == 3);
    CHECK(bounding_box(cs[0]) == BoundingBox{8, 1, 9, 1});
    CHECK(bounding_box(cs[1]) == BoundingBox{15, 2, 16, 3});
    CHECK(bounding_box(cs[2]) == BoundingBox{1, 10, 2, 11});
  }

  TEST_CASE("component_boxes area filter") {
    auto comp = [](BoundingBox b) {
      Component c;
      for (int y = b.y_min; y <= b.y_max; ++y)
        for (int x = b.x_min; x <= b.x_max; ++x) c.push_back({x, y});
      return c;
    };
    const OpenClosedRange range{200, 1500};
    CHECK(component_boxes({comp({0, 0, 20, 15})}, range).size() == 1);   // 300
    CHECK(component_boxes({comp({0, 0, 10, 10})}, range).empty());       // 100
    CHECK(component_boxes({comp({0, 0, 40, 40})}, range).empty());       // 1600
    CHECK(component_boxes({comp({0, 0, 20, 10})}, range).empty());       // exactly 200
    CHECK(component_boxes({comp({0, 0, 30, 50})}, range).size() == 1);   // exactly 1500
  }

  TEST_CASE("gap_between examples") {
    CHECK(gap_between({213, 227, 245, 252}, {249, 218, 277, 237}) == 4);
    CHECK(gap_between({212, 241, 238, 263}, {244, 236, 268, 255}) == 6);
    CHECK(gap_between({0, 0, 10, 10}, {14, 0, 24, 10}) == 4);
    CHECK(code_of([] { gap_between({0, 0, 10, 10}, {10, 0, 20, 10}); }) == ErrorCode::OverlappingBoxes);
    CHECK(code_of([] { gap_between({0, 0, 10, 10}, {5, 0, 20, 10}); }) == ErrorCode::OverlappingBoxes);
  }

  TEST_CASE("gap_between is symmetric") {
    std::mt19937 rng(5);
    for (int i = 0; i < 1000; ++i) {
      const int x1 = rng() % 200, w1 = 1 + rng() % 40, gap = 1 + rng() % 30, w2 = 1 + rng() % 40;
      const BoundingBox a{x1, int(rng() % 100), x1 + w1, 150};
      const BoundingBox b{x1 + w1 + gap, int(rng() % 100), x1 + w1 + gap + w2, 150};
      REQUIRE(gap_between(a, b) == gap);
      REQUIRE(gap_between(b, a) == gap);
    }
  }

  TEST_CASE("detect_carina picks the minimum gap, earliest frame on ties") {
    const auto vol = small_volume({
        {{10, 20, 30, 35}},  // one box
        pair_with_gap(6),
        pair_with_gap(4),
        pair_with_gap(5),
        pair_with_gap(4),
        pair_with_gap(9),  // outside (3,7]
        pair_with_gap(3),  // outside (3,7]
    });
    const auto r = detect_carina(vol, small_config(vol.frame_count()));
    CHECK(r.carina_frame == 2);
    CHECK(r.gap_px == 4);
    REQUIRE(r.candidates.size() == 4);
    CHECK(r.box_a == BoundingBox{10, 20, 30, 35});
    CHECK(r.box_b == BoundingBox{34, 20, 54, 35});
    int min_gap = 1000;
    for (const auto& c : r.candidates) {
      min_gap = std::min(min_gap, c.gap);
      CHECK(c.gap > 3);
      CHECK(c.gap <= 7);
      CHECK(c.box_a.area() > 200);
      CHECK(c.box_a.area() <= 1500);
      CHECK(c.box_b.area() > 200);
      CHECK(c.box_b.area() <= 1500);
      CHECK(c.box_a.x_max < c.box_b.x_min);
    }
    CHECK(r.gap_px == min_gap);
  }

  TEST_CASE("frames with more than two boxes are skipped") {
    const auto vol = small_volume({
        {{10, 20, 30, 35}, {35, 20, 55, 35}, {10, 60, 30, 75}},
        pair_with_gap(5),
    });
    const auto r = detect_carina(vol, small_config(2));
    CHECK(r.carina_frame == 1);
    CHECK(r.candidates.size() == 1);
  }

  TEST_CASE("no two-box frame raises NoCarinaFound") {
    const auto vol = small_volume({{{10, 20, 30, 35}}, {}, {{10, 20, 30, 35}}});
    CHECK(code_of([&] { detect_carina(vol, small_config(3)); }) == ErrorCode::NoCarinaFound);
  }

  TEST_CASE("search range limits the frames examined") {
    const auto vol = small_volume({pair_with_gap(4), pair_with_gap(6), pair_with_gap(5)});
    SearchConfig c = small_config(3);
    c.frame_range = {1, 2};
    CHECK(detect_carina(vol, c).carina_frame == 2);
  }

  TEST_CASE("dilation grows boxes by one pixel per side") {
    const auto vol = small_volume({pair_with_gap(5)});
    SearchConfig c = small_config(1);
    c.gap_range = {0, 7};
    CHECK(detect_carina(vol, c).gap_px == 5);
    c.dilation = DilationMode::on;
    // one pixel per side, 5 -> 3
    const auto r = detect_carina(vol, c);
    CHECK(r.gap_px == 3);
    CHECK(r.box_a == BoundingBox{9, 19, 31, 36});

    // gap of 3 leaves two white columns, which dilation closes
    const auto fused = small_volume({pair_with_gap(3)});
    CHECK(code_of([&] { detect_carina(fused, c); }) == ErrorCode::NoCarinaFound);
  }

  TEST_CASE("trachea phantom split at 50 is found within two frames") {
    phantom::TracheaPhantomSpec spec;
    const auto [vol, split] = phantom::gen_trachea_volume(spec);
    CHECK(split == 50);
    const auto r = detect_carina(vol, default_config(vol.manifest));
    CHECK(r.carina_frame >= 48);
    CHECK(r.carina_frame <= 52);
    CHECK(r.gap_px == spec.bronchi_gap_px);

    SUBCASE("repeat runs agree") {
      const auto again = detect_carina(vol, default_config(vol.manifest));
      CHECK(again.carina_frame == r.carina_frame);
      CHECK(again.box_a == r.box_a);
      CHECK(again.box_b == r.box_b);
      CHECK(again.candidates.size() == r.candidates.size());
    }
  }

  TEST_CASE("mediastinum rendering has no more candidates than lung rendering") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      phantom::TracheaPhantomSpec spec;
      spec.clutter_frames = 6;
      spec.seed = seed;
      const auto [med, s1] = phantom::gen_trachea_volume(spec, WindowKind::mediastinum);
      const auto [lung, s2] = phantom::gen_trachea_volume(spec, WindowKind::lung);
      const auto cfg = default_config(med.manifest);
      const auto n_med = find_candidates(med, cfg).size();
      const auto n_lung = find_candidates(lung, cfg).size();
      CHECK(n_med <= n_lung);
      CHECK(n_med > 0);
    }
  }

  TEST_CASE("timings are reported per stage") {
    const auto vol = small_volume({pair_with_gap(5), pair_with_gap(6)});
    Timings t;
    std::vector<FrameBoxes> per_frame;
    const auto cands = find_candidates(vol, small_config(2), &t, &per_frame);
    CHECK(cands.size() == 2);
    CHECK(per_frame.size() == 2);
    CHECK(per_frame[0].boxes.size() == 2);
    CHECK(t.s1 >= 0);
    CHECK(t.s2 >= 0);
    CHECK(t.s3 >= 0);
  }
}
