#include <opencv2/imgcodecs.hpp>

#include "doctest.h"
#include "support.hpp"

#include "bronchometer/error.hpp"
#include "bronchometer/volume_io.hpp"

using namespace bronchometer;
using testsupport::TempDir;

namespace {

ScanManifest manifest(int n, int w = 64, int h = 64) {
  return ScanManifest{"s", n, w, h, 1.0, {0.7, 0.7}, WindowKind::mediastinum};
}

ScanVolume ramp_volume(int n, int w = 64, int h = 64) {
  ScanVolume v;
  v.manifest = manifest(n, w, h);
  for (int i = 0; i < n; ++i) {
    Frame f(w, h, 0, i);
    for (int k = 0; k < w * h; ++k) f.pixels[k] = static_cast<std::uint8_t>((k + 7 * i) % 256);
    v.frames.push_back(f);
  }
  return v;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

// window formula evaluated independently with plain arithmetic
int oracle_window(double hu, double ww, double wl) {
  const double v = (hu - (wl - ww / 2.0)) / ww * 255.0;
  const double r = std::floor(v + 0.5);
  return static_cast<int>(std::clamp(r, 0.0, 255.0));
}

}  // namespace

TEST_SUITE("volume_io") {
  TEST_CASE("load_volume reads manifest and three frames") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(3));
    const ScanVolume v = load_volume(dir.path);
    CHECK(v.frame_count() == 3);
    CHECK(v.manifest.scan_id == "s");
    for (int i = 0; i < 3; ++i) CHECK(v.frames[i].index == i);
    CHECK(v.frames == ramp_volume(3).frames);
  }

  TEST_CASE("load_volume rejects a missing frame") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(3));
    std::filesystem::remove(dir / frame_filename(2, "png"));
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::FrameCountMismatch);
  }

  TEST_CASE("load_volume rejects an extra frame and a gap") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(3));
    write_png(dir / frame_filename(5, "png"), Frame(64, 64));
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::FrameCountMismatch);
  }

  TEST_CASE("load_volume without manifest") {
    TempDir dir("vol");
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::MissingManifest);
  }

  TEST_CASE("load_volume with corrupt and wrong-size frames") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(2));
    testsupport::spit(dir / frame_filename(1, "png"), "not a png");
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::CorruptFrame);
    write_png(dir / frame_filename(1, "png"), Frame(65, 64));
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::CorruptFrame);
  }

  TEST_CASE("16-bit PNG is rejected") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(1));
    cv::Mat m(64, 64, CV_16UC1, cv::Scalar(1000));
    cv::imwrite((dir / frame_filename(0, "png")).string(), m);
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::UnsupportedBitDepth);
  }

  TEST_CASE("RGB PNG uses the red channel") {
    cv::Mat m(64, 64, CV_8UC3, cv::Scalar(10, 20, 30));  // BGR
    std::vector<uchar> buf;
    cv::imencode(".png", m, buf);
    const Frame f = decode_png(std::vector<std::uint8_t>(buf.begin(), buf.end()));
    CHECK(f.at(5, 5) == 30);
  }

  TEST_CASE("manifest invariants") {
    auto bad = [](auto mutate) {
      ScanManifest m = manifest(3);
      mutate(m);
      return code_of([&] { m.validate(); });
    };
    CHECK(bad([](ScanManifest& m) { m.frame_count = 0; }) == ErrorCode::InvalidManifest);
    CHECK(bad([](ScanManifest& m) { m.width = 63; }) == ErrorCode::InvalidManifest);
    CHECK(bad([](ScanManifest& m) { m.slice_thickness_mm = 0; }) == ErrorCode::InvalidManifest);
    CHECK(bad([](ScanManifest& m) { m.pixel_spacing_mm.col = -1; }) == ErrorCode::InvalidManifest);
    CHECK_NOTHROW(manifest(3).validate());
  }

  TEST_CASE("manifest round-trip") {
    TempDir dir("man");
    ScanManifest m{"abc", 465, 512, 512, 0.67, {0.61, 0.62}, WindowKind::lung};
    write_manifest(dir / "manifest.json", m);
    const ScanManifest r = read_manifest(dir / "manifest.json");
    CHECK(r.scan_id == "abc");
    CHECK(r.frame_count == 465);
    CHECK(r.slice_thickness_mm == 0.67);
    CHECK(r.pixel_spacing_mm.row == 0.61);
    CHECK(r.pixel_spacing_mm.col == 0.62);
    CHECK(r.window == WindowKind::lung);
  }

  TEST_CASE("465-frame 512x512 scan loads with the reference shape") {
    TempDir dir("big");
    ScanManifest m{"t1", 465, 512, 512, 0.67, {0.7, 0.7}, WindowKind::mediastinum};
    write_manifest(dir / "manifest.json", m);
    const Frame blank(512, 512, 0);
    for (int i = 0; i < 465; ++i) write_png(dir / frame_filename(i, "png"), blank);
    const ScanVolume v = load_volume(dir.path);
    CHECK(v.frame_count() == 465);
    CHECK(v.frames.back().index == 464);
    CHECK(v.frames[0].width == 512);
    CHECK(v.frames[0].height == 512);
    CHECK(v.manifest.slice_thickness_mm == 0.67);
  }

  TEST_CASE("load_volume is pure") {
    TempDir dir("vol");
    write_volume(dir.path, ramp_volume(4));
    const ScanVolume a = load_volume(dir.path);
    const ScanVolume b = load_volume(dir.path);
    CHECK(a.frames == b.frames);
    CHECK(encode_png(a.frames[2]) == encode_png(b.frames[2]));
  }

  TEST_CASE("apply_window examples") {
    const auto med = WindowPreset::mediastinum();
    CHECK(window_value(50, med) == 128);
    CHECK(window_value(-100, med) == 0);
    CHECK(window_value(-1000, med) == 0);
    CHECK(window_value(200, med) == 255);
    CHECK(window_value(3000, med) == 255);
    // half-up at the level: 127.5 -> 128, never 127
    CHECK(window_value(med.wl, med) == 128);
  }

  TEST_CASE("apply_window matches the formula and is monotone") {
    for (const auto preset : {WindowPreset::mediastinum(), WindowPreset::lung()}) {
      int prev = -1;
      for (int hu = -2048; hu <= 3071; ++hu) {
        const int v = window_value(hu, preset);
        REQUIRE(v == oracle_window(hu, preset.ww, preset.wl));
        REQUIRE(v >= prev);
        prev = v;
      }
    }
    HuImage img{64, 64, std::vector<std::int16_t>(64 * 64)};
    for (int k = 0; k < 64 * 64; ++k) img.values[k] = static_cast<std::int16_t>(-1500 + k);
    const Frame f = apply_window(img, WindowPreset::lung(), 9);
    CHECK(f.index == 9);
    for (int k = 0; k < 64 * 64; k += 97) CHECK(f.pixels[k] == oracle_window(img.values[k], 1500, -500));
  }

  TEST_CASE("raw16 round-trip and windowed load") {
    TempDir dir("raw");
    ScanManifest m = manifest(2);
    m.window = WindowKind::none;
    write_manifest(dir / "manifest.json", m);
    HuImage img{64, 64, std::vector<std::int16_t>(64 * 64, 50)};
    img.values[0] = -1300;
    img.values[1] = 400;
    for (int i = 0; i < 2; ++i) write_raw16(dir / frame_filename(i, "raw16"), img);
    CHECK(read_raw16(dir / frame_filename(0, "raw16"), 64, 64).values == img.values);
    CHECK(code_of([&] { load_volume(dir.path); }) == ErrorCode::InvalidManifest);
    const ScanVolume v = load_volume(dir.path, WindowPreset::mediastinum());
    CHECK(v.frames[1].at(0, 0) == 0);
    CHECK(v.frames[1].at(1, 0) == 255);
    CHECK(v.frames[1].at(5, 5) == 128);
  }

  TEST_CASE("scale_rect examples") {
    const BoundingBox r{120, 200, 350, 300};
    CHECK(scale_rect(r, 512, 1024) == BoundingBox{240, 400, 700, 600});
    CHECK(scale_rect(r, 512, 512) == r);
    CHECK(scale_rect(r, 512, 552) == BoundingBox{129, 216, 377, 323});
  }

  TEST_CASE("scale_rect 552 crop: neither rounding mode reproduces the published box") {
    const BoundingBox r{120, 200, 350, 300};
    const BoundingBox published{129, 216, 377, 324};
    // exact products: 129.375, 215.625, 377.34375, 323.4375
    CHECK(scale_rect(r, 512, 552, RoundingMode::half_up) == BoundingBox{129, 216, 377, 323});
    CHECK(scale_rect(r, 512, 552, RoundingMode::ceil) == BoundingBox{130, 216, 378, 324});
    CHECK_FALSE(scale_rect(r, 512, 552, RoundingMode::half_up) == published);
    CHECK_FALSE(scale_rect(r, 512, 552, RoundingMode::ceil) == published);
  }

  TEST_CASE("scale_rect round trip stays within one pixel") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> coord(0, 511), size(64, 1500);
    for (int i = 0; i < 2000; ++i) {
      const int a = size(rng), b = size(rng);
      int x1 = coord(rng) % a, x2 = coord(rng) % a, y1 = coord(rng) % a, y2 = coord(rng) % a;
      const BoundingBox r{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
      const BoundingBox back = scale_rect(scale_rect(r, a, b), b, a);
      // below a factor of 1/2 several coordinates collapse onto one and the bound cannot hold
      if (2 * b < a) continue;
      REQUIRE(std::abs(back.x_min - r.x_min) <= 1);
      REQUIRE(std::abs(back.y_min - r.y_min) <= 1);
      REQUIRE(std::abs(back.x_max - r.x_max) <= 1);
      REQUIRE(std::abs(back.y_max - r.y_max) <= 1);
    }
  }

  TEST_CASE("window names") {
    CHECK(window_kind_from_string("lung") == WindowKind::lung);
    CHECK(to_string(WindowKind::mediastinum) == "mediastinum");
    CHECK(code_of([] { window_kind_from_string("bone"); }) == ErrorCode::InvalidArgument);
    CHECK(frame_filename(7, "png") == "frame_0007.png");
  }
}
