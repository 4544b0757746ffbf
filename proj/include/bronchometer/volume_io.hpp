#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bronchometer/geometry.hpp"
#include "bronchometer/raster.hpp"

namespace bronchometer {

enum class WindowKind { mediastinum, lung, none };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& s);

struct WindowPreset {
  double ww = 0.0;  // window width, HU
  double wl = 0.0;  // window level, HU

  static constexpr WindowPreset mediastinum() { return {300.0, 50.0}; }
  static constexpr WindowPreset lung() { return {1500.0, -500.0}; }
};

std::optional<WindowPreset> preset_for(WindowKind kind);

struct PixelSpacing {
  double row = 1.0;
  double col = 1.0;
};

struct ScanManifest {
  std::string scan_id;
  int frame_count = 0;
  int width = 0;
  int height = 0;
  double slice_thickness_mm = 0.0;
  PixelSpacing pixel_spacing_mm;
  WindowKind window = WindowKind::none;

  // Throws InvalidManifest on any broken invariant.
  void validate() const;
};

struct ScanVolume {
  ScanManifest manifest;
  std::vector<Frame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Signed 16-bit HU raster, row-major.
struct HuImage {
  int width = 0;
  int height = 0;
  std::vector<std::int16_t> values;
};

// Linear HU -> gray map, clamp(round_half_up((hu - (wl - ww/2)) / ww * 255), 0, 255).
std::uint8_t window_value(double hu, const WindowPreset& preset);
Frame apply_window(const HuImage& raw_hu, const WindowPreset& preset, int index = 0);

enum class RoundingMode { half_up, ceil };

// Scales every coordinate by to_size / from_size.
BoundingBox scale_rect(const BoundingBox& rect, int from_size, int to_size,
                       RoundingMode mode = RoundingMode::half_up);

// Reads manifest.json plus frame_%04d.png or frame_%04d.raw16 files. Raw frames are windowed with
// `raw_window` when given, otherwise with the manifest's window (which then must not be "none").
ScanVolume load_volume(const std::filesystem::path& dir,
                       std::optional<WindowPreset> raw_window = std::nullopt);

ScanManifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& manifest_path, const ScanManifest& manifest);

// PNG codec helpers. Encoding is deterministic for identical frames.
Frame decode_png(const std::vector<std::uint8_t>& bytes, int index = 0);
std::vector<std::uint8_t> encode_png(const Frame& frame);
Frame read_png(const std::filesystem::path& path, int index = 0);
void write_png(const std::filesystem::path& path, const Frame& frame);

HuImage read_raw16(const std::filesystem::path& path, int width, int height);
void write_raw16(const std::filesystem::path& path, const HuImage& image);

// Writes manifest.json and frame_%04d.png for every frame.
void write_volume(const std::filesystem::path& dir, const ScanVolume& volume);

std::string frame_filename(int index, const std::string& ext);

}  // namespace bronchometer
