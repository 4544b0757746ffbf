#include "bronchometer/volume_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>

#include "json.hpp"
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "bronchometer/error.hpp"

namespace bronchometer {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::mediastinum: return "mediastinum";
    case WindowKind::lung: return "lung";
    case WindowKind::none: return "none";
  }
  return "none";
}

WindowKind window_kind_from_string(const std::string& s) {
  if (s == "mediastinum") return WindowKind::mediastinum;
  if (s == "lung") return WindowKind::lung;
  if (s == "none" || s == "raw") return WindowKind::none;
  throw Error(ErrorCode::InvalidArgument, "unknown window '" + s + "'");
}

std::optional<WindowPreset> preset_for(WindowKind kind) {
  switch (kind) {
    case WindowKind::mediastinum: return WindowPreset::mediastinum();
    case WindowKind::lung: return WindowPreset::lung();
    case WindowKind::none: return std::nullopt;
  }
  return std::nullopt;
}

void ScanManifest::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::InvalidManifest, "scan '" + scan_id + "': " + what);
  };
  if (frame_count < 1) fail("frame_count must be >= 1");
  if (width < 64 || height < 64) fail("frames must be at least 64x64");
  if (!(pixel_spacing_mm.row > 0.0) || !(pixel_spacing_mm.col > 0.0)) fail("pixel spacing must be positive");
  if (!(slice_thickness_mm > 0.0)) fail("slice thickness must be positive");
}

std::uint8_t window_value(double hu, const WindowPreset& preset) {
  const double lower = preset.wl - preset.ww / 2.0;
  const double scaled = (hu - lower) / preset.ww * 255.0;
  return static_cast<std::uint8_t>(std::clamp<long>(round_half_up(scaled), 0, 255));
}

Frame apply_window(const HuImage& raw_hu, const WindowPreset& preset, int index) {
  if (!(preset.ww > 0.0)) throw Error(ErrorCode::InvalidArgument, "window width must be positive");
  // 16-bit input has only 65536 possible values, so a lookup table keeps this cheap.
  std::vector<std::uint8_t> lut(65536);
  for (int v = -32768; v <= 32767; ++v) lut[static_cast<std::size_t>(v + 32768)] = window_value(v, preset);

  Frame out(raw_hu.width, raw_hu.height, 0, index);
  std::transform(raw_hu.values.begin(), raw_hu.values.end(), out.pixels.begin(),
                 [&](std::int16_t v) { return lut[static_cast<std::size_t>(v + 32768)]; });
  return out;
}

BoundingBox scale_rect(const BoundingBox& rect, int from_size, int to_size, RoundingMode mode) {
  if (from_size <= 0 || to_size <= 0) throw Error(ErrorCode::InvalidArgument, "sizes must be positive");
  const double f = static_cast<double>(to_size) / from_size;
  auto scale = [&](int v) -> int {
    const double s = v * f;
    return static_cast<int>(mode == RoundingMode::ceil ? std::ceil(s - 1e-9) : round_half_up(s));
  };
  return {scale(rect.x_min), scale(rect.y_min), scale(rect.x_max), scale(rect.y_max)};
}

std::string frame_filename(int index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%04d.%s", index, ext.c_str());
  return buf;
}

ScanManifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::MissingManifest, manifest_path.string());
  ScanManifest m;
  try {
    const json j = json::parse(in);
    m.scan_id = j.at("scan_id").get<std::string>();
    m.frame_count = j.at("frame_count").get<int>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.slice_thickness_mm = j.at("slice_thickness_mm").get<double>();
    const auto& ps = j.at("pixel_spacing_mm");
    if (!ps.is_array() || ps.size() != 2) throw Error(ErrorCode::InvalidManifest, "pixel_spacing_mm must be [row,col]");
    m.pixel_spacing_mm = {ps[0].get<double>(), ps[1].get<double>()};
    m.window = window_kind_from_string(j.value("window", std::string("none")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::InvalidManifest, e.what());
    throw;
  }
  m.validate();
  return m;
}

void write_manifest(const fs::path& manifest_path, const ScanManifest& m) {
  json j;
  j["scan_id"] = m.scan_id;
  j["frame_count"] = m.frame_count;
  j["width"] = m.width;
  j["height"] = m.height;
  j["slice_thickness_mm"] = m.slice_thickness_mm;
  j["pixel_spacing_mm"] = {m.pixel_spacing_mm.row, m.pixel_spacing_mm.col};
  j["window"] = to_string(m.window);
  std::ofstream out(manifest_path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + manifest_path.string());
  out << j.dump(2) << '\n';
}

namespace {

Frame frame_from_mat(const cv::Mat& mat, int index) {
  if (mat.empty()) throw Error(ErrorCode::CorruptFrame, "undecodable image");
  if (mat.depth() != CV_8U) throw Error(ErrorCode::UnsupportedBitDepth, "only 8-bit PNG frames are supported");
  cv::Mat gray;
  switch (mat.channels()) {
    case 1: gray = mat; break;
    // Colour input: the red channel carries the gray value (R=G=B in exported sets).
    case 3:
    case 4: cv::extractChannel(mat, gray, 2); break;
    default: throw Error(ErrorCode::UnsupportedBitDepth, "unsupported channel count");
  }
  Frame f(gray.cols, gray.rows, 0, index);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    std::copy(row, row + gray.cols, f.pixels.begin() + static_cast<std::size_t>(y) * f.width);
  }
  return f;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::CorruptFrame, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Frame decode_png(const std::vector<std::uint8_t>& bytes, int index) {
  if (bytes.empty()) throw Error(ErrorCode::CorruptFrame, "empty image");
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
  return frame_from_mat(cv::imdecode(buf, cv::IMREAD_UNCHANGED), index);
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  const cv::Mat mat(frame.height, frame.width, CV_8U, const_cast<std::uint8_t*>(frame.pixels.data()));
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat, out, {cv::IMWRITE_PNG_COMPRESSION, 3}))
    throw Error(ErrorCode::Io, "PNG encoding failed");
  return out;
}

Frame read_png(const fs::path& path, int index) {
  try {
    return decode_png(read_bytes(path), index);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptFrame) throw Error(ErrorCode::CorruptFrame, path.string());
    throw;
  }
}

void write_png(const fs::path& path, const Frame& frame) {
  const auto bytes = encode_png(frame);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

HuImage read_raw16(const fs::path& path, int width, int height) {
  const auto bytes = read_bytes(path);
  const auto expected = static_cast<std::size_t>(width) * height * 2;
  if (bytes.size() != expected)
    throw Error(ErrorCode::CorruptFrame, path.string() + ": expected " + std::to_string(expected) + " bytes");
  HuImage img{width, height, std::vector<std::int16_t>(static_cast<std::size_t>(width) * height)};
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const auto lo = static_cast<std::uint16_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint16_t>(bytes[2 * i + 1]);
    img.values[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return img;
}

void write_raw16(const fs::path& path, const HuImage& image) {
  std::vector<char> bytes(image.values.size() * 2);
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(image.values[i]);
    bytes[2 * i] = static_cast<char>(u & 0xff);
    bytes[2 * i + 1] = static_cast<char>(u >> 8);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ScanVolume load_volume(const fs::path& dir, std::optional<WindowPreset> raw_window) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) throw Error(ErrorCode::MissingManifest, manifest_path.string());
  ScanVolume vol;
  vol.manifest = read_manifest(manifest_path);
  const auto& m = vol.manifest;

  static const std::regex kFramePattern(R"(frame_(\d{4,})\.(png|raw16))");
  std::map<int, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch match;
    const auto name = entry.path().filename().string();
    if (!std::regex_match(name, match, kFramePattern)) continue;
    const int idx = std::stoi(match[1].str());
    if (!files.emplace(idx, entry.path()).second)
      throw Error(ErrorCode::FrameCountMismatch, "frame " + std::to_string(idx) + " present in two formats");
  }
  if (static_cast<int>(files.size()) != m.frame_count || (!files.empty() && files.rbegin()->first != m.frame_count - 1))
    throw Error(ErrorCode::FrameCountMismatch, "manifest declares " + std::to_string(m.frame_count) + " frames, found " +
                                                   std::to_string(files.size()));

  vol.frames.reserve(files.size());
  for (const auto& [idx, path] : files) {
    Frame f;
    if (path.extension() == ".raw16") {
      auto preset = raw_window ? raw_window : preset_for(m.window);
      if (!preset) throw Error(ErrorCode::InvalidManifest, "raw16 frames need a window preset");
      f = apply_window(read_raw16(path, m.width, m.height), *preset, idx);
    } else {
      f = read_png(path, idx);
    }
    if (f.width != m.width || f.height != m.height)
      throw Error(ErrorCode::CorruptFrame, path.string() + ": size differs from manifest");
    vol.frames.push_back(std::move(f));
  }
  return vol;
}

void write_volume(const fs::path& dir, const ScanVolume& volume) {
  fs::create_directories(dir);
  write_manifest(dir / "manifest.json", volume.manifest);
  for (const auto& f : volume.frames) write_png(dir / frame_filename(f.index, "png"), f);
}

}  // namespace bronchometer
