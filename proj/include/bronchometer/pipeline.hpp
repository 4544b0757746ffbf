#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bronchometer/carina.hpp"
#include "bronchometer/error.hpp"
#include "bronchometer/rll.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer {

// An Error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause) : Error(cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::optional<carina::FrameRange> frame_range;
  std::optional<BoundingBox> crop_box;
  std::optional<carina::OpenClosedRange> area_range;
  std::optional<carina::OpenClosedRange> gap_range;
  carina::DilationMode dilation = carina::DilationMode::automatic;
  std::optional<rll::RllSchedule> schedule;
  rll::ExtractOptions rll_options;
  std::optional<WindowPreset> raw_window;
  bool run_rll = true;

  carina::SearchConfig search_config(const ScanManifest& manifest) const;
  rll::RllSchedule rll_schedule(const ScanManifest& manifest) const;
};

struct PipelineReport {
  std::string scan_id;
  int frame_count = 0;
  carina::FrameRange frame_range;
  bool standard_range = true;
  int carina_frame = 0;
  int candidate_count = 0;
  int rll_frame_count = 0;
  carina::Timings timings_s;
  double rll_s = 0.0;
  double total_s = 0.0;
  std::vector<std::string> warnings;
};

void to_json(nlohmann::json& j, const PipelineReport& r);

struct PipelineOutput {
  ScanVolume volume;
  carina::CarinaResult carina;
  std::vector<rll::RllFrame> rll_frames;
  PipelineReport report;
};

// Carina stage followed by RLL extraction, in memory. Errors are rethrown as StageError.
PipelineOutput run_pipeline(const ScanVolume& volume, const PipelineConfig& cfg = {});
PipelineOutput run_pipeline(const std::filesystem::path& scan_dir, const PipelineConfig& cfg = {});

// Writes carina.json, carina_candidates.csv, rll/rll_NNNN.png, rll/index.json and report.json.
void write_pipeline_outputs(const std::filesystem::path& out_dir, const PipelineOutput& out);

std::string carina_json(const carina::CarinaResult& r);
std::string rll_filename(int frame_index);

}  // namespace bronchometer
