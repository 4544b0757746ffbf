#include "bronchometer/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "bronchometer/serialize.hpp"

namespace bronchometer {

namespace fs = std::filesystem;
using nlohmann::json;

carina::SearchConfig PipelineConfig::search_config(const ScanManifest& manifest) const {
  carina::SearchConfig c = carina::default_config(manifest);
  if (frame_range) c.frame_range = *frame_range;
  if (crop_box) c.crop_box = *crop_box;
  if (area_range) c.area_range = *area_range;
  if (gap_range) c.gap_range = *gap_range;
  c.dilation = dilation;
  return c;
}

rll::RllSchedule PipelineConfig::rll_schedule(const ScanManifest& manifest) const {
  return schedule ? *schedule : rll::schedule_for(manifest.slice_thickness_mm);
}

void to_json(json& j, const PipelineReport& r) {
  j = {{"scan_id", r.scan_id},
       {"frame_count", r.frame_count},
       {"frame_range", {r.frame_range.lo, r.frame_range.hi}},
       {"standard_range", r.standard_range},
       {"carina_frame", r.carina_frame},
       {"candidate_count", r.candidate_count},
       {"rll_frame_count", r.rll_frame_count},
       {"timings_s", {{"s1", r.timings_s.s1}, {"s2", r.timings_s.s2}, {"s3", r.timings_s.s3}, {"rll", r.rll_s}}},
       {"total_s", r.total_s},
       {"warnings", r.warnings}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

}  // namespace

PipelineOutput run_pipeline(const ScanVolume& volume, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  PipelineOutput out;
  out.volume = volume;
  const ScanManifest& m = volume.manifest;
  PipelineReport& rep = out.report;
  rep.scan_id = m.scan_id;
  rep.frame_count = volume.frame_count();

  const carina::SearchConfig sc = staged("carina", [&] {
    auto c = cfg.search_config(m);
    c.validate();
    return c;
  });
  rep.frame_range = sc.frame_range;
  if (!cfg.frame_range) {
    const auto sr = carina::search_range(m.slice_thickness_mm, volume.frame_count());
    rep.standard_range = sr.standard;
    if (!sr.standard) rep.warnings.push_back("non-standard slice thickness; searching the whole scan");
  }
  if (sc.frame_range.hi >= volume.frame_count()) rep.warnings.push_back("search range clipped to scan length");

  out.carina = staged("carina", [&] { return carina::detect_carina(volume, sc); });
  rep.carina_frame = out.carina.carina_frame;
  rep.candidate_count = static_cast<int>(out.carina.candidates.size());
  rep.timings_s = out.carina.timings_s;

  if (cfg.run_rll) {
    const auto t1 = Clock::now();
    out.rll_frames = staged("rll", [&] {
      const auto sched = cfg.rll_schedule(m);
      sched.validate();
      return rll::extract_rll(volume, out.carina, sched, cfg.rll_options);
    });
    rep.rll_s = seconds_since(t1);
    rep.rll_frame_count = static_cast<int>(out.rll_frames.size());
  }
  rep.total_s = seconds_since(t0);
  return out;
}

PipelineOutput run_pipeline(const fs::path& scan_dir, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  const ScanVolume volume = staged("volume_io", [&] { return load_volume(scan_dir, cfg.raw_window); });
  const double load_s = seconds_since(t0);
  PipelineOutput out = run_pipeline(volume, cfg);
  out.report.total_s += load_s;
  return out;
}

std::string carina_json(const carina::CarinaResult& r) { return json(r).dump(2) + "\n"; }

std::string rll_filename(int frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rll_%04d.png", frame_index);
  return buf;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
  f << text;
}

}  // namespace

void write_pipeline_outputs(const fs::path& out_dir, const PipelineOutput& out) {
  staged("output", [&] {
    fs::create_directories(out_dir);
    write_text(out_dir / "carina.json", carina_json(out.carina));
    write_text(out_dir / "carina_candidates.csv", candidates_csv(out.carina));
    if (!out.rll_frames.empty()) {
      const fs::path rll_dir = out_dir / "rll";
      fs::create_directories(rll_dir);
      json index = json::array();
      for (const auto& f : out.rll_frames) {
        write_png(rll_dir / rll_filename(f.frame_index), f.cropped);
        index.push_back({{"frame", f.frame_index}, {"file", rll_filename(f.frame_index)}, {"polygon", f.polygon}});
      }
      write_text(rll_dir / "index.json", index.dump(2) + "\n");
    }
    write_text(out_dir / "report.json", json(out.report).dump(2) + "\n");
    return 0;
  });
}

}  // namespace bronchometer
