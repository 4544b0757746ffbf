#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "bronchometer/error.hpp"
#include "bronchometer/measure_wt.hpp"
#include "bronchometer/phantom.hpp"
#include "bronchometer/pipeline.hpp"
#include "bronchometer/serialize.hpp"
#include "bronchometer/service.hpp"
#include "bronchometer/session.hpp"
#include "bronchometer/validation.hpp"

namespace fs = std::filesystem;
using namespace bronchometer;
using nlohmann::json;

namespace {

struct ScanOptions {
  std::string scan_dir;
  std::vector<int> frames;
  std::string dilation = "auto";
  std::string raw_window;
  std::string corner = "min";
  bool include_carina_frame = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("scan_dir", scan_dir, "scan directory (manifest.json + frames)")->required();
    cmd->add_option("--frames", frames, "search range LO HI, inclusive")->expected(2);
    cmd->add_option("--dilation", dilation, "3x3 dilation before labeling")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    cmd->add_option("--raw-window", raw_window, "window for raw16 frames")
        ->check(CLI::IsMember({"mediastinum", "lung"}));
  }

  void add_rll_to(CLI::App* cmd) {
    cmd->add_option("--corner", corner, "which box y_max starts the polygon")->check(CLI::IsMember({"min", "max"}));
    cmd->add_flag("--include-carina-frame", include_carina_frame, "emit a crop for the carina frame itself");
  }

  PipelineConfig config() const {
    PipelineConfig c;
    if (frames.size() == 2) c.frame_range = carina::FrameRange{frames[0], frames[1]};
    c.dilation = dilation == "on"    ? carina::DilationMode::on
                 : dilation == "off" ? carina::DilationMode::off
                                     : carina::DilationMode::automatic;
    if (!raw_window.empty()) c.raw_window = preset_for(window_kind_from_string(raw_window));
    c.rll_options.corner = corner == "max" ? rll::StartCorner::max_y_max : rll::StartCorner::min_y_max;
    c.rll_options.include_carina_frame = include_carina_frame;
    return c;
  }
};

void print_report(const PipelineReport& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::fprintf(stderr, "carina frame %d (%d candidates), %d RLL frames, s1=%.3fs s2=%.3fs s3=%.3fs\n",
               r.carina_frame, r.candidate_count, r.rll_frame_count, r.timings_s.s1, r.timings_s.s2, r.timings_s.s3);
}

std::unique_ptr<Service> g_service;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int exit_code(const Error& e) { return is_input_error(e.code()) ? 2 : 3; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bronchometer: carina detection, RLL isolation and broncho-arterial measurement"};
  app.require_subcommand(1);

  // carina
  ScanOptions carina_opts;
  std::string carina_out;
  auto* carina_cmd = app.add_subcommand("carina", "detect the tracheal bifurcation frame");
  carina_opts.add_to(carina_cmd);
  carina_cmd->add_option("--out", carina_out, "write carina.json and carina_candidates.csv here");

  // rll and pipeline share their options
  ScanOptions rll_opts;
  std::string rll_out;
  auto* rll_cmd = app.add_subcommand("rll", "detect the carina and crop the right-lower-lobe frames");
  rll_opts.add_to(rll_cmd);
  rll_opts.add_rll_to(rll_cmd);
  rll_cmd->add_option("--out", rll_out, "output directory")->required();

  ScanOptions pipe_opts;
  std::string pipe_out;
  auto* pipe_cmd = app.add_subcommand("pipeline", "alias of rll that also prints the report");
  pipe_opts.add_to(pipe_cmd);
  pipe_opts.add_rll_to(pipe_cmd);
  pipe_cmd->add_option("--out", pipe_out, "output directory")->required();

  // measure
  std::string m_scan, m_sessions, m_session, m_label;
  int m_frame = 0;
  std::vector<int> m_rect;
  std::optional<std::uint64_t> m_seed;
  bool m_overlay = false;
  auto* measure_cmd = app.add_subcommand("measure", "measure IAD, ARD, BAR and WT inside an ROI");
  measure_cmd->add_option("scan_dir", m_scan, "scan directory")->required();
  measure_cmd->add_option("--frame", m_frame, "frame index")->required();
  measure_cmd->add_option("--rect", m_rect, "ROI X1 Y1 X2 Y2, inclusive frame coordinates")->expected(4)->required();
  measure_cmd->add_option("--label", m_label, "free-text ROI label");
  measure_cmd->add_option("--seed", m_seed, "WT seed (default: BRONCHOMETER_SEED or built-in)");
  measure_cmd->add_option("--sessions", m_sessions, "sessions directory; appends to --session");
  measure_cmd->add_option("--session", m_session, "session id (created when --sessions is given without it)");
  measure_cmd->add_flag("--overlay", m_overlay, "include frame-space overlay geometry");

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "generate synthetic scans");
  phantom_cmd->require_subcommand(1);
  phantom::BaPhantomSpec ba;
  std::uint64_t ba_seed = 1;
  std::string ba_out;
  auto* ba_cmd = phantom_cmd->add_subcommand("ba", "single broncho-arterial pair as a one-frame scan");
  ba_cmd->add_option("--out", ba_out, "scan directory to write")->required();
  ba_cmd->add_option("--lumen", ba.lumen_d_px, "lumen diameter, px");
  ba_cmd->add_option("--wall", ba.wall_t_px, "wall thickness, px");
  ba_cmd->add_option("--artery", ba.artery_d_px, "artery diameter, px");
  ba_cmd->add_option("--separation", ba.separation_px, "centre distance, px");
  ba_cmd->add_option("--noise", ba.noise_sigma, "gray-level noise sigma");
  ba_cmd->add_option("--size", ba.frame_size, "frame size, px");
  ba_cmd->add_option("--seed", ba_seed, "noise seed");
  double ba_spacing = 0.6;
  ba_cmd->add_option("--spacing", ba_spacing, "pixel spacing, mm");

  phantom::TracheaPhantomSpec tr;
  std::string tr_out, tr_window = "mediastinum";
  auto* tr_cmd = phantom_cmd->add_subcommand("trachea", "trachea splitting into two bronchi");
  tr_cmd->add_option("--out", tr_out, "scan directory to write")->required();
  tr_cmd->add_option("--frames", tr.n_frames, "frame count");
  tr_cmd->add_option("--split", tr.split_frame, "ground-truth carina frame");
  tr_cmd->add_option("--gap", tr.bronchi_gap_px, "bronchus gap at the split, px");
  tr_cmd->add_option("--radius", tr.lumen_radius_px, "bronchus radius, px");
  tr_cmd->add_option("--size", tr.frame_size, "frame size, px");
  tr_cmd->add_option("--thickness", tr.slice_thickness_mm, "slice thickness, mm");
  tr_cmd->add_option("--spacing", tr.pixel_spacing_mm, "pixel spacing, mm");
  tr_cmd->add_option("--noise", tr.noise_sigma_hu, "tissue noise, HU");
  tr_cmd->add_option("--clutter", tr.clutter_frames, "frames with lung-window clutter before the split");
  tr_cmd->add_option("--seed", tr.seed, "noise seed");
  tr_cmd->add_option("--window", tr_window, "render window")->check(CLI::IsMember({"mediastinum", "lung", "raw"}));

  // serve
  ServiceConfig svc;
  std::string svc_scans, svc_sessions, svc_static;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON service for the annotation UI");
  serve_cmd->add_option("--port", svc.port, "listen port (0 picks one)");
  serve_cmd->add_option("--host", svc.host, "listen address");
  serve_cmd->add_option("--scans", svc_scans, "directory of scan directories")->required();
  serve_cmd->add_option("--sessions", svc_sessions, "session storage directory")->required();
  serve_cmd->add_option("--static", svc_static, "built UI bundle to serve at /");
  serve_cmd->add_option("--threads", svc.worker_threads, "worker threads");

  // validate
  std::string v_work;
  auto* validate_cmd = app.add_subcommand("validate", "run the phantom acceptance suite");
  validate_cmd->add_option("--work", v_work, "scratch directory (default: a temp dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (carina_cmd->parsed()) {
      PipelineConfig cfg = carina_opts.config();
      cfg.run_rll = false;
      const auto out = run_pipeline(fs::path(carina_opts.scan_dir), cfg);
      if (!carina_out.empty()) write_pipeline_outputs(carina_out, out);
      print_report(out.report);
      std::cout << carina_json(out.carina);
    } else if (rll_cmd->parsed() || pipe_cmd->parsed()) {
      const ScanOptions& o = rll_cmd->parsed() ? rll_opts : pipe_opts;
      const auto out = run_pipeline(fs::path(o.scan_dir), o.config());
      write_pipeline_outputs(rll_cmd->parsed() ? rll_out : pipe_out, out);
      print_report(out.report);
      if (pipe_cmd->parsed()) std::cout << json(out.report).dump(2) << "\n";
    } else if (measure_cmd->parsed()) {
      const ScanVolume vol = [&] {
        try {
          return load_volume(m_scan);
        } catch (const Error& e) {
          throw StageError("volume_io", e);
        }
      }();
      if (m_frame < 0 || m_frame >= vol.frame_count())
        throw Error(ErrorCode::RoiOutOfBounds, "frame " + std::to_string(m_frame) + " out of range");
      const Roi roi{vol.manifest.scan_id, m_frame, {m_rect[0], m_rect[1], m_rect[2], m_rect[3]}, m_label};
      Measurement m;
      if (!m_sessions.empty()) {
        SessionStore store(m_sessions);
        if (m_session.empty()) {
          m_session = store.create(vol.manifest.scan_id, m_seed).session_id;
          std::cerr << "session " << m_session << "\n";
        }
        auto frames = [&](const std::string&, int n) -> const Frame& { return vol.frames.at(n); };
        auto spacing = [&](const std::string&) { return vol.manifest.pixel_spacing_mm; };
        m = store.measure(m_session, roi, frames, spacing);
      } else {
        m = wt::measure_roi(vol.frames[m_frame], roi, vol.manifest.pixel_spacing_mm, m_seed.value_or(default_wt_seed()));
      }
      json j = m;
      if (m_overlay) j["overlay"] = overlay_json(m);
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << j.dump(2) << "\n";
    } else if (ba_cmd->parsed()) {
      const auto ph = phantom::gen_ba_pair(ba, ba_seed);
      ScanVolume vol;
      vol.manifest = {"ba_phantom", 1, ph.frame.width, ph.frame.height, 1.0, {ba_spacing, ba_spacing}, WindowKind::none};
      vol.frames.push_back(ph.frame);
      write_volume(ba_out, vol);
      const auto& r = ph.roi;
      std::cout << json({{"roi", {r.x_min, r.y_min, r.x_max, r.y_max}},
                         {"truth",
                          {{"iad_px", ph.truth.iad_px},
                           {"oad_px", ph.truth.oad_px},
                           {"ard_px", ph.truth.ard_px},
                           {"wt_px", ph.truth.wt_px}}}})
                       .dump(2)
                << "\n";
    } else if (tr_cmd->parsed()) {
      int split = tr.split_frame;
      if (tr_window == "raw") {
        tr.validate();
        const auto hu = phantom::gen_trachea_hu(tr);
        const fs::path dir = tr_out;
        fs::create_directories(dir);
        ScanManifest m{"trachea_phantom", tr.n_frames, tr.frame_size, tr.frame_size, tr.slice_thickness_mm,
                       {tr.pixel_spacing_mm, tr.pixel_spacing_mm}, WindowKind::mediastinum};
        write_manifest(dir / "manifest.json", m);
        for (int i = 0; i < static_cast<int>(hu.size()); ++i) write_raw16(dir / frame_filename(i, "raw16"), hu[i]);
      } else {
        auto [vol, s] = phantom::gen_trachea_volume(tr, window_kind_from_string(tr_window));
        split = s;
        write_volume(tr_out, vol);
      }
      std::cout << json({{"split_frame", split}, {"gap_px", tr.bronchi_gap_px}}).dump() << "\n";
    } else if (serve_cmd->parsed()) {
      svc.scans_dir = svc_scans;
      svc.sessions_dir = svc_sessions;
      if (!svc_static.empty()) svc.static_dir = fs::path(svc_static);
      g_service = std::make_unique<Service>(svc);
      const int port = g_service->bind();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << svc.host << ":" << port << "\n";
      g_service->listen();
      g_service.reset();
    } else if (validate_cmd->parsed()) {
      fs::path work = v_work.empty() ? fs::temp_directory_path() / ("bronchometer-validate-" + std::to_string(::getpid()))
                                     : fs::path(v_work);
      bool all = true;
      validation::run_all(work, [&](const validation::CriterionResult& r) {
        all = all && r.passed;
        std::cout << validation::format_line(r) << std::endl;
      });
      if (v_work.empty()) fs::remove_all(work);
      return all ? 0 : 3;
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "] " << e.what() << "\n";
    return exit_code(e);
  } catch (const Error& e) {
    std::cerr << "error " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error " << e.what() << "\n";
    return 3;
  }
  return 0;
}
