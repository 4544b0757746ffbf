#include "bronchometer/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bronchometer/carina.hpp"
#include "bronchometer/error.hpp"
#include "bronchometer/measure_bar.hpp"
#include "bronchometer/measure_wt.hpp"
#include "bronchometer/phantom.hpp"
#include "bronchometer/pipeline.hpp"
#include "bronchometer/serialize.hpp"
#include "bronchometer/session.hpp"

namespace bronchometer::validation {

namespace fs = std::filesystem;

const std::vector<GapRow>& gap_rows() {
  static const std::vector<GapRow> rows{
      {213, 227, 245, 252, 249, 218, 277, 237, 4},
      {212, 241, 238, 263, 244, 236, 268, 255, 6},
      {200, 267, 225, 286, 231, 265, 255, 278, 6},
      {209, 222, 236, 242, 240, 238, 266, 254, 4},
  };
  return rows;
}

const std::vector<BarRow>& bar_rows() {
  static const std::vector<BarRow> rows{
      {1, 1.81, 2.77, 0.65, 0.80}, {2, 2.58, 3.19, 0.81, 0.54}, {3, 3.45, 4.78, 0.72, 1.00},
      {4, 2.43, 2.59, 0.94, 0.71}, {5, 2.63, 3.35, 0.79, 0.82}, {6, 3.51, 3.72, 0.94, 0.82},
      {7, 2.64, 3.42, 0.77, 0.91}, {8, 2.91, 4.11, 0.71, 0.91}, {9, 2.66, 3.36, 0.79, 0.73},
      {10, 3.01, 3.90, 0.81, 0.82},
  };
  return rows;
}

const std::vector<ExpertRow>& expert_rows() {
  static const std::vector<ExpertRow> rows{
      {1, 1.9, 3.1, 2.60, 0.73, 0.7},  {2, 2.7, 3.8, 3.42, 0.79, 0.5},  {3, 3.4, 5.4, 4.72, 0.72, 1.0},
      {4, 2.5, 3.9, 2.84, 0.88, 0.7},  {5, 2.7, 4.3, 3.10, 0.87, 0.8},  {6, 3.4, 4.7, 3.82, 0.89, 0.65},
      {7, 2.7, 4.6, 2.62, 1.03, 0.95}, {8, 3.1, 4.9, 3.97, 0.78, 0.9},  {9, 2.7, 4.1, 3.51, 0.77, 0.7},
      {10, 3.2, 4.9, 3.90, 0.82, 0.85},
  };
  return rows;
}

const std::vector<int>& expert_wall_anomalies() {
  static const std::vector<int> rows{1, 2};
  return rows;
}

namespace {

using Clock = std::chrono::steady_clock;

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void append(std::string& out, const std::string& part) {
  if (!out.empty()) out += "; ";
  out += part;
}

}  // namespace

CriterionResult gap_arithmetic() {
  Timer t;
  CriterionResult r{1, "gap arithmetic (reference box pairs)", true, "", 0};
  for (const auto& row : gap_rows()) {
    const int g = carina::gap_between({row.x1a, row.y1a, row.x2a, row.y2a}, {row.x1b, row.y1b, row.x2b, row.y2b});
    append(r.detail, fmt("%d", g));
    if (g != row.gap) {
      r.passed = false;
      append(r.detail, fmt("expected %d", row.gap));
    }
  }
  r.seconds = t.seconds();
  if (r.seconds >= 1.0) r.passed = false;
  return r;
}

CriterionResult bar_arithmetic() {
  Timer t;
  CriterionResult r{2, "BAR arithmetic (reference rows)", true, "", 0};
  int ok = 0;
  for (const auto& row : bar_rows()) {
    const double bar = row.iad / row.ard;
    if (std::abs(bar - row.bar) <= 0.005 + 1e-12) {
      ++ok;
    } else {
      r.passed = false;
      append(r.detail, fmt("row %d: %.2f/%.2f = %.4f, listed %.2f", row.dbap, row.iad, row.ard, bar, row.bar));
    }
  }
  r.detail = fmt("%d/10 rows within 0.005", ok) + (r.detail.empty() ? "" : "; " + r.detail);
  r.seconds = t.seconds();
  if (r.seconds >= 1.0) r.passed = false;
  return r;
}

CriterionResult expert_wall_arithmetic() {
  Timer t;
  CriterionResult r{3, "symmetric wall thickness (reference rows)", true, "", 0};
  const auto& anomalies = expert_wall_anomalies();
  int consistent = 0;
  std::string noted;
  for (const auto& row : expert_rows()) {
    const double wt = wt::wt_symmetric(row.eoad, row.eiad);
    const bool match = std::abs(wt - row.ew) < 1e-9;
    const bool anomaly = std::find(anomalies.begin(), anomalies.end(), row.dbap) != anomalies.end();
    if (anomaly) {
      append(noted, fmt("row %d computes %.2f vs listed %.2f", row.dbap, wt, row.ew));
      if (match) {
        r.passed = false;
        append(r.detail, fmt("row %d listed as anomaly but matches", row.dbap));
      }
    } else if (match) {
      ++consistent;
    } else {
      r.passed = false;
      append(r.detail, fmt("row %d: %.4f vs %.2f", row.dbap, wt, row.ew));
    }
  }
  r.detail = fmt("%d consistent rows exact", consistent) + (r.detail.empty() ? "" : "; " + r.detail) +
             "; known source anomalies: " + noted;
  r.seconds = t.seconds();
  return r;
}

CriterionResult diameter_oracle() {
  Timer t;
  CriterionResult r{4, "diameter oracle (disc phantoms)", true, "", 0};
  for (int d : {8, 12, 16, 24, 32, 40}) {
    const int size = d + 16;
    const Mask disc = phantom::rasterize_disc(size, size, 8, 8, d);
    const DiameterEstimate est = bar::region_diameter(disc, {1.0, 1.0});
    const double oracle = phantom::oracle_max_diameter(disc);
    const double major = est.chords.front().length_px;
    const bool ok = std::abs(est.mean_px - d) <= 1.5 && std::abs(major - oracle) <= 0.5;
    append(r.detail, fmt("D=%d mean=%.2f max=%.2f oracle=%.2f", d, est.mean_px, major, oracle));
    if (!ok) r.passed = false;
  }
  r.seconds = t.seconds();
  if (r.seconds >= 30.0) r.passed = false;
  return r;
}

CriterionResult wall_oracle() {
  Timer t;
  CriterionResult r{5, "wall-thickness oracle (annulus phantoms)", true, "", 0};
  for (int th : {2, 3, 4}) {
    phantom::BaPhantomSpec spec;
    spec.wall_t_px = th;
    const auto ph = phantom::gen_ba_pair(spec, 1);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Measurement m = wt::measure_roi(ph.frame, Roi{"annulus", 0, ph.roi, ""}, {0.5, 0.5}, seed);
      worst = std::max(worst, std::abs(m.wt_px - th));
    }
    append(r.detail, fmt("t=%d max|err|=%.2f", th, worst));
    if (worst > 1.0) r.passed = false;
  }
  r.seconds = t.seconds();
  if (r.seconds >= 10.0) r.passed = false;
  return r;
}

CriterionResult carina_phantoms() {
  Timer t;
  CriterionResult r{6, "carina phantom suite", true, "", 0};
  const int splits[10] = {36, 41, 47, 52, 55, 58, 63, 66, 70, 74};
  int hits = 0;
  for (int i = 0; i < 10; ++i) {
    phantom::TracheaPhantomSpec spec;
    spec.split_frame = splits[i];
    spec.bronchi_gap_px = 4 + i % 4;
    spec.seed = 100 + i;
    const auto [vol, split] = phantom::gen_trachea_volume(spec);
    try {
      const auto res = carina::detect_carina(vol, carina::default_config(vol.manifest));
      if (std::abs(res.carina_frame - split) <= 2) ++hits;
      else append(r.detail, fmt("split %d detected %d", split, res.carina_frame));
    } catch (const Error& e) {
      append(r.detail, fmt("split %d: %s", split, e.what()));
    }
  }
  bool wrong_gap_rejected = false;
  {
    phantom::TracheaPhantomSpec spec;
    spec.bronchi_gap_px = 10;
    const auto [vol, split] = phantom::gen_trachea_volume(spec);
    try {
      carina::detect_carina(vol, carina::default_config(vol.manifest));
    } catch (const Error& e) {
      wrong_gap_rejected = e.code() == ErrorCode::NoCarinaFound;
    }
  }
  r.detail = fmt("%d/10 within 2 frames; gap-10 phantom %s", hits, wrong_gap_rejected ? "NoCarinaFound" : "NOT rejected") +
             (r.detail.empty() ? "" : "; " + r.detail);
  r.seconds = t.seconds();
  r.passed = hits >= 9 && wrong_gap_rejected && r.seconds < 60.0;
  return r;
}

CriterionResult carina_performance() {
  CriterionResult r{7, "carina performance (100 x 512x512)", false, "", 0};
  phantom::TracheaPhantomSpec spec;
  const auto [vol, split] = phantom::gen_trachea_volume(spec);
  auto cfg = carina::default_config(vol.manifest);
  cfg.frame_range = {0, vol.frame_count() - 1};
  Timer t;
  const auto res = carina::detect_carina(vol, cfg);
  r.seconds = t.seconds();
  r.passed = r.seconds < 60.0 && res.carina_frame == split;
  r.detail = fmt("frames 0-%d, carina %d (truth %d), s1=%.3f s2=%.3f s3=%.3f", vol.frame_count() - 1,
                 res.carina_frame, split, res.timings_s.s1, res.timings_s.s2, res.timings_s.s3);
  return r;
}

namespace {

struct RunArtifacts {
  std::string carina_json;
  std::vector<std::pair<std::string, std::string>> rll_pngs;
  std::string csv;
};

RunArtifacts end_to_end(const fs::path& dir) {
  fs::remove_all(dir);
  phantom::TracheaPhantomSpec tspec;
  tspec.n_frames = 90;
  tspec.split_frame = 48;
  tspec.seed = 7;
  const auto [trachea, split] = phantom::gen_trachea_volume(tspec);
  write_volume(dir / "scans" / "trachea", trachea);

  ScanVolume ba;
  ba.manifest = {"ba", 5, 128, 128, 1.0, {0.6, 0.6}, WindowKind::none};
  std::vector<BoundingBox> rois;
  for (int i = 0; i < 5; ++i) {
    phantom::BaPhantomSpec spec;
    spec.lumen_d_px = 8 + 2 * i;
    spec.artery_d_px = 12 + i;
    spec.noise_sigma = 2.0;
    auto ph = phantom::gen_ba_pair(spec, 30 + i);
    ph.frame.index = i;
    ba.frames.push_back(ph.frame);
    rois.push_back(ph.roi);
  }
  write_volume(dir / "scans" / "ba", ba);

  const auto out = run_pipeline(dir / "scans" / "trachea");
  write_pipeline_outputs(dir / "out", out);

  const ScanVolume loaded = load_volume(dir / "scans" / "ba");
  SessionStore store(dir / "sessions");
  const Session s = store.create("ba", 12345);
  auto frames = [&](const std::string&, int n) -> const Frame& { return loaded.frames.at(n); };
  auto spacing = [&](const std::string&) { return loaded.manifest.pixel_spacing_mm; };
  for (int i = 0; i < 5; ++i) store.measure(s.session_id, Roi{"ba", i, rois[i], "pair"}, frames, spacing);

  RunArtifacts a;
  a.carina_json = read_bytes(dir / "out" / "carina.json");
  std::vector<fs::path> pngs;
  for (const auto& e : fs::directory_iterator(dir / "out" / "rll"))
    if (e.path().extension() == ".png") pngs.push_back(e.path());
  std::sort(pngs.begin(), pngs.end());
  for (const auto& p : pngs) a.rll_pngs.emplace_back(p.filename().string(), read_bytes(p));
  a.csv = store.export_csv(s.session_id);
  return a;
}

}  // namespace

CriterionResult determinism(const fs::path& work_dir) {
  Timer t;
  CriterionResult r{8, "end-to-end determinism", false, "", 0};
  try {
    const RunArtifacts a = end_to_end(work_dir / "run_a");
    const RunArtifacts b = end_to_end(work_dir / "run_b");
    const bool carina_same = a.carina_json == b.carina_json;
    const bool rll_same = a.rll_pngs == b.rll_pngs;
    const bool csv_same = a.csv == b.csv;
    const auto lines = std::count(a.csv.begin(), a.csv.end(), '\n');
    r.passed = carina_same && rll_same && csv_same && !a.rll_pngs.empty() && lines == 6;
    r.detail = fmt("carina.json %s, %zu RLL PNGs %s, CSV (%ld lines) %s", carina_same ? "identical" : "DIFFER",
                   a.rll_pngs.size(), rll_same ? "identical" : "DIFFER", static_cast<long>(lines),
                   csv_same ? "identical" : "DIFFER");
  } catch (const Error& e) {
    r.detail = e.what();
  }
  r.seconds = t.seconds();
  return r;
}

CriterionResult window_ordering() {
  Timer t;
  CriterionResult r{9, "window candidate ordering", false, "", 0};
  phantom::TracheaPhantomSpec spec;
  spec.clutter_frames = 6;
  const auto [med, split_m] = phantom::gen_trachea_volume(spec, WindowKind::mediastinum);
  const auto [lung, split_l] = phantom::gen_trachea_volume(spec, WindowKind::lung);
  const auto cfg = carina::default_config(med.manifest);
  const auto n_med = carina::find_candidates(med, cfg).size();
  const auto n_lung = carina::find_candidates(lung, cfg).size();
  r.passed = n_med <= n_lung;
  r.detail = fmt("mediastinum %zu candidates, lung %zu", n_med, n_lung);
  r.seconds = t.seconds();
  return r;
}

std::vector<CriterionResult> run_all(const fs::path& work_dir,
                                     const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<std::function<CriterionResult()>> checks{
      gap_arithmetic, bar_arithmetic, expert_wall_arithmetic, diameter_oracle, wall_oracle,
      carina_phantoms, carina_performance, [&] { return determinism(work_dir); }, window_ordering,
  };
  std::vector<CriterionResult> out;
  for (int i = 0; i < static_cast<int>(checks.size()); ++i) {
    CriterionResult r;
    try {
      r = checks[i]();
    } catch (const std::exception& e) {
      r = {i + 1, "criterion " + std::to_string(i + 1), false, std::string("exception: ") + e.what(), 0};
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt("criterion %d %s: %s (%.3fs) %s", r.id, r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
             r.detail.c_str());
}

}  // namespace bronchometer::validation
