#include "bronchometer/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "bronchometer/error.hpp"

namespace bronchometer {

using nlohmann::json;

void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }
void from_json(const json& j, Point& p) { p = {j.at(0).get<int>(), j.at(1).get<int>()}; }

void to_json(json& j, const BoundingBox& b) { j = json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }
void from_json(const json& j, BoundingBox& b) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::InvalidArgument, "box must be [x1,y1,x2,y2]");
  b = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

void to_json(json& j, const Chord& c) { j = {{"p1", c.p1}, {"p2", c.p2}, {"length_px", c.length_px}}; }
void from_json(const json& j, Chord& c) {
  c.p1 = j.at("p1").get<Point>();
  c.p2 = j.at("p2").get<Point>();
  c.length_px = j.at("length_px").get<double>();
}

void to_json(json& j, const DiameterEstimate& d) {
  j = {{"chords", d.chords}, {"mean_px", d.mean_px}, {"mean_mm", d.mean_mm}};
}
void from_json(const json& j, DiameterEstimate& d) {
  d.chords = j.at("chords").get<std::vector<Chord>>();
  d.mean_px = j.at("mean_px").get<double>();
  d.mean_mm = j.at("mean_mm").get<double>();
}

namespace {
Direction direction_from_string(const std::string& s) {
  if (s == "north") return Direction::north;
  if (s == "south") return Direction::south;
  if (s == "east") return Direction::east;
  if (s == "west") return Direction::west;
  throw Error(ErrorCode::InvalidArgument, "unknown direction " + s);
}
}  // namespace

void to_json(json& j, const WallSample& s) {
  j = {{"direction", to_string(s.direction)}, {"inner_pt", s.inner_pt}, {"outer_pt", s.outer_pt}, {"dist_px", s.dist_px}};
}
void from_json(const json& j, WallSample& s) {
  s.direction = direction_from_string(j.at("direction").get<std::string>());
  s.inner_pt = j.at("inner_pt").get<Point>();
  s.outer_pt = j.at("outer_pt").get<Point>();
  s.dist_px = j.at("dist_px").get<double>();
}

void to_json(json& j, const Roi& r) {
  j = {{"scan_id", r.scan_id}, {"frame_index", r.frame_index}, {"rect", r.rect}, {"label", r.label}};
}
void from_json(const json& j, Roi& r) {
  r.scan_id = j.value("scan_id", std::string());
  r.frame_index = j.at("frame_index").get<int>();
  r.rect = j.at("rect").get<BoundingBox>();
  r.label = j.value("label", std::string());
}

void to_json(json& j, const Measurement& m) {
  j = {{"roi", m.roi},
       {"iad", m.iad},
       {"ard", m.ard},
       {"bar", m.bar},
       {"wt_mm", m.wt_mm},
       {"wt_px", m.wt_px},
       {"wt_samples", m.wt_samples},
       {"wt_seed", m.wt_seed},
       {"airway_perimeter", m.airway_perimeter},
       {"artery_perimeter", m.artery_perimeter},
       {"outer_airway_perimeter", m.outer_airway_perimeter},
       {"warnings", m.warnings},
       {"method_version", m.method_version}};
}
void from_json(const json& j, Measurement& m) {
  m.roi = j.at("roi").get<Roi>();
  m.iad = j.at("iad").get<DiameterEstimate>();
  m.ard = j.at("ard").get<DiameterEstimate>();
  m.bar = j.at("bar").get<double>();
  m.wt_mm = j.at("wt_mm").get<double>();
  m.wt_px = j.at("wt_px").get<double>();
  m.wt_samples = j.at("wt_samples").get<std::vector<WallSample>>();
  m.wt_seed = j.at("wt_seed").get<std::uint64_t>();
  m.airway_perimeter = j.at("airway_perimeter").get<std::vector<Point>>();
  m.artery_perimeter = j.at("artery_perimeter").get<std::vector<Point>>();
  m.outer_airway_perimeter = j.at("outer_airway_perimeter").get<std::vector<Point>>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  m.method_version = j.at("method_version").get<std::string>();
}

namespace carina {

void to_json(json& j, const Candidate& c) {
  j = {{"frame", c.frame}, {"boxes", json::array({c.box_a, c.box_b})}, {"gap", c.gap}};
}
void from_json(const json& j, Candidate& c) {
  c.frame = j.at("frame").get<int>();
  c.box_a = j.at("boxes").at(0).get<BoundingBox>();
  c.box_b = j.at("boxes").at(1).get<BoundingBox>();
  c.gap = j.at("gap").get<int>();
}

void to_json(json& j, const CarinaResult& r) {
  j = {{"carina_frame", r.carina_frame},
       {"box_a", r.box_a},
       {"box_b", r.box_b},
       {"gap_px", r.gap_px},
       {"candidates", r.candidates}};
}
void from_json(const json& j, CarinaResult& r) {
  r.carina_frame = j.at("carina_frame").get<int>();
  r.box_a = j.at("box_a").get<BoundingBox>();
  r.box_b = j.at("box_b").get<BoundingBox>();
  r.gap_px = j.at("gap_px").get<int>();
  r.candidates = j.value("candidates", std::vector<Candidate>{});
}

}  // namespace carina

namespace rll {

void to_json(json& j, const RllPolygon& p) {
  j = {{"start_point", p.start_point},
       {"end_point", p.end_point},
       {"fourth_point", p.fourth_point},
       {"right_point", p.right_point}};
}
void from_json(const json& j, RllPolygon& p) {
  p.start_point = j.at("start_point").get<Point>();
  p.end_point = j.at("end_point").get<Point>();
  p.fourth_point = j.at("fourth_point").get<Point>();
  p.right_point = j.at("right_point").get<Point>();
}

}  // namespace rll

std::string candidates_csv(const carina::CarinaResult& r) {
  std::ostringstream out;
  auto box = [](const BoundingBox& b) {
    return std::to_string(b.x_min) + " " + std::to_string(b.y_min) + " " + std::to_string(b.x_max) + " " +
           std::to_string(b.y_max);
  };
  out << "frame,box_a,box_b,gap\n";
  for (const auto& c : r.candidates) out << c.frame << ',' << box(c.box_a) << ',' << box(c.box_b) << ',' << c.gap << '\n';
  return out.str();
}

std::string format_2dp(double v) {
  // The epsilon absorbs binary representation error, so 0.845 rounds to 0.85.
  const double rounded = std::floor(v * 100.0 + 0.5 + 1e-9) / 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", rounded == 0.0 ? 0.0 : rounded);
  return buf;
}

std::string measurements_csv(const std::vector<Measurement>& ms) {
  std::string out = "dbap_id,iad_mm,ard_mm,bar,wt_mm\n";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto& m = ms[i];
    out += std::to_string(i + 1) + ',' + format_2dp(m.iad.mean_mm) + ',' + format_2dp(m.ard.mean_mm) + ',' +
           format_2dp(m.bar) + ',' + format_2dp(m.wt_mm) + '\n';
  }
  return out;
}

json overlay_json(const Measurement& m) {
  const Point origin{m.roi.rect.x_min, m.roi.rect.y_min};
  auto shift = [&](Point p) { return Point{p.x + origin.x, p.y + origin.y}; };
  auto shift_all = [&](const std::vector<Point>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(shift(p));
    return arr;
  };
  auto chords = [&](const DiameterEstimate& d) {
    json arr = json::array();
    for (const auto& c : d.chords) arr.push_back({{"p1", shift(c.p1)}, {"p2", shift(c.p2)}, {"length_px", c.length_px}});
    return arr;
  };
  json samples = json::array();
  for (const auto& s : m.wt_samples)
    samples.push_back({{"direction", to_string(s.direction)},
                       {"inner_pt", shift(s.inner_pt)},
                       {"outer_pt", shift(s.outer_pt)},
                       {"dist_px", s.dist_px}});
  return {{"airway_perimeter", shift_all(m.airway_perimeter)},
          {"artery_perimeter", shift_all(m.artery_perimeter)},
          {"outer_airway_perimeter", shift_all(m.outer_airway_perimeter)},
          {"airway_chords", chords(m.iad)},
          {"artery_chords", chords(m.ard)},
          {"wt_samples", samples}};
}

}  // namespace bronchometer
