#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "bronchometer/carina.hpp"
#include "bronchometer/measurement.hpp"
#include "bronchometer/rll.hpp"

namespace bronchometer {

void to_json(nlohmann::json& j, const Point& p);
void from_json(const nlohmann::json& j, Point& p);
void to_json(nlohmann::json& j, const BoundingBox& b);
void from_json(const nlohmann::json& j, BoundingBox& b);
void to_json(nlohmann::json& j, const Chord& c);
void from_json(const nlohmann::json& j, Chord& c);
void to_json(nlohmann::json& j, const DiameterEstimate& d);
void from_json(const nlohmann::json& j, DiameterEstimate& d);
void to_json(nlohmann::json& j, const WallSample& s);
void from_json(const nlohmann::json& j, WallSample& s);
void to_json(nlohmann::json& j, const Roi& r);
void from_json(const nlohmann::json& j, Roi& r);
void to_json(nlohmann::json& j, const Measurement& m);
void from_json(const nlohmann::json& j, Measurement& m);

namespace carina {
void to_json(nlohmann::json& j, const Candidate& c);
void from_json(const nlohmann::json& j, Candidate& c);
// Timings are deliberately left out so the file is reproducible.
void to_json(nlohmann::json& j, const CarinaResult& r);
void from_json(const nlohmann::json& j, CarinaResult& r);
}  // namespace carina

namespace rll {
void to_json(nlohmann::json& j, const RllPolygon& p);
void from_json(const nlohmann::json& j, RllPolygon& p);
}  // namespace rll

// frame,box_a,box_b,gap with boxes as "x1 y1 x2 y2".
std::string candidates_csv(const carina::CarinaResult& r);

// Two decimals, half-up.
std::string format_2dp(double v);

// dbap_id,iad_mm,ard_mm,bar,wt_mm, one row per measurement in order.
std::string measurements_csv(const std::vector<Measurement>& ms);

// Geometry shifted into frame coordinates for overlay drawing.
nlohmann::json overlay_json(const Measurement& m);

}  // namespace bronchometer
