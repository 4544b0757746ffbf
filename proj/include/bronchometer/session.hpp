#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bronchometer/carina.hpp"
#include "bronchometer/measure_wt.hpp"
#include "bronchometer/measurement.hpp"
#include "bronchometer/volume_io.hpp"

namespace bronchometer {

struct Session {
  std::string session_id;
  std::string scan_id;
  std::optional<carina::CarinaResult> carina;
  std::vector<Roi> rois;
  std::vector<Measurement> measurements;  // measurements[i] belongs to rois[i]
  std::string created_at;
  std::string updated_at;
  std::uint64_t wt_seed = wt::kDefaultSeed;
};

void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

std::string session_to_string(const Session& s);
Session session_from_string(const std::string& text);

// Default WT seed, overridable with BRONCHOMETER_SEED.
std::uint64_t default_wt_seed();

// Supplies a frame of a scan for measurement.
using FrameSource = std::function<const Frame&(const std::string& scan_id, int frame_index)>;
using SpacingSource = std::function<PixelSpacing(const std::string& scan_id)>;

// One JSON file per session. Writes to a given session are serialised through a per-session mutex
// and committed with write-then-rename, so a failed measurement leaves the file untouched.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  Session create(const std::string& scan_id, std::optional<std::uint64_t> wt_seed = std::nullopt);
  Session get(const std::string& session_id) const;
  bool exists(const std::string& session_id) const;

  // Appends roi + measurement; throws and leaves the session unchanged on any error.
  Measurement measure(const std::string& session_id, Roi roi, const FrameSource& frames,
                      const SpacingSource& spacing, const wt::WallConfig& cfg = {});
  void set_carina(const std::string& session_id, const carina::CarinaResult& result);

  std::string export_csv(const std::string& session_id) const;
  std::filesystem::path path_for(const std::string& session_id) const;

 private:
  std::mutex& lock_for(const std::string& session_id);
  void commit(const Session& s) const;

  std::filesystem::path dir_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

std::string utc_timestamp();

}  // namespace bronchometer
