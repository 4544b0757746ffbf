#include "bronchometer/session.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "bronchometer/error.hpp"
#include "bronchometer/serialize.hpp"

namespace bronchometer {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const Session& s) {
  j = {{"session_id", s.session_id},
       {"scan_id", s.scan_id},
       {"carina", s.carina ? json(*s.carina) : json(nullptr)},
       {"rois", s.rois},
       {"measurements", s.measurements},
       {"created_at", s.created_at},
       {"updated_at", s.updated_at},
       {"wt_seed", s.wt_seed}};
}

void from_json(const json& j, Session& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.scan_id = j.at("scan_id").get<std::string>();
  if (j.contains("carina") && !j.at("carina").is_null()) s.carina = j.at("carina").get<carina::CarinaResult>();
  s.rois = j.at("rois").get<std::vector<Roi>>();
  s.measurements = j.at("measurements").get<std::vector<Measurement>>();
  s.created_at = j.at("created_at").get<std::string>();
  s.updated_at = j.at("updated_at").get<std::string>();
  s.wt_seed = j.at("wt_seed").get<std::uint64_t>();
}

std::string session_to_string(const Session& s) { return json(s).dump(2) + "\n"; }

Session session_from_string(const std::string& text) {
  try {
    return json::parse(text).get<Session>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("corrupt session file: ") + e.what());
  }
}

std::uint64_t default_wt_seed() {
  if (const char* env = std::getenv("BRONCHOMETER_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "BRONCHOMETER_SEED must be an unsigned integer");
    }
  }
  return wt::kDefaultSeed;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::string random_id() {
  std::random_device rd;
  std::mt19937_64 gen((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  std::ostringstream out;
  out << std::hex << gen();
  return out.str();
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  return true;
}

}  // namespace

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path SessionStore::path_for(const std::string& session_id) const { return dir_ / (session_id + ".json"); }

bool SessionStore::exists(const std::string& session_id) const {
  return valid_id(session_id) && fs::is_regular_file(path_for(session_id));
}

std::mutex& SessionStore::lock_for(const std::string& session_id) {
  std::lock_guard guard(locks_guard_);
  auto& slot = locks_[session_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void SessionStore::commit(const Session& s) const {
  const auto target = path_for(s.session_id);
  const auto tmp = fs::path(target.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << session_to_string(s);
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

Session SessionStore::create(const std::string& scan_id, std::optional<std::uint64_t> wt_seed) {
  Session s;
  do {
    s.session_id = random_id();
  } while (exists(s.session_id));
  s.scan_id = scan_id;
  s.created_at = s.updated_at = utc_timestamp();
  s.wt_seed = wt_seed.value_or(default_wt_seed());
  std::lock_guard lock(lock_for(s.session_id));
  commit(s);
  return s;
}

Session SessionStore::get(const std::string& session_id) const {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, session_id);
  std::ifstream in(path_for(session_id), std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return session_from_string(buf.str());
}

Measurement SessionStore::measure(const std::string& session_id, Roi roi, const FrameSource& frames,
                                  const SpacingSource& spacing, const wt::WallConfig& cfg) {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, session_id);
  std::lock_guard lock(lock_for(session_id));
  Session s = get(session_id);
  if (roi.scan_id.empty()) roi.scan_id = s.scan_id;
  if (roi.scan_id != s.scan_id) throw Error(ErrorCode::InvalidArgument, "ROI scan differs from session scan");

  const Frame& frame = frames(roi.scan_id, roi.frame_index);
  const std::uint64_t seed = s.wt_seed + s.measurements.size();
  Measurement m = wt::measure_roi(frame, roi, spacing(roi.scan_id), seed, cfg);

  s.rois.push_back(roi);
  s.measurements.push_back(m);
  s.updated_at = utc_timestamp();
  commit(s);
  return m;
}

void SessionStore::set_carina(const std::string& session_id, const carina::CarinaResult& result) {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, session_id);
  std::lock_guard lock(lock_for(session_id));
  Session s = get(session_id);
  s.carina = result;
  s.updated_at = utc_timestamp();
  commit(s);
}

std::string SessionStore::export_csv(const std::string& session_id) const {
  return measurements_csv(get(session_id).measurements);
}

}  // namespace bronchometer
