#include "bronchometer/service.hpp"

#include <cstdio>
#include <string_view>

#include "httplib.h"

#include "bronchometer/serialize.hpp"

namespace bronchometer {

namespace fs = std::filesystem;
using nlohmann::json;

ScanRegistry::ScanRegistry(fs::path root) : root_(std::move(root)) {}

void ScanRegistry::refresh_locked() {
  dirs_.clear();
  if (!fs::is_directory(root_)) return;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory() && fs::is_regular_file(e.path() / "manifest.json")) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    try {
      dirs_.emplace(read_manifest(p / "manifest.json").scan_id, p);
    } catch (const Error&) {
      // unreadable manifests are skipped in listings
    }
  }
}

fs::path ScanRegistry::dir_for_locked(const std::string& scan_id) {
  auto it = dirs_.find(scan_id);
  if (it == dirs_.end()) {
    refresh_locked();
    it = dirs_.find(scan_id);
    if (it == dirs_.end()) throw Error(ErrorCode::ScanNotFound, scan_id);
  }
  return it->second;
}

std::vector<ScanManifest> ScanRegistry::list() {
  std::lock_guard lock(mu_);
  refresh_locked();
  std::vector<ScanManifest> out;
  for (const auto& [id, dir] : dirs_) out.push_back(read_manifest(dir / "manifest.json"));
  return out;
}

std::shared_ptr<const ScanVolume> ScanRegistry::volume(const std::string& scan_id) {
  std::lock_guard lock(mu_);
  if (auto it = volumes_.find(scan_id); it != volumes_.end()) return it->second;
  auto v = std::make_shared<const ScanVolume>(load_volume(dir_for_locked(scan_id)));
  volumes_[scan_id] = v;
  return v;
}

void ScanRegistry::store_carina(const std::string& scan_id, const carina::CarinaResult& r) {
  std::lock_guard lock(mu_);
  carina_[scan_id] = r;
}

std::optional<carina::CarinaResult> ScanRegistry::carina(const std::string& scan_id) {
  std::lock_guard lock(mu_);
  if (auto it = carina_.find(scan_id); it != carina_.end()) return it->second;
  return std::nullopt;
}

void ScanRegistry::store_rll(const std::string& scan_id, std::vector<rll::RllFrame> frames) {
  std::lock_guard lock(mu_);
  rll_[scan_id] = std::make_shared<const std::vector<rll::RllFrame>>(std::move(frames));
}

std::shared_ptr<const std::vector<rll::RllFrame>> ScanRegistry::rll(const std::string& scan_id) {
  std::lock_guard lock(mu_);
  if (auto it = rll_.find(scan_id); it != rll_.end()) return it->second;
  return nullptr;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::SessionNotFound:
    case ErrorCode::ScanNotFound:
    case ErrorCode::MissingManifest:
      return 404;
    default:
      return is_input_error(code) ? 400 : 422;
  }
}

namespace {

std::string etag_for(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "\"%016llx\"", static_cast<unsigned long long>(h));
  return buf;
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}, http_status(e.code()));
}

void send_png(const httplib::Request& req, httplib::Response& res, const Frame& f) {
  const auto bytes = encode_png(f);
  const auto tag = etag_for(bytes);
  res.set_header("ETag", tag);
  res.set_header("Cache-Control", "no-cache");
  if (req.get_header_value("If-None-Match") == tag) {
    res.status = 304;
    return;
  }
  res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

int frame_number(const std::string& s) {
  try {
    size_t used = 0;
    const int n = std::stoi(s, &used);
    if (used == s.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "bad frame number " + s);
}

// Wraps a handler so library errors become JSON error responses.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::InvalidArgument, e.what()));
    }
  };
}

PipelineConfig config_from(const json& body) {
  PipelineConfig cfg;
  if (body.contains("frame_range")) {
    const auto r = body.at("frame_range").get<std::vector<int>>();
    if (r.size() != 2) throw Error(ErrorCode::InvalidArgument, "frame_range needs [lo, hi]");
    cfg.frame_range = carina::FrameRange{r[0], r[1]};
  }
  if (body.contains("dilation")) {
    const auto d = body.at("dilation").get<std::string>();
    if (d == "on") cfg.dilation = carina::DilationMode::on;
    else if (d == "off") cfg.dilation = carina::DilationMode::off;
    else if (d == "auto") cfg.dilation = carina::DilationMode::automatic;
    else throw Error(ErrorCode::InvalidArgument, "dilation must be on, off or auto");
  }
  return cfg;
}

}  // namespace

Service::Service(ServiceConfig cfg)
    : cfg_(std::move(cfg)), scans_(cfg_.scans_dir), sessions_(cfg_.sessions_dir),
      server_(std::make_unique<httplib::Server>()) {
  const int workers = std::max(1, cfg_.worker_threads);
  server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (cfg_.port == 0) return server_->bind_to_any_port(cfg_.host);
  if (!server_->bind_to_port(cfg_.host, cfg_.port))
    throw Error(ErrorCode::Io, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
  return cfg_.port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

void Service::routes() {
  auto& s = *server_;

  s.Get("/api/scans", guarded([this](const httplib::Request&, httplib::Response& res) {
    json arr = json::array();
    for (const auto& m : scans_.list())
      arr.push_back({{"scan_id", m.scan_id},
                     {"frame_count", m.frame_count},
                     {"width", m.width},
                     {"height", m.height},
                     {"slice_thickness_mm", m.slice_thickness_mm},
                     {"pixel_spacing_mm", {m.pixel_spacing_mm.row, m.pixel_spacing_mm.col}},
                     {"window", to_string(m.window)}});
    send_json(res, arr);
  }));

  s.Get(R"(/api/scans/([^/]+)/frames/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto vol = scans_.volume(req.matches[1]);
    const int n = frame_number(req.matches[2]);
    if (n < 0 || n >= vol->frame_count())
      throw Error(ErrorCode::InvalidArgument, "frame " + std::to_string(n) + " out of range");
    send_png(req, res, vol->frames[n]);
  }));

  s.Post(R"(/api/scans/([^/]+)/carina)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const json body = body_json(req);
    PipelineConfig cfg = config_from(body);
    cfg.run_rll = false;
    const auto vol = scans_.volume(id);
    const auto out = run_pipeline(*vol, cfg);
    scans_.store_carina(id, out.carina);
    if (body.contains("session_id")) sessions_.set_carina(body.at("session_id").get<std::string>(), out.carina);
    json j = out.carina;
    j["timings_s"] = {{"s1", out.carina.timings_s.s1}, {"s2", out.carina.timings_s.s2}, {"s3", out.carina.timings_s.s3}};
    send_json(res, j);
  }));

  s.Post(R"(/api/scans/([^/]+)/rll)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const json body = body_json(req);
    const PipelineConfig cfg = config_from(body);
    const auto vol = scans_.volume(id);
    auto c = scans_.carina(id);
    if (!c) {
      PipelineConfig only = cfg;
      only.run_rll = false;
      c = run_pipeline(*vol, only).carina;
      scans_.store_carina(id, *c);
    }
    auto frames = rll::extract_rll(*vol, *c, cfg.rll_schedule(vol->manifest), cfg.rll_options);
    json arr = json::array();
    for (const auto& f : frames) arr.push_back({{"frame", f.frame_index}, {"polygon", f.polygon}});
    scans_.store_rll(id, std::move(frames));
    send_json(res, {{"carina_frame", c->carina_frame}, {"frames", arr}});
  }));

  s.Get(R"(/api/scans/([^/]+)/rll/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const int n = frame_number(req.matches[2]);
    const auto frames = scans_.rll(id);
    if (!frames) {
      scans_.volume(id);  // ScanNotFound for unknown scans
      throw Error(ErrorCode::InvalidArgument, "RLL not computed for " + id);
    }
    for (const auto& f : *frames)
      if (f.frame_index == n) return send_png(req, res, f.cropped);
    throw Error(ErrorCode::InvalidArgument, "frame " + std::to_string(n) + " has no RLL crop");
  }));

  s.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_json(req);
    const std::string scan_id = body.at("scan_id").get<std::string>();
    scans_.volume(scan_id);
    std::optional<std::uint64_t> seed;
    if (body.contains("wt_seed")) seed = body.at("wt_seed").get<std::uint64_t>();
    send_json(res, sessions_.create(scan_id, seed), 201);
  }));

  s.Get(R"(/api/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, sessions_.get(req.matches[1]));
  }));

  s.Post(R"(/api/sessions/([^/]+)/measure)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!sessions_.exists(id)) throw Error(ErrorCode::SessionNotFound, id);
    Roi roi = body_json(req).get<Roi>();
    std::shared_ptr<const ScanVolume> keep;
    auto frames = [&](const std::string& scan_id, int n) -> const Frame& {
      keep = scans_.volume(scan_id);
      if (n < 0 || n >= keep->frame_count())
        throw Error(ErrorCode::RoiOutOfBounds, "frame " + std::to_string(n) + " out of range");
      return keep->frames[n];
    };
    auto spacing = [&](const std::string& scan_id) { return scans_.volume(scan_id)->manifest.pixel_spacing_mm; };
    const Measurement m = sessions_.measure(id, roi, frames, spacing);
    json j = m;
    j["overlay"] = overlay_json(m);
    send_json(res, j);
  }));

  s.Get(R"(/api/sessions/([^/]+)/export\.csv)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(sessions_.export_csv(req.matches[1]), "text/csv");
  }));

  if (cfg_.static_dir) s.set_mount_point("/", cfg_.static_dir->string());
}

}  // namespace bronchometer
