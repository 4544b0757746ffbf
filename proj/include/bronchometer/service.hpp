#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bronchometer/pipeline.hpp"
#include "bronchometer/session.hpp"

namespace httplib {
class Server;
}

namespace bronchometer {

// Scan directories found under a root: every subdirectory holding a manifest.json. Volumes are
// loaded on first use and kept in memory.
class ScanRegistry {
 public:
  explicit ScanRegistry(std::filesystem::path root);

  std::vector<ScanManifest> list();
  std::shared_ptr<const ScanVolume> volume(const std::string& scan_id);

  void store_carina(const std::string& scan_id, const carina::CarinaResult& r);
  std::optional<carina::CarinaResult> carina(const std::string& scan_id);
  void store_rll(const std::string& scan_id, std::vector<rll::RllFrame> frames);
  std::shared_ptr<const std::vector<rll::RllFrame>> rll(const std::string& scan_id);

 private:
  void refresh_locked();
  std::filesystem::path dir_for_locked(const std::string& scan_id);

  std::filesystem::path root_;
  std::mutex mu_;
  std::map<std::string, std::filesystem::path> dirs_;
  std::map<std::string, std::shared_ptr<const ScanVolume>> volumes_;
  std::map<std::string, carina::CarinaResult> carina_;
  std::map<std::string, std::shared_ptr<const std::vector<rll::RllFrame>>> rll_;
};

struct ServiceConfig {
  std::filesystem::path scans_dir;
  std::filesystem::path sessions_dir;
  std::optional<std::filesystem::path> static_dir;  // built UI bundle, served at /
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int worker_threads = 8;
};

class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();

  // Binds the socket and returns the bound port.
  int bind();
  // Blocks until stop() is called.
  void listen();
  void stop();

  ScanRegistry& scans() { return scans_; }
  SessionStore& sessions() { return sessions_; }

 private:
  void routes();

  ServiceConfig cfg_;
  ScanRegistry scans_;
  SessionStore sessions_;
  std::unique_ptr<httplib::Server> server_;
};

// HTTP status for an error code: 404 for missing things, 400 for bad input, 422 otherwise.
int http_status(ErrorCode code);

}  // namespace bronchometer
