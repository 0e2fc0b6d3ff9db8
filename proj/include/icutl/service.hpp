#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "icutl/datastore.hpp"
#include "icutl/error.hpp"
#include "icutl/riskmodel.hpp"

namespace icutl::service {

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::filesystem::path models_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> static_assets_dir;
};

// JSON config: {"data_dir", "models_dir", "listen_addr": "host:port",
// "static_assets_dir"}. Relative paths resolve against the config file.
ServiceConfig load_config(const std::filesystem::path& file);

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
};

int http_status(ErrorCode code);

// Immutable set of loaded bundles, ordered by bundle_id.
struct BundleSet {
  std::map<std::string, std::shared_ptr<const risk::ModelBundle>> bundles;
};

// Request handling independent of the HTTP transport. handle() is safe to
// call from many threads; imports swap the bundle-set snapshot under a lock.
class Service {
 public:
  // Loads every *.json bundle found in models_dir (created if missing).
  Service(std::shared_ptr<const Datastore> store, std::filesystem::path models_dir);

  Response handle(const Request& request) const;

  std::shared_ptr<const BundleSet> snapshot() const;

  // Validates, persists and publishes a bundle. Throws SchemaViolation /
  // Duplicate.
  std::string import_bundle(std::string_view json_text) const;

  const Datastore& store() const { return *store_; }

 private:
  Response route(const Request& request) const;
  Response list_admissions(const Request& request) const;
  Response get_subject(const std::string& id) const;
  Response get_timeline(const std::string& id, const Request& request) const;
  Response list_models() const;
  Response model_metrics(const std::string& id) const;

  std::shared_ptr<const Datastore> store_;
  std::filesystem::path models_dir_;
  mutable std::mutex snapshot_mutex_;
  mutable std::shared_ptr<const BundleSet> bundles_;
  mutable std::mutex import_mutex_;
  mutable std::mutex metrics_mutex_;
  mutable std::map<std::string, std::string> metrics_cache_;
};

// Serves the API (and static assets) until the process is stopped.
void run_server(const ServiceConfig& config);

}  // namespace icutl::service
