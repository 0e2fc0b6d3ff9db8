#include "icutl/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include "icutl/cohort.hpp"
#include "icutl/timeline.hpp"
#include "icutl/vocabulary.hpp"

namespace icutl::service {
namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<std::string> param(const Request& r, const std::string& key) {
  auto it = r.query.find(key);
  if (it == r.query.end()) return std::nullopt;
  return it->second;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kParseError, "query parameter " + key + " is not a number: " + text);
  }
  return v;
}

std::int64_t parse_integer(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParseError, "query parameter " + key + " is not an integer: " + text);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::kParseError, "query parameter " + key + " must be true or false");
}

std::optional<cohort::Range> parse_range(const Request& r, const std::string& lo_key,
                                         const std::string& hi_key) {
  auto lo = param(r, lo_key);
  auto hi = param(r, hi_key);
  if (!lo && !hi) return std::nullopt;
  cohort::Range range{-std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  if (lo) range.min = parse_number(lo_key, *lo);
  if (hi) range.max = parse_number(hi_key, *hi);
  return range;
}

std::optional<std::set<std::string>> parse_set(const Request& r, const std::string& key) {
  auto v = param(r, key);
  if (!v) return std::nullopt;
  auto items = split_list(*v);
  return std::set<std::string>(items.begin(), items.end());
}

Response ok(const json& body, int status = 200) { return {status, body.dump()}; }

Response error_response(ErrorCode code, const std::string& message) {
  const int status = http_status(code);
  return {status, json{{"code", std::string(error_code_name(code))},
                       {"message", message},
                       {"status", status}}
                      .dump()};
}

// Path segments after the leading slash.
std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::int64_t parse_id(const std::string& text, ErrorCode not_found, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(not_found, std::string("unknown ") + what + " " + text);
  }
  return v;
}

bool safe_file_stem(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownAdmission:
    case ErrorCode::kUnknownSubject:
    case ErrorCode::kUnknownStay:
    case ErrorCode::kUnknownModel:
      return 404;
    case ErrorCode::kInvalidRange:
    case ErrorCode::kUnknownSeriesName:
    case ErrorCode::kSchemaViolation:
    case ErrorCode::kInvalidHorizon:
      return 422;
    case ErrorCode::kDuplicate:
      return 409;
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument:
      return 400;
    default:
      return 500;
  }
}

ServiceConfig load_config(const std::filesystem::path& file) {
  json doc;
  try {
    doc = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, "config " + file.string() + ": " + e.what());
  }
  const auto base = file.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  auto text = [&](const char* key) -> std::optional<std::string> {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorCode::kParseError, std::string("config: ") + key + " must be a string");
    return it->get<std::string>();
  };
  ServiceConfig cfg;
  auto data = text("data_dir");
  auto models = text("models_dir");
  if (!data || !models) throw Error(ErrorCode::kParseError, "config: data_dir and models_dir are required");
  cfg.data_dir = resolve(*data);
  cfg.models_dir = resolve(*models);
  if (auto addr = text("listen_addr")) {
    const auto colon = addr->rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kParseError, "config: listen_addr must be host:port");
    cfg.host = addr->substr(0, colon);
    cfg.port = static_cast<int>(parse_integer("listen_addr", addr->substr(colon + 1)));
  }
  if (auto assets = text("static_assets_dir")) cfg.static_assets_dir = resolve(*assets);
  return cfg;
}

Service::Service(std::shared_ptr<const Datastore> store, std::filesystem::path models_dir)
    : store_(std::move(store)), models_dir_(std::move(models_dir)) {
  std::filesystem::create_directories(models_dir_);
  auto set = std::make_shared<BundleSet>();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(models_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto bundle = std::make_shared<risk::ModelBundle>(risk::load_bundle(f));
    const std::string id = bundle->bundle_id;
    if (!set->bundles.emplace(id, std::move(bundle)).second) {
      throw Error(ErrorCode::kDuplicate, "bundle id " + id + " appears twice in " + models_dir_.string());
    }
  }
  bundles_ = std::move(set);
}

std::shared_ptr<const BundleSet> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return bundles_;
}

std::string Service::import_bundle(std::string_view json_text) const {
  auto bundle = std::make_shared<risk::ModelBundle>(risk::parse_bundle(json_text));
  const std::string id = bundle->bundle_id;
  if (!safe_file_stem(id)) {
    throw Error(ErrorCode::kSchemaViolation,
                "bundle_id may only contain letters, digits, '-', '_' and '.'");
  }
  std::lock_guard import_lock(import_mutex_);
  auto current = snapshot();
  if (current->bundles.count(id)) throw Error(ErrorCode::kDuplicate, "bundle " + id + " already loaded");
  const auto file = models_dir_ / (id + ".json");
  if (std::filesystem::exists(file)) throw Error(ErrorCode::kDuplicate, "bundle file " + file.string() + " exists");
  risk::save_bundle(*bundle, file);
  auto next = std::make_shared<BundleSet>(*current);
  next->bundles.emplace(id, std::move(bundle));
  std::lock_guard lock(snapshot_mutex_);
  bundles_ = std::move(next);
  return id;
}

Response Service::handle(const Request& request) const {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return {500, json{{"code", "Internal"}, {"message", e.what()}, {"status", 500}}.dump()};
  }
}

Response Service::route(const Request& r) const {
  const auto seg = segments(r.path);
  const bool get = r.method == "GET";
  if (seg.size() < 2 || seg[0] != "api") return {404, json{{"code", "NotFound"}, {"message", "no route " + r.path}, {"status", 404}}.dump()};
  if (seg[1] == "admissions") {
    if (seg.size() == 2 && get) return list_admissions(r);
    if (seg.size() == 4 && seg[3] == "timeline" && get) return get_timeline(seg[2], r);
  } else if (seg[1] == "subjects" && seg.size() == 3 && get) {
    return get_subject(seg[2]);
  } else if (seg[1] == "catalog" && seg.size() == 3 && seg[2] == "series" && get) {
    return ok(timeline::to_json(timeline::series_catalog(*store_)));
  } else if (seg[1] == "models") {
    if (seg.size() == 2 && get) return list_models();
    if (seg.size() == 2 && r.method == "POST") return ok(json{{"bundle_id", import_bundle(r.body)}}, 201);
    if (seg.size() == 4 && seg[3] == "metrics" && get) return model_metrics(seg[2]);
  }
  return {404, json{{"code", "NotFound"}, {"message", "no route " + r.method + " " + r.path}, {"status", 404}}.dump()};
}

Response Service::list_admissions(const Request& r) const {
  cohort::FilterSpec spec;
  spec.primary_icd9 = parse_set(r, "icd9");
  spec.intervention_labels = parse_set(r, "interventions");
  spec.services = parse_set(r, "services");
  spec.age_range = parse_range(r, "age_min", "age_max");
  spec.los_range = parse_range(r, "los_min", "los_max");
  if (auto g = param(r, "gender")) {
    auto gender = parse_gender(*g);
    if (!gender) throw Error(ErrorCode::kParseError, "gender must be M or F");
    spec.gender = *gender;
  }
  if (auto d = param(r, "died")) spec.died_in_hospital = parse_bool("died", *d);
  std::int64_t limit = 100, offset = 0;
  if (auto v = param(r, "limit")) limit = parse_integer("limit", *v);
  if (auto v = param(r, "offset")) offset = parse_integer("offset", *v);
  if (limit < 0 || offset < 0) throw Error(ErrorCode::kInvalidRange, "limit and offset must be non-negative");
  spec.validate();

  const auto ids = cohort::apply_filters(*store_, spec);
  json items = json::array();
  const auto begin = std::min<std::size_t>(static_cast<std::size_t>(offset), ids.size());
  const auto end = std::min<std::size_t>(begin + static_cast<std::size_t>(limit), ids.size());
  for (std::size_t i = begin; i < end; ++i) {
    const auto* a = store_->find_admission(ids[i]);
    const auto* p = store_->find_patient(a->subject_id);
    items.push_back({{"admission_diagnosis", a->admission_diagnosis},
                     {"age", cohort::age_at_admission(p->dob, a->admittime)},
                     {"died", a->deathtime.has_value()},
                     {"gender", gender_code(p->gender)},
                     {"hadm_id", a->hadm_id},
                     {"los_days", cohort::length_of_stay_days(*a)},
                     {"subject_id", a->subject_id}});
  }
  return ok({{"items", std::move(items)}, {"limit", limit}, {"offset", offset}, {"total", ids.size()}});
}

Response Service::get_subject(const std::string& id_text) const {
  const auto id = parse_id(id_text, ErrorCode::kUnknownSubject, "subject_id");
  const auto* p = store_->find_patient(id);
  if (!p) throw Error(ErrorCode::kUnknownSubject, "unknown subject_id " + id_text);
  json admissions = json::array();
  for (const auto& a : store_->admissions_for_subject(id)) {
    admissions.push_back({{"admission_diagnosis", a.admission_diagnosis},
                          {"admittime", format_timestamp(a.admittime)},
                          {"age", cohort::age_at_admission(p->dob, a.admittime)},
                          {"died", a.deathtime.has_value()},
                          {"dischtime", format_timestamp(a.dischtime)},
                          {"hadm_id", a.hadm_id},
                          {"los_days", cohort::length_of_stay_days(a)}});
  }
  json attributes = {{"dob", format_timestamp(p->dob)},
                     {"gender", gender_code(p->gender)},
                     {"subject_id", p->subject_id}};
  attributes["dod"] = p->dod ? json(format_timestamp(*p->dod)) : json(nullptr);
  return ok({{"admissions", std::move(admissions)}, {"attributes", std::move(attributes)}});
}

Response Service::get_timeline(const std::string& id_text, const Request& r) const {
  const auto hadm = parse_id(id_text, ErrorCode::kUnknownAdmission, "hadm_id");
  if (!store_->find_admission(hadm)) throw Error(ErrorCode::kUnknownAdmission, "unknown hadm_id " + id_text);

  std::set<std::string> selected;
  if (auto s = param(r, "series")) {
    for (auto& name : split_list(*s)) selected.insert(name);
  }
  std::set<std::string> known;
  for (auto n : known_series_names()) known.emplace(n);
  for (auto& n : store_->item_names()) known.insert(n);
  std::vector<std::string> unknown;
  for (const auto& n : selected) {
    if (!known.count(n)) unknown.push_back(n);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& n : unknown) list += (list.empty() ? "" : ",") + n;
    throw Error(ErrorCode::kUnknownSeriesName, "unknown series: " + list);
  }

  auto doc = timeline::assemble_timeline(*store_, hadm, selected);
  const auto stays = store_->stays_for_admission(hadm);
  const auto set = snapshot();
  for (const auto& [id, bundle] : set->bundles) {
    if (stays.empty()) {
      doc.risk_series.push_back({id, {}});
    } else {
      doc.risk_series.push_back(risk::risk_timeline(*bundle, *store_, stays.front().icustay_id));
    }
  }
  return ok(timeline::to_json(doc));
}

Response Service::list_models() const {
  json models = json::array();
  const auto set = snapshot();
  for (const auto& [id, bundle] : set->bundles) {
    json horizons = json::array();
    for (const auto& h : bundle->horizons) horizons.push_back(h.t_hours);
    models.push_back({{"bundle_id", id},
                      {"created_at", bundle->created_at},
                      {"horizons", std::move(horizons)},
                      {"seed", bundle->seed}});
  }
  return ok({{"models", std::move(models)}});
}

Response Service::model_metrics(const std::string& id) const {
  auto set = snapshot();
  auto it = set->bundles.find(id);
  if (it == set->bundles.end()) throw Error(ErrorCode::kUnknownModel, "unknown model " + id);
  {
    std::lock_guard lock(metrics_mutex_);
    if (auto c = metrics_cache_.find(id); c != metrics_cache_.end()) return {200, c->second};
  }
  // Held-out rows of the loaded dataset, reconstructed from the bundle seed.
  const auto report = risk::evaluate_bundle(*store_, *it->second, risk::TrainConfig{}, false);
  auto body = risk::to_json(report).dump();
  std::lock_guard lock(metrics_mutex_);
  metrics_cache_.emplace(id, body);
  return {200, body};
}

void run_server(const ServiceConfig& config) {
  auto store = std::make_shared<const Datastore>(Datastore::ingest(config.data_dir));
  Service service(store, config.models_dir);

  httplib::Server server;
  auto adapt = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.body = req.body;
    auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server.Get(R"(/api/.*)", adapt);
  server.Post(R"(/api/.*)", adapt);
  if (config.static_assets_dir) {
    if (!server.set_mount_point("/", config.static_assets_dir->string())) {
      throw Error(ErrorCode::kIoError, "static assets directory not found: " +
                                           config.static_assets_dir->string());
    }
  }
  if (!server.listen(config.host, config.port)) {
    throw Error(ErrorCode::kIoError, "cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
}

}  // namespace icutl::service
