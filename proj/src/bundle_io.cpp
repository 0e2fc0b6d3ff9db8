#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "icutl/error.hpp"
#include "icutl/riskmodel.hpp"

namespace icutl::risk {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string str(const std::string& s) { return nlohmann::json(s).dump(); }

void write_array(std::ostringstream& out, const std::vector<double>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << num(values[i]);
  out << ']';
}

void write_array(std::ostringstream& out, const std::vector<std::string>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << str(values[i]);
  out << ']';
}

[[noreturn]] void violation(const std::string& msg) {
  throw Error(ErrorCode::kSchemaViolation, msg);
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) violation(where + ": missing field '" + key + "'");
  return *it;
}

double number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) violation(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) violation(where + ": non-finite number");
  return d;
}

std::vector<double> numbers(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) violation(where + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string serialize_bundle(const ModelBundle& bundle) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"bundle_id\": " << str(bundle.bundle_id) << ",\n";
  out << "  \"created_at\": " << str(bundle.created_at) << ",\n";
  out << "  \"seed\": " << bundle.seed << ",\n";
  out << "  \"horizons\": [";
  for (std::size_t h = 0; h < bundle.horizons.size(); ++h) {
    const auto& m = bundle.horizons[h];
    out << (h ? ",\n" : "\n") << "    {\n";
    out << "      \"t_hours\": " << m.t_hours << ",\n";
    out << "      \"feature_names\": ";
    write_array(out, m.feature_names);
    out << ",\n      \"means\": ";
    write_array(out, m.stats.means);
    out << ",\n      \"stds\": ";
    write_array(out, m.stats.stds);
    out << ",\n      \"weights\": ";
    write_array(out, m.weights);
    out << ",\n      \"intercept\": " << num(m.intercept) << ",\n";
    out << "      \"platt_a\": " << num(m.platt.a) << ",\n";
    out << "      \"platt_b\": " << num(m.platt.b) << ",\n";
    out << "      \"lambda\": " << num(m.lambda) << "\n";
    out << "    }";
  }
  out << (bundle.horizons.empty() ? "]\n" : "\n  ]\n");
  out << "}\n";
  return out.str();
}

ModelBundle parse_bundle(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    violation(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) violation("bundle must be a JSON object");
  ModelBundle b;
  const auto& id = field(doc, "bundle_id", "bundle");
  if (!id.is_string() || id.get<std::string>().empty()) violation("bundle_id must be a non-empty string");
  b.bundle_id = id.get<std::string>();
  const auto& created = field(doc, "created_at", "bundle");
  if (!created.is_string()) violation("created_at must be a string");
  b.created_at = created.get<std::string>();
  const auto& seed = field(doc, "seed", "bundle");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    violation("seed must be a non-negative integer");
  }
  b.seed = seed.get<std::uint64_t>();

  const auto& horizons = field(doc, "horizons", "bundle");
  if (!horizons.is_array() || horizons.empty()) violation("horizons must be a non-empty array");
  if (horizons.size() > 14) violation("at most 14 horizon models are allowed");
  int previous = 0;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const auto& hj = horizons[h];
    const std::string where = "horizons[" + std::to_string(h) + "]";
    if (!hj.is_object()) violation(where + ": expected an object");
    HorizonModel m;
    const auto& t = field(hj, "t_hours", where);
    if (!t.is_number_integer()) violation(where + ".t_hours: expected an integer");
    m.t_hours = t.get<int>();
    if (m.t_hours < features::kMinHorizonHours || m.t_hours > features::kMaxHorizonHours ||
        m.t_hours % features::kWindowHours != 0) {
      violation(where + ".t_hours: must be a multiple of 12 in [12, 168]");
    }
    if (m.t_hours <= previous) violation(where + ".t_hours: horizons must be strictly increasing");
    previous = m.t_hours;

    const auto& names = field(hj, "feature_names", where);
    if (!names.is_array()) violation(where + ".feature_names: expected an array");
    for (const auto& n : names) {
      if (!n.is_string()) violation(where + ".feature_names: expected strings");
      m.feature_names.push_back(n.get<std::string>());
    }
    m.stats.means = numbers(field(hj, "means", where), where + ".means");
    m.stats.stds = numbers(field(hj, "stds", where), where + ".stds");
    m.weights = numbers(field(hj, "weights", where), where + ".weights");
    const std::size_t d = static_cast<std::size_t>(kNumFeatures * (m.t_hours / features::kWindowHours));
    for (auto [label, size] : {std::pair{"feature_names", m.feature_names.size()},
                               std::pair{"means", m.stats.means.size()},
                               std::pair{"stds", m.stats.stds.size()},
                               std::pair{"weights", m.weights.size()}}) {
      if (size != d) {
        violation(where + "." + label + ": length " + std::to_string(size) + ", expected " +
                  std::to_string(d));
      }
    }
    for (double s : m.stats.stds) {
      if (s < 0.0) violation(where + ".stds: negative standard deviation");
    }
    m.intercept = number(field(hj, "intercept", where), where + ".intercept");
    m.platt.a = number(field(hj, "platt_a", where), where + ".platt_a");
    m.platt.b = number(field(hj, "platt_b", where), where + ".platt_b");
    m.lambda = number(field(hj, "lambda", where), where + ".lambda");
    if (!(m.lambda > 0.0)) violation(where + ".lambda: must be positive");
    b.horizons.push_back(std::move(m));
  }
  return b;
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bundle(buf.str());
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << serialize_bundle(bundle);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

std::string derive_bundle_id(const ModelBundle& bundle) {
  ModelBundle anonymous = bundle;
  anonymous.bundle_id.clear();
  anonymous.created_at.clear();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mortality-s%" PRIu64 "-%012" PRIx64, bundle.seed,
                fnv1a(serialize_bundle(anonymous)) >> 16);
  return buf;
}

nlohmann::json to_json(const EvaluationReport& report) {
  using nlohmann::json;
  json horizons = json::array();
  for (const auto& h : report.horizons) {
    json bins = json::array();
    for (const auto& b : h.calibration) {
      bins.push_back({{"count", b.count}, {"mean_pred", b.mean_pred}, {"obs_rate", b.obs_rate}});
    }
    horizons.push_back({{"auc", h.auc},
                        {"auc_ci_hi", h.ci.hi},
                        {"auc_ci_lo", h.ci.lo},
                        {"auc_decision", h.auc_raw},
                        {"bootstrap_skipped", h.ci.skipped},
                        {"calibration_bins", std::move(bins)},
                        {"hl_chi2", h.hl.chi2},
                        {"hl_dof", h.hl.dof},
                        {"hl_groups", h.hl.groups},
                        {"hl_p", h.hl.p},
                        {"n_events", h.events},
                        {"n_patients", h.n},
                        {"t_hours", h.t_hours}});
  }
  json skipped = json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"reason", s.reason}, {"t_hours", s.t_hours}});
  return {{"horizons", std::move(horizons)}, {"skipped", std::move(skipped)}};
}

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "t_hours,n,events,auc,lo,hi,hl_chi2,hl_p\n";
  for (const auto& h : report.horizons) {
    out << h.t_hours << ',' << h.n << ',' << h.events << ',' << num(h.auc) << ',' << num(h.ci.lo)
        << ',' << num(h.ci.hi) << ',' << num(h.hl.chi2) << ',' << num(h.hl.p) << '\n';
  }
  return out.str();
}

std::string report_table(const EvaluationReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%7s %7s %7s %7s %17s %9s %4s %9s\n", "t_hours", "n",
                "events", "auc", "95% CI", "hl_chi2", "dof", "hl_p");
  out << line;
  for (const auto& h : report.horizons) {
    std::snprintf(line, sizeof(line), "%7d %7zu %7zu %7.4f   [%.4f, %.4f] %9.3f %4d %9.4g\n",
                  h.t_hours, h.n, h.events, h.auc, h.ci.lo, h.ci.hi, h.hl.chi2, h.hl.dof, h.hl.p);
    out << line;
  }
  for (const auto& s : report.skipped) out << "skipped t=" << s.t_hours << "h: " << s.reason << '\n';
  return out.str();
}

}  // namespace icutl::risk
