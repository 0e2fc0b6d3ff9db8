// icutl command-line entry point.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "icutl/datastore.hpp"
#include "icutl/error.hpp"
#include "icutl/kernels.hpp"
#include "icutl/riskmodel.hpp"
#include "icutl/service.hpp"
#include "icutl/synthgen.hpp"

namespace {

using namespace icutl;

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
}

// --created-at, else SOURCE_DATE_EPOCH, else the epoch, so repeated runs
// produce identical bundles.
std::string resolve_created_at(const std::string& flag) {
  if (!flag.empty()) {
    if (!parse_timestamp(flag)) throw Error(ErrorCode::kInvalidArgument, "bad --created-at " + flag);
    return flag;
  }
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long secs = std::strtoll(env, &end, 10);
    if (end && *end == '\0') return format_timestamp(Timestamp{secs});
  }
  return format_timestamp(Timestamp{0});
}

void print_counts(const std::vector<std::pair<std::string, std::size_t>>& counts) {
  for (const auto& [table, n] : counts) std::printf("%-14s %zu\n", table.c_str(), n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ICU patient timelines and horizon mortality models"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: runtime setting)");

  synth::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--patients", synth_cfg.n_patients, "Number of patients");
  synth_cmd->add_option("--seed", synth_cfg.seed, "Random seed");
  synth_cmd->add_option("--mortality", synth_cfg.mortality_base_rate, "Base in-hospital mortality");
  synth_cmd->add_option("--signal", synth_cfg.signal_strength, "Signal strength (0 = null)");
  synth_cmd->add_option("--mean-los-hours", synth_cfg.mean_icu_los_hours, "Mean ICU length of stay");
  synth_cmd->add_option("--note-rate", synth_cfg.note_rate_per_day, "Notes per day");
  synth_cmd->add_flag("--case-study", synth_cfg.include_case_study, "Append the case-study patient");

  std::string ingest_dir;
  bool ingest_check = false;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load and validate a dataset");
  ingest_cmd->add_option("--data", ingest_dir, "Dataset directory")->required();
  ingest_cmd->add_flag("--check", ingest_check, "Only validate; print ok on success");

  risk::TrainConfig train_cfg;
  std::string train_data, train_out, created_at, train_json, train_csv;
  std::vector<int> train_horizons;
  auto* train_cmd = app.add_subcommand("train", "Train the horizon models");
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_out, "Bundle output path")->required();
  train_cmd->add_option("--seed", train_cfg.seed, "Random seed");
  train_cmd->add_option("--horizons", train_horizons, "Subset of horizons in hours")->delimiter(',');
  train_cmd->add_option("--created-at", created_at, "Bundle timestamp YYYY-MM-DDTHH:MM:SS");
  train_cmd->add_option("--report-json", train_json, "Write the held-out report as JSON");
  train_cmd->add_option("--report-csv", train_csv, "Write the held-out report as CSV");

  std::string eval_bundle, eval_data, eval_json, eval_csv, eval_dump;
  bool eval_all = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a bundle on a dataset");
  eval_cmd->add_option("--bundle", eval_bundle, "Bundle path")->required();
  eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
  eval_cmd->add_option("--json", eval_json, "Write report JSON (- for stdout)");
  eval_cmd->add_option("--csv", eval_csv, "Write per-horizon CSV (- for stdout)");
  eval_cmd->add_option("--dump-features", eval_dump, "Write raw feature CSVs into this directory");
  eval_cmd->add_flag("--all", eval_all, "Evaluate every cohort row instead of the held-out split");

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--config", config_path, "Service config JSON (default $ICUTL_CONFIG)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*synth_cmd) {
      const auto summary = synth::generate(synth_cfg, synth_out);
      print_counts(summary.table_counts);
      std::printf("admissions     %zu\ndeaths         %zu\n", summary.admissions, summary.deaths);
    } else if (*ingest_cmd) {
      const auto store = Datastore::ingest(ingest_dir);
      if (ingest_check) {
        std::puts("ok");
      } else {
        print_counts(store.table_counts());
      }
    } else if (*train_cmd) {
      const auto store = Datastore::ingest(train_data);
      if (!train_horizons.empty()) train_cfg.horizons = train_horizons;
      auto result = risk::train_all_horizons(store, train_cfg);
      result.bundle.created_at = resolve_created_at(created_at);
      risk::save_bundle(result.bundle, train_out);
      if (!train_json.empty()) write_text(train_json, risk::to_json(result.report).dump(2) + "\n");
      if (!train_csv.empty()) write_text(train_csv, risk::report_csv(result.report));
      std::printf("bundle %s: %zu horizon models -> %s\n", result.bundle.bundle_id.c_str(),
                  result.bundle.horizons.size(), train_out.c_str());
      std::fputs(risk::report_table(result.report).c_str(), stdout);
    } else if (*eval_cmd) {
      const auto bundle = risk::load_bundle(eval_bundle);
      const auto store = Datastore::ingest(eval_data);
      const risk::TrainConfig cfg;
      const auto report = risk::evaluate_bundle(store, bundle, cfg, eval_all);
      if (!eval_dump.empty()) {
        std::filesystem::create_directories(eval_dump);
        const auto spec = features::FeatureSpec::standard();
        for (const auto& m : bundle.horizons) {
          const auto rows =
              risk::evaluation_rows(store, bundle, m.t_hours, cfg.train_fraction, eval_all);
          const auto raw = kernels::parallel::feature_matrix(store, rows, m.t_hours, spec);
          char name[32];
          std::snprintf(name, sizeof(name), "features_t%03d.csv", m.t_hours);
          features::write_feature_csv(std::filesystem::path(eval_dump) / name, rows, raw);
        }
      }
      if (!eval_json.empty()) write_text(eval_json, risk::to_json(report).dump(2) + "\n");
      if (!eval_csv.empty()) write_text(eval_csv, risk::report_csv(report));
      if (eval_json != "-" && eval_csv != "-") std::fputs(risk::report_table(report).c_str(), stdout);
    } else if (*serve_cmd) {
      if (config_path.empty()) {
        if (const char* env = std::getenv("ICUTL_CONFIG")) config_path = env;
      }
      if (config_path.empty()) throw Error(ErrorCode::kInvalidArgument, "serve needs --config or ICUTL_CONFIG");
      const auto cfg = service::load_config(config_path);
      std::fprintf(stderr, "listening on %s:%d\n", cfg.host.c_str(), cfg.port);
      service::run_server(cfg);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(e.code_name()).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
