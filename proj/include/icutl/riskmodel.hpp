#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icutl/datastore.hpp"
#include "icutl/features.hpp"
#include "icutl/matrix.hpp"
#include "icutl/metrics.hpp"
#include "icutl/timeline.hpp"

#include <nlohmann/json.hpp>

namespace icutl::risk {

struct SolverOptions {
  int max_iter = 10000;
  // Stop once the largest absolute gradient component falls below this.
  double grad_tol = 1e-6;
  // Number of correction pairs kept by L-BFGS.
  int history = 10;
};

struct LogRegFit {
  std::vector<double> w;
  double b = 0.0;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double grad_norm_inf = 0.0;
};

// Penalized objective sum_i c_i CE_i + lambda/2 |w|^2 (intercept unpenalized),
// with c_i = pos_weight for positives. Gradient goes to grad (length d + 1).
double objective(const Matrix& x, std::span<const int> y, double lambda, double pos_weight,
                 std::span<const double> w, double b, std::span<double> grad);

// N- / N+ of the labels. Throws SingleClass.
double balanced_pos_weight(std::span<const int> y);

// L-BFGS with Armijo backtracking, started from `warm` when given.
LogRegFit train_logreg(const Matrix& x, std::span<const int> y, double lambda, double pos_weight,
                       const SolverOptions& opts = {}, const LogRegFit* warm = nullptr);

struct Platt {
  double a = 0.0;
  double b = 0.0;
  double operator()(double z) const;
};

// Platt scaling p = 1 / (1 + exp(a z + b)) fitted on smoothed targets
// (N+ + 1) / (N+ + 2) and 1 / (N- + 2). A fit with a > 0 is replaced by
// a = 0 and the constant that matches the mean target.
Platt fit_platt(std::span<const double> z, std::span<const int> y);

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return grid;
}

// Round-robin fold assignment within each class after a seeded shuffle.
std::vector<int> stratified_folds(std::span<const int> y, int k, std::uint64_t seed);

struct TrainConfig {
  std::uint64_t seed = 0;
  std::vector<int> horizons = features::all_horizons();
  std::vector<double> lambda_grid = default_lambda_grid();
  int cv_folds = 5;
  double train_fraction = 0.7;
  std::size_t bootstrap_resamples = metrics::kDefaultResamples;
  SolverOptions solver;
};

struct LambdaSelection {
  double lambda = 0.0;
  // Mean out-of-fold AUC for each grid value, in grid order.
  std::vector<double> mean_auc;
  // Out-of-fold decision scores at the chosen lambda.
  std::vector<double> oof_scores;
};

// k-fold CV over the grid; the largest mean fold AUC wins, ties go to the
// smaller lambda.
LambdaSelection select_lambda(const Matrix& x, std::span<const int> y, const TrainConfig& cfg,
                              std::uint64_t fold_seed);

struct HorizonModel {
  int t_hours = 0;
  std::vector<std::string> feature_names;
  features::ColumnStats stats;
  std::vector<double> weights;
  double intercept = 0.0;
  Platt platt;
  double lambda = 0.0;
};

struct Prediction {
  double score = 0.0;
  double probability = 0.0;
};

// Scores one raw (unimputed) feature row. Throws DimensionMismatch.
Prediction predict_score(const HorizonModel& model, std::span<const double> raw_row);

struct ModelBundle {
  std::string bundle_id;
  std::string created_at;
  std::uint64_t seed = 0;
  std::vector<HorizonModel> horizons;

  const HorizonModel* find(int t_hours) const;
};

struct HorizonEvaluation {
  int t_hours = 0;
  std::size_t n = 0;
  std::size_t events = 0;
  double auc = 0.0;
  double auc_raw = 0.0;
  metrics::ConfidenceInterval ci;
  std::vector<metrics::CalibrationBin> calibration;
  metrics::HosmerLemeshowResult hl;
};

struct SkippedHorizon {
  int t_hours = 0;
  std::string reason;
};

struct EvaluationReport {
  std::vector<HorizonEvaluation> horizons;
  std::vector<SkippedHorizon> skipped;
};

struct TrainResult {
  ModelBundle bundle;
  EvaluationReport report;
};

// Stratified train / held-out split of cohort rows, both index lists
// ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split stratified_split(std::span<const int> y, double train_fraction, std::uint64_t seed);

// Seeds derived from the bundle seed for each horizon.
std::uint64_t split_seed(std::uint64_t seed, int t_hours);
std::uint64_t fold_seed(std::uint64_t seed, int t_hours);
std::uint64_t bootstrap_seed(std::uint64_t seed, int t_hours);

TrainResult train_all_horizons(const Datastore& store, const TrainConfig& cfg);

// Rows the bundle's training run held out at horizon t (or every cohort row
// when all_rows is set).
std::vector<features::CohortMember> evaluation_rows(const Datastore& store,
                                                    const ModelBundle& bundle, int t_hours,
                                                    double train_fraction, bool all_rows);

HorizonEvaluation evaluate_rows(int t_hours, std::span<const double> scores,
                                std::span<const double> probs, std::span<const int> labels,
                                std::size_t resamples, std::uint64_t seed);

// Re-scores each bundle horizon on the held-out rows of `store`.
EvaluationReport evaluate_bundle(const Datastore& store, const ModelBundle& bundle,
                                 const TrainConfig& cfg, bool all_rows);

// Risk trajectory for an ICU stay: one point at intime + t for each bundle
// horizon t the stay has reached.
timeline::RiskSeries risk_timeline(const ModelBundle& bundle, const Datastore& store,
                                   StayId icustay_id);

// Bundle serialization. Doubles are written with 17 significant digits so a
// round trip reproduces them exactly. parse_bundle throws SchemaViolation.
std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle parse_bundle(std::string_view text);
ModelBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);

// Deterministic id derived from the seed and the serialized horizons.
std::string derive_bundle_id(const ModelBundle& bundle);

nlohmann::json to_json(const EvaluationReport& report);
std::string report_csv(const EvaluationReport& report);
std::string report_table(const EvaluationReport& report);

}  // namespace icutl::risk
