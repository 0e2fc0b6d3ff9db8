#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "icutl/datastore.hpp"
#include "icutl/matrix.hpp"
#include "icutl/vocabulary.hpp"

namespace icutl::features {

inline constexpr int kWindowHours = 12;
inline constexpr int kPredictionGapHours = 12;
inline constexpr int kMinHorizonHours = 12;
inline constexpr int kMaxHorizonHours = 168;
inline constexpr double kMinAgeYears = 15.0;
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// 12, 24, ..., 168.
std::vector<int> all_horizons();

// Throws InvalidHorizon unless t is a multiple of 12 in [12, 168].
void check_horizon(int t_hours);

struct FeatureSpec {
  std::vector<std::string> names;

  // The 29 model features in their fixed order.
  static FeatureSpec standard();
  std::size_t size() const { return names.size(); }
  std::size_t dim(int t_hours) const { return names.size() * (t_hours / kWindowHours); }
};

struct CohortMember {
  StayId icustay_id = 0;
  int label = 0;
};

// First ICU stay of each patient aged over 15, lasting at least t hours,
// whose hospital stay continues past intime + t + 12h. Label is in-hospital
// death (necessarily at or after that cutoff). Ascending icustay_id.
std::vector<CohortMember> build_cohort(const Datastore& store, int t_hours);

// Per-window means for the first t hours of a stay, window-major, NaN where
// a feature has no value in a window. Chart values take precedence over lab
// values within a window. Throws StayTooShort / UnknownStay.
std::vector<double> extract_features(const Datastore& store, StayId icustay_id, int t_hours,
                                     const FeatureSpec& spec);

// Column statistics of the imputed training matrix.
struct ColumnStats {
  std::vector<double> means;
  std::vector<double> stds;
};

// Columns whose training std falls below this are zeroed.
inline constexpr double kMinStd = 1e-12;

// Forward-fills each feature from the previous window of the same row.
void forward_fill(std::span<double> row, std::size_t n_features);

// Training statistics from raw rows: means over observed (post forward-fill)
// entries, stds (population) after mean imputation. Fully missing columns
// get mean 0, std 0.
ColumnStats fit_column_stats(const Matrix& raw, std::size_t n_features);

// Forward-fill, mean-impute and z-score one raw row. This is the single
// path used for both training rows and served rows.
std::vector<double> standardize_row(std::span<const double> raw, const ColumnStats& stats,
                                    std::size_t n_features);

struct Standardized {
  Matrix matrix;
  ColumnStats stats;
};

// Fits stats on `raw` unless `stats` is supplied, then standardizes every
// row. Throws EmptyInput / DimensionMismatch.
Standardized impute_and_standardize(const Matrix& raw, const ColumnStats* stats,
                                    std::size_t n_features = kNumFeatures);

// `icustay_id,label,f_0,...,f_{d-1}`.
void write_feature_csv(const std::filesystem::path& path, std::span<const CohortMember> rows,
                       const Matrix& matrix);

}  // namespace icutl::features
