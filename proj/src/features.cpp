#include "icutl/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "icutl/cohort.hpp"
#include "icutl/csv.hpp"
#include "icutl/error.hpp"
#include "icutl/vocabulary.hpp"

namespace icutl::features {

std::vector<int> all_horizons() {
  std::vector<int> out;
  for (int t = kMinHorizonHours; t <= kMaxHorizonHours; t += kWindowHours) out.push_back(t);
  return out;
}

void check_horizon(int t_hours) {
  if (t_hours < kMinHorizonHours || t_hours > kMaxHorizonHours || t_hours % kWindowHours != 0) {
    throw Error(ErrorCode::kInvalidHorizon,
                "horizon " + std::to_string(t_hours) + "h is not a multiple of 12 in [12, 168]");
  }
}

FeatureSpec FeatureSpec::standard() {
  FeatureSpec spec;
  for (auto name : kFeatureNames) spec.names.emplace_back(name);
  return spec;
}

std::vector<CohortMember> build_cohort(const Datastore& store, int t_hours) {
  check_horizon(t_hours);
  std::unordered_map<SubjectId, const IcuStay*> first_stay;
  for (const auto& s : store.icustays()) {
    auto [it, inserted] = first_stay.emplace(s.subject_id, &s);
    if (!inserted && std::tie(s.intime, s.icustay_id) <
                         std::tie(it->second->intime, it->second->icustay_id)) {
      it->second = &s;
    }
  }
  std::vector<CohortMember> out;
  for (const auto& [subject, stay] : first_stay) {
    const auto* a = store.find_admission(stay->hadm_id);
    const auto* p = store.find_patient(subject);
    if (cohort::age_at_admission(p->dob, a->admittime) <= kMinAgeYears) continue;
    if (hours_between(stay->intime, stay->outtime) < t_hours) continue;
    const Timestamp cutoff =
        stay->intime.plus_seconds((t_hours + kPredictionGapHours) * kSecondsPerHour);
    if (a->dischtime < cutoff) continue;
    if (a->deathtime && *a->deathtime < cutoff) continue;
    out.push_back({stay->icustay_id, a->deathtime ? 1 : 0});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.icustay_id < y.icustay_id; });
  return out;
}

std::vector<double> extract_features(const Datastore& store, StayId icustay_id, int t_hours,
                                     const FeatureSpec& spec) {
  check_horizon(t_hours);
  const auto* stay = store.find_stay(icustay_id);
  if (!stay) throw Error(ErrorCode::kUnknownStay, "unknown icustay_id " + std::to_string(icustay_id));
  if (hours_between(stay->intime, stay->outtime) < t_hours) {
    throw Error(ErrorCode::kStayTooShort, "icustay " + std::to_string(icustay_id) +
                                              " shorter than " + std::to_string(t_hours) + "h");
  }
  const std::size_t n_features = spec.size();
  const std::size_t n_windows = static_cast<std::size_t>(t_hours / kWindowHours);

  // Symbol -> feature slot, -1 for items not in the feature list.
  std::unordered_map<Symbol, std::size_t> slot;
  for (std::size_t f = 0; f < n_features; ++f) {
    if (auto s = store.find_symbol(spec.names[f])) slot.emplace(*s, f);
  }

  const std::int64_t start = stay->intime.seconds;
  const std::int64_t window_seconds = kWindowHours * kSecondsPerHour;
  const std::int64_t end = start + static_cast<std::int64_t>(n_windows) * window_seconds;
  std::vector<double> chart_sum(n_windows * n_features, 0.0), lab_sum(chart_sum);
  std::vector<int> chart_n(chart_sum.size(), 0), lab_n(chart_sum.size(), 0);

  auto accumulate = [&](Timestamp t, Symbol item, double value, std::vector<double>& sum,
                        std::vector<int>& count) {
    if (t.seconds < start || t.seconds >= end) return;
    auto it = slot.find(item);
    if (it == slot.end()) return;
    const auto w = static_cast<std::size_t>((t.seconds - start) / window_seconds);
    const auto k = w * n_features + it->second;
    sum[k] += value;
    ++count[k];
  };
  for (const auto& e : store.chart_events_for_stay(icustay_id)) {
    accumulate(e.charttime, e.item, e.value, chart_sum, chart_n);
  }
  for (const auto& e : store.lab_events_for_admission(stay->hadm_id)) {
    accumulate(e.charttime, e.item, e.value, lab_sum, lab_n);
  }

  std::vector<double> out(chart_sum.size(), kMissing);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (chart_n[k] > 0) {
      out[k] = chart_sum[k] / chart_n[k];
    } else if (lab_n[k] > 0) {
      out[k] = lab_sum[k] / lab_n[k];
    }
  }
  return out;
}

void forward_fill(std::span<double> row, std::size_t n_features) {
  for (std::size_t k = n_features; k < row.size(); ++k) {
    if (std::isnan(row[k])) row[k] = row[k - n_features];
  }
}

ColumnStats fit_column_stats(const Matrix& raw, std::size_t n_features) {
  if (raw.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no rows to fit column statistics");
  const std::size_t d = raw.cols();
  std::vector<double> sum(d, 0.0);
  std::vector<std::size_t> count(d, 0);
  Matrix filled = raw;
  for (std::size_t r = 0; r < filled.rows(); ++r) {
    auto row = filled.row(r);
    forward_fill(row, n_features);
    for (std::size_t c = 0; c < d; ++c) {
      if (!std::isnan(row[c])) {
        sum[c] += row[c];
        ++count[c];
      }
    }
  }
  ColumnStats stats;
  stats.means.resize(d);
  stats.stds.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    stats.means[c] = count[c] ? sum[c] / static_cast<double>(count[c]) : 0.0;
  }
  std::vector<double> sq(d, 0.0);
  for (std::size_t r = 0; r < filled.rows(); ++r) {
    auto row = filled.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      if (!count[c]) continue;
      const double v = std::isnan(row[c]) ? stats.means[c] : row[c];
      sq[c] += (v - stats.means[c]) * (v - stats.means[c]);
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    stats.stds[c] = std::sqrt(sq[c] / static_cast<double>(filled.rows()));
  }
  return stats;
}

std::vector<double> standardize_row(std::span<const double> raw, const ColumnStats& stats,
                                    std::size_t n_features) {
  if (raw.size() != stats.means.size() || raw.size() != stats.stds.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row length " + std::to_string(raw.size()) + " vs statistics length " +
                    std::to_string(stats.means.size()));
  }
  std::vector<double> out(raw.begin(), raw.end());
  forward_fill(out, n_features);
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (std::isnan(out[c])) out[c] = stats.means[c];
    out[c] = stats.stds[c] < kMinStd ? 0.0 : (out[c] - stats.means[c]) / stats.stds[c];
  }
  return out;
}

Standardized impute_and_standardize(const Matrix& raw, const ColumnStats* stats,
                                    std::size_t n_features) {
  if (raw.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no rows to standardize");
  Standardized out;
  out.stats = stats ? *stats : fit_column_stats(raw, n_features);
  out.matrix = Matrix(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const auto row = standardize_row(raw.row(r), out.stats, n_features);
    std::copy(row.begin(), row.end(), out.matrix.row(r).begin());
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path, std::span<const CohortMember> rows,
                       const Matrix& matrix) {
  if (rows.size() != matrix.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "cohort and matrix row counts differ");
  }
  csv::Writer w(path);
  std::vector<std::string> header = {"icustay_id", "label"};
  for (std::size_t c = 0; c < matrix.cols(); ++c) header.push_back("f_" + std::to_string(c));
  w.row(header);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> fields = {std::to_string(rows[r].icustay_id),
                                       std::to_string(rows[r].label)};
    for (double v : matrix.row(r)) fields.push_back(csv::format_double(v));
    w.row(fields);
  }
}

}  // namespace icutl::features
