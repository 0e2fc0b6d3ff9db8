#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "icutl/datastore.hpp"
#include "icutl/rng.hpp"

namespace icutl::synth {

// Signal strength used for the "strong" learnability preset.
inline constexpr double kStrongSignal = 1.0;

struct SynthConfig {
  std::int64_t n_patients = 100;
  std::uint64_t seed = 0;
  double mortality_base_rate = 0.15;
  double signal_strength = kStrongSignal;
  double mean_icu_los_hours = 72.0;
  double note_rate_per_day = 4.0;
  // Appends the fixed case-study admission (see case_study_ids()).
  bool include_case_study = false;

  void validate() const;
};

// AR(1) latent severity: s0 = mu, s[k+1] = mu + phi (s[k] - mu) + sigma e[k].
struct SeverityParams {
  double phi = 0.97;
  double sigma = 0.15;
  double mu = 0.0;
};

std::vector<double> severity_trajectory(const SeverityParams& params, int horizon_steps, Rng& rng);

struct CaseStudyIds {
  SubjectId subject_id;
  AdmissionId hadm_id;
  StayId icustay_id;
};
constexpr CaseStudyIds case_study_ids() { return {900000000, 900000001, 900000002}; }

// Per-table row counts of one generated dataset.
struct GenerationSummary {
  std::vector<std::pair<std::string, std::size_t>> table_counts;
  std::size_t admissions = 0;
  std::size_t deaths = 0;
};

// Writes the ten CSV tables into `out_dir` (created if needed). Output is a
// pure function of `config`.
GenerationSummary generate(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace icutl::synth
