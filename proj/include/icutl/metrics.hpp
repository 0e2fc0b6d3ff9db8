#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace icutl::metrics {

// Mann-Whitney AUC: P(s+ > s-) + 0.5 P(s+ = s-). Throws SingleClass.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  // Resamples dropped after 10 single-class redraws.
  std::size_t skipped = 0;
};

inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr int kMaxRedraws = 10;

// Percentile bootstrap (2.5 / 97.5) over rows. Resample r draws from its own
// stream (seed, r), so the interval does not depend on thread scheduling.
ConfidenceInterval bootstrap_auc_ci(std::span<const double> scores, std::span<const int> labels,
                                    std::size_t n_resamples, std::uint64_t seed);

struct CalibrationBin {
  double mean_pred = 0.0;
  double obs_rate = 0.0;
  std::size_t count = 0;
};

// Equal-count groups in ascending probability order; the first n mod g
// groups get one extra row. Throws TooFew if n < g.
std::vector<CalibrationBin> risk_groups(std::span<const double> probs, std::span<const int> labels,
                                        int g);

inline std::vector<CalibrationBin> calibration_deciles(std::span<const double> probs,
                                                       std::span<const int> labels) {
  return risk_groups(probs, labels, 10);
}

struct HosmerLemeshowResult {
  double chi2 = 0.0;
  int dof = 0;
  double p = 1.0;
  // Groups remaining after degenerate groups were merged.
  int groups = 0;
};

// Groups with zero expected events or non-events are merged into the
// neighbour toward the middle; dof = max(1, groups - 2).
HosmerLemeshowResult hosmer_lemeshow(std::span<const double> probs, std::span<const int> labels,
                                     int g = 10);

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Chi-square survival function Q(k/2, x/2). Throws DomainError unless
// x >= 0 and k >= 1.
double chi2_sf(double x, double k);

// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace icutl::metrics
