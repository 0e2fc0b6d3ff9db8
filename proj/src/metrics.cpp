#include "icutl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "icutl/error.hpp"
#include "icutl/kernels.hpp"

namespace icutl::metrics {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size());
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y == 1);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::kSingleClass, "AUC needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Rank sum of positives with mid-ranks for ties (ranks are 1-based).
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += mid_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ConfidenceInterval bootstrap_auc_ci(std::span<const double> scores, std::span<const int> labels,
                                    std::size_t n_resamples, std::uint64_t seed) {
  // Validates lengths and classes up front.
  (void)auc(scores, labels);
  const auto draws = kernels::parallel::bootstrap_aucs(scores, labels, n_resamples, seed);
  std::vector<double> values;
  values.reserve(draws.size());
  for (const auto& d : draws) {
    if (d) values.push_back(*d);
  }
  ConfidenceInterval ci;
  ci.skipped = draws.size() - values.size();
  if (values.empty()) {
    ci.lo = ci.hi = std::numeric_limits<double>::quiet_NaN();
    return ci;
  }
  ci.lo = percentile(values, 2.5);
  ci.hi = percentile(values, 97.5);
  return ci;
}

std::vector<CalibrationBin> risk_groups(std::span<const double> probs, std::span<const int> labels,
                                        int g) {
  check_lengths(probs.size(), labels.size());
  const std::size_t n = probs.size();
  if (g < 1 || n < static_cast<std::size_t>(g)) {
    throw Error(ErrorCode::kTooFew, "need at least " + std::to_string(g) + " rows, got " +
                                        std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return probs[a] < probs[b]; });

  const std::size_t base = n / static_cast<std::size_t>(g);
  const std::size_t extra = n % static_cast<std::size_t>(g);
  std::vector<CalibrationBin> bins;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(g); ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    double sum_p = 0.0, sum_y = 0.0;
    for (std::size_t k = pos; k < pos + size; ++k) {
      sum_p += probs[order[k]];
      sum_y += labels[order[k]];
    }
    bins.push_back({sum_p / static_cast<double>(size), sum_y / static_cast<double>(size), size});
    pos += size;
  }
  return bins;
}

HosmerLemeshowResult hosmer_lemeshow(std::span<const double> probs, std::span<const int> labels,
                                     int g) {
  struct Group {
    double expected = 0.0;  // E1
    double observed = 0.0;  // O1
    double count = 0.0;
  };
  std::vector<Group> groups;
  for (const auto& bin : risk_groups(probs, labels, g)) {
    const double c = static_cast<double>(bin.count);
    groups.push_back({bin.mean_pred * c, bin.obs_rate * c, c});
  }
  // Recompute E1 and O1 as exact sums rather than mean * count.
  {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return probs[a] < probs[b]; });
    std::size_t pos = 0;
    for (auto& grp : groups) {
      grp.expected = 0.0;
      grp.observed = 0.0;
      const auto size = static_cast<std::size_t>(grp.count);
      for (std::size_t k = pos; k < pos + size; ++k) {
        grp.expected += probs[order[k]];
        grp.observed += labels[order[k]];
      }
      pos += size;
    }
  }
  auto degenerate = [](const Group& grp) {
    return grp.expected <= 0.0 || grp.count - grp.expected <= 0.0;
  };
  while (groups.size() > 1) {
    auto it = std::find_if(groups.begin(), groups.end(), degenerate);
    if (it == groups.end()) break;
    const auto i = static_cast<std::size_t>(it - groups.begin());
    const std::size_t j = (2 * i + 1 < groups.size()) ? i + 1 : i - 1;
    groups[j].expected += groups[i].expected;
    groups[j].observed += groups[i].observed;
    groups[j].count += groups[i].count;
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i));
  }

  HosmerLemeshowResult r;
  r.groups = static_cast<int>(groups.size());
  for (const auto& grp : groups) {
    if (degenerate(grp)) continue;
    const double e0 = grp.count - grp.expected;
    const double o0 = grp.count - grp.observed;
    r.chi2 += (grp.observed - grp.expected) * (grp.observed - grp.expected) / grp.expected +
              (o0 - e0) * (o0 - e0) / e0;
  }
  r.dof = std::max(1, r.groups - 2);
  r.p = chi2_sf(r.chi2, r.dof);
  return r;
}

namespace {

constexpr int kMaxGammaIterations = 1000;
constexpr double kGammaEps = 1e-16;

// P(a, x) by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxGammaIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by its continued fraction (modified Lentz); valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorCode::kDomainError, "gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi2_sf(double x, double k) {
  if (!(x >= 0.0) || !(k >= 1.0)) {
    throw Error(ErrorCode::kDomainError, "chi2_sf requires x >= 0 and k >= 1");
  }
  return gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace icutl::metrics
