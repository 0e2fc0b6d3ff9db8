#include "common.hpp"

#include <algorithm>
#include <cmath>

#include "icutl/kernels.hpp"

namespace icutl::kernels {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

double block_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                       double b, double pos_weight, std::size_t begin, std::size_t end,
                       std::span<double> grad) {
  const std::size_t d = x.cols();
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto row = x.row(i);
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += row[j] * w[j];
    const double c = y[i] == 1 ? pos_weight : 1.0;
    // CE = softplus(z) - y z
    loss += c * (softplus(z) - (y[i] == 1 ? z : 0.0));
    const double r = c * (sigmoid(z) - y[i]);
    for (std::size_t j = 0; j < d; ++j) grad[j] += r * row[j];
    grad[d] += r;
  }
  return loss;
}

std::optional<double> bootstrap_one(std::span<const double> scores, std::span<const int> labels,
                                    std::uint64_t seed, std::size_t r) {
  const std::size_t n = scores.size();
  Rng rng(seed, r);
  std::vector<double> s(n);
  std::vector<int> l(n);
  for (int attempt = 0; attempt < metrics::kMaxRedraws; ++attempt) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.below(n));
      s[i] = scores[k];
      l[i] = labels[k];
      pos += (l[i] == 1);
    }
    if (pos > 0 && pos < n) return metrics::auc(s, l);
  }
  return std::nullopt;
}

}  // namespace detail
}  // namespace icutl::kernels
