#pragma once

#include <optional>
#include <span>
#include <vector>

#include "icutl/error.hpp"
#include "icutl/matrix.hpp"
#include "icutl/metrics.hpp"
#include "icutl/rng.hpp"

namespace icutl::kernels::detail {

inline void check_shapes(const Matrix& x, std::size_t n_labels, std::size_t n_weights,
                         std::size_t n_grad) {
  if (x.rows() != n_labels || x.cols() != n_weights || n_grad != x.cols() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "logistic kernel: inconsistent shapes");
  }
}

// Loss and gradient contribution of rows [begin, end). grad is zeroed first.
double block_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                       double b, double pos_weight, std::size_t begin, std::size_t end,
                       std::span<double> grad);

// One bootstrap resample with up to kMaxRedraws draws from stream (seed, r).
std::optional<double> bootstrap_one(std::span<const double> scores, std::span<const int> labels,
                                    std::uint64_t seed, std::size_t r);

}  // namespace icutl::kernels::detail
