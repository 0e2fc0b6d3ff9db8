#include <omp.h>

#include <exception>

#include "common.hpp"
#include "icutl/kernels.hpp"

namespace icutl::kernels::parallel {
namespace {

// Runs body(i) for i in [0, n) across threads and rethrows the first
// exception on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(icutl_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

double logistic_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                          double b, double pos_weight, std::span<double> grad) {
  detail::check_shapes(x, y.size(), w.size(), grad.size());
  const std::size_t n = x.rows();
  const std::size_t width = grad.size();
  const std::size_t n_blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<double> partial_grad(n_blocks * width);
  std::vector<double> partial_loss(n_blocks);
  parallel_for(n_blocks, [&](std::size_t blk) {
    const std::size_t begin = blk * kRowBlock;
    const std::size_t end = std::min(n, begin + kRowBlock);
    partial_loss[blk] = detail::block_loss_grad(
        x, y, w, b, pos_weight, begin, end,
        std::span<double>(partial_grad.data() + blk * width, width));
  });
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    loss += partial_loss[blk];
    const double* g = partial_grad.data() + blk * width;
    for (std::size_t j = 0; j < width; ++j) grad[j] += g[j];
  }
  return loss;
}

std::vector<double> decision_scores(const Matrix& x, std::span<const double> w, double b) {
  if (x.cols() != w.size()) throw Error(ErrorCode::kDimensionMismatch, "weights vs columns");
  std::vector<double> out(x.rows());
  parallel_for(x.rows(), [&](std::size_t i) {
    double z = b;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) z += row[j] * w[j];
    out[i] = z;
  });
  return out;
}

std::vector<std::optional<double>> bootstrap_aucs(std::span<const double> scores,
                                                  std::span<const int> labels,
                                                  std::size_t n_resamples, std::uint64_t seed) {
  std::vector<std::optional<double>> out(n_resamples);
  parallel_for(n_resamples,
               [&](std::size_t r) { out[r] = detail::bootstrap_one(scores, labels, seed, r); });
  return out;
}

Matrix feature_matrix(const Datastore& store, std::span<const features::CohortMember> members,
                      int t_hours, const features::FeatureSpec& spec) {
  Matrix out(members.size(), spec.dim(t_hours));
  parallel_for(members.size(), [&](std::size_t i) {
    const auto row = features::extract_features(store, members[i].icustay_id, t_hours, spec);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  });
  return out;
}

}  // namespace icutl::kernels::parallel
