#include "icutl/kernels.hpp"

#include "common.hpp"

namespace icutl::kernels::serial {

double logistic_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                          double b, double pos_weight, std::span<double> grad) {
  detail::check_shapes(x, y.size(), w.size(), grad.size());
  return detail::block_loss_grad(x, y, w, b, pos_weight, 0, x.rows(), grad);
}

std::vector<double> decision_scores(const Matrix& x, std::span<const double> w, double b) {
  if (x.cols() != w.size()) throw Error(ErrorCode::kDimensionMismatch, "weights vs columns");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = b;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) z += row[j] * w[j];
    out[i] = z;
  }
  return out;
}

std::vector<std::optional<double>> bootstrap_aucs(std::span<const double> scores,
                                                  std::span<const int> labels,
                                                  std::size_t n_resamples, std::uint64_t seed) {
  std::vector<std::optional<double>> out(n_resamples);
  for (std::size_t r = 0; r < n_resamples; ++r) out[r] = detail::bootstrap_one(scores, labels, seed, r);
  return out;
}

Matrix feature_matrix(const Datastore& store, std::span<const features::CohortMember> members,
                      int t_hours, const features::FeatureSpec& spec) {
  Matrix out(members.size(), spec.dim(t_hours));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto row = features::extract_features(store, members[i].icustay_id, t_hours, spec);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace icutl::kernels::serial
