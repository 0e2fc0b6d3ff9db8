#pragma once

// Hot loops in two flavours. `serial` is the straightforward reference;
// `parallel` uses OpenMP over fixed row blocks and reduces the block partials
// in block order, so its output does not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "icutl/datastore.hpp"
#include "icutl/features.hpp"
#include "icutl/matrix.hpp"

namespace icutl::kernels {

inline constexpr std::size_t kRowBlock = 256;

// Numerically stable log(1 + exp(z)).
double softplus(double z);
double sigmoid(double z);

// Weighted cross-entropy sum_i c_i * CE(y_i, sigmoid(x_i.w + b)) with
// c_i = pos_weight for y_i = 1 and 1 otherwise. Writes the gradient with
// respect to (w, b) into grad (length cols + 1) and returns the loss.
// No penalty term.
using LossGradFn = double (*)(const Matrix& x, std::span<const int> y, std::span<const double> w,
                              double b, double pos_weight, std::span<double> grad);

namespace serial {

double logistic_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                          double b, double pos_weight, std::span<double> grad);

std::vector<double> decision_scores(const Matrix& x, std::span<const double> w, double b);

// AUC of each bootstrap resample; nullopt when 10 draws in a row were
// single-class.
std::vector<std::optional<double>> bootstrap_aucs(std::span<const double> scores,
                                                  std::span<const int> labels,
                                                  std::size_t n_resamples, std::uint64_t seed);

// Raw (unimputed) feature rows for the given stays.
Matrix feature_matrix(const Datastore& store, std::span<const features::CohortMember> members,
                      int t_hours, const features::FeatureSpec& spec);

}  // namespace serial

namespace parallel {

double logistic_loss_grad(const Matrix& x, std::span<const int> y, std::span<const double> w,
                          double b, double pos_weight, std::span<double> grad);

std::vector<double> decision_scores(const Matrix& x, std::span<const double> w, double b);

std::vector<std::optional<double>> bootstrap_aucs(std::span<const double> scores,
                                                  std::span<const int> labels,
                                                  std::size_t n_resamples, std::uint64_t seed);

Matrix feature_matrix(const Datastore& store, std::span<const features::CohortMember> members,
                      int t_hours, const features::FeatureSpec& spec);

}  // namespace parallel

}  // namespace icutl::kernels
