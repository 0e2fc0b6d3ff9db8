#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "icutl/error.hpp"
#include "icutl/kernels.hpp"
#include "icutl/riskmodel.hpp"
#include "icutl/rng.hpp"

namespace icutl::risk {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

void count_classes(std::span<const int> y, std::size_t& pos, std::size_t& neg) {
  pos = neg = 0;
  for (int v : y) (v == 1 ? pos : neg) += 1;
}

}  // namespace

double balanced_pos_weight(std::span<const int> y) {
  std::size_t pos, neg;
  count_classes(y, pos, neg);
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "labels contain a single class");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

double objective(const Matrix& x, std::span<const int> y, double lambda, double pos_weight,
                 std::span<const double> w, double b, std::span<double> grad) {
  double loss = kernels::parallel::logistic_loss_grad(x, y, w, b, pos_weight, grad);
  for (std::size_t j = 0; j < w.size(); ++j) {
    loss += 0.5 * lambda * w[j] * w[j];
    grad[j] += lambda * w[j];
  }
  return loss;
}

LogRegFit train_logreg(const Matrix& x, std::span<const int> y, double lambda, double pos_weight,
                       const SolverOptions& opts, const LogRegFit* warm) {
  if (x.rows() < 2) throw Error(ErrorCode::kTooFew, "need at least 2 training rows");
  if (x.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "rows vs labels");
  {
    std::size_t pos, neg;
    count_classes(y, pos, neg);
    if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "labels contain a single class");
  }
  const std::size_t d = x.cols();
  const std::size_t m = d + 1;  // weights then intercept

  std::vector<double> theta(m, 0.0);
  if (warm && warm->w.size() == d) {
    std::copy(warm->w.begin(), warm->w.end(), theta.begin());
    theta[d] = warm->b;
  }
  auto eval = [&](std::span<const double> th, std::span<double> g) {
    return objective(x, y, lambda, pos_weight, th.first(d), th[d], g);
  };

  std::vector<double> grad(m), next(m), next_grad(m), dir(m), alpha;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  double f = eval(theta, grad);

  LogRegFit fit;
  int iter = 0;
  bool converged = norm_inf(grad) < opts.grad_tol;
  while (!converged && iter < opts.max_iter) {
    ++iter;
    // Two-loop recursion for dir = -H g.
    std::copy(grad.begin(), grad.end(), dir.begin());
    alpha.assign(s_hist.size(), 0.0);
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < m; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& v : dir) v *= gamma;
    } else {
      const double scale = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
      for (double& v : dir) v *= scale;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < m; ++i) dir[i] += s_hist[k][i] * (alpha[k] - beta);
    }
    for (double& v : dir) v = -v;
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {
      // Not a descent direction: fall back to scaled steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      const double scale = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
      for (std::size_t i = 0; i < m; ++i) dir[i] = -grad[i] * scale;
      slope = dot(grad, dir);
    }

    // Armijo backtracking. Near the optimum the decrease can drop below
    // rounding noise in f, so a step that leaves f unchanged to working
    // precision but shrinks the gradient is also accepted.
    double step = 1.0;
    double f_next = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < m; ++i) next[i] = theta[i] + step * dir[i];
      f_next = eval(next, next_grad);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      if (std::fabs(f_next - f) <= 1e-13 * std::fabs(f) && norm_inf(next_grad) < norm_inf(grad)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    std::vector<double> s(m), yv(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = next[i] - theta[i];
      yv[i] = next_grad[i] - grad[i];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(yv, yv))) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > static_cast<std::size_t>(std::max(1, opts.history))) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta.swap(next);
    grad.swap(next_grad);
    f = f_next;
    converged = norm_inf(grad) < opts.grad_tol;
  }

  fit.w.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  fit.b = theta[d];
  fit.converged = converged;
  fit.iterations = iter;
  fit.objective = f;
  fit.grad_norm_inf = norm_inf(grad);
  return fit;
}

double Platt::operator()(double z) const { return 1.0 / (1.0 + std::exp(a * z + b)); }

Platt fit_platt(std::span<const double> z, std::span<const int> y) {
  if (z.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "scores vs labels");
  std::size_t n_pos, n_neg;
  count_classes(y, n_pos, n_neg);
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::kSingleClass, "labels contain a single class");
  const double hi = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
  const double lo = 1.0 / (static_cast<double>(n_neg) + 2.0);
  std::vector<double> t(z.size());
  double t_sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    t[i] = y[i] == 1 ? hi : lo;
    t_sum += t[i];
  }

  // NLL = sum softplus(f) - (1 - t) f with f = a z + b.
  auto nll = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double f = a * z[i] + b;
      s += kernels::softplus(f) - (1.0 - t[i]) * f;
    }
    return s;
  };

  const double n = static_cast<double>(z.size());
  double a = 0.0;
  double b = std::log((n - t_sum) / t_sum);
  double f = nll(a, b);
  const double tol = 1e-10 * std::max(1.0, n);
  for (int iter = 0; iter < 200; ++iter) {
    double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(a * z[i] + b));
      const double r = t[i] - p;
      const double w = p * (1.0 - p);
      ga += z[i] * r;
      gb += r;
      haa += w * z[i] * z[i];
      hab += w * z[i];
      hbb += w;
    }
    if (std::fabs(ga) < tol && std::fabs(gb) < tol) break;
    const double det = haa * hbb - hab * hab;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(-hab * ga + haa * gb) / det;
    const double slope = ga * da + gb * db;
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      const double f_new = nll(a + step * da, b + step * db);
      if (f_new <= f + 1e-4 * step * slope) {
        a += step * da;
        b += step * db;
        f = f_new;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (a > 0.0) {
    // Rank preservation requires a <= 0; the best constant matches the mean target.
    const double mean_t = t_sum / n;
    a = 0.0;
    b = std::log((1.0 - mean_t) / mean_t);
  }
  return {a, b};
}

std::vector<int> stratified_folds(std::span<const int> y, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(pos);
  shuffle(neg);
  std::vector<int> folds(y.size(), 0);
  std::size_t slot = 0;
  for (auto i : pos) folds[i] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
  for (auto i : neg) folds[i] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
  return folds;
}

LambdaSelection select_lambda(const Matrix& x, std::span<const int> y, const TrainConfig& cfg,
                              std::uint64_t fold_seed) {
  const auto& grid = cfg.lambda_grid;
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty lambda grid");
  for (double l : grid) {
    if (!(l > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda values must be positive");
  }
  const std::size_t g = grid.size();
  const auto folds = stratified_folds(y, cfg.cv_folds, fold_seed);

  // Largest lambda first so each fit warm-starts from a smoother solution.
  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] > grid[b]; });

  std::vector<std::vector<double>> oof(g, std::vector<double>(y.size(), 0.0));
  std::vector<double> auc_sum(g, 0.0);
  for (int f = 0; f < cfg.cv_folds; ++f) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < y.size(); ++i) (folds[i] == f ? val_idx : train_idx).push_back(i);
    const Matrix x_train = x.select_rows(train_idx);
    const Matrix x_val = x.select_rows(val_idx);
    std::vector<int> y_train, y_val;
    for (auto i : train_idx) y_train.push_back(y[i]);
    for (auto i : val_idx) y_val.push_back(y[i]);
    const double w_pos = balanced_pos_weight(y_train);

    LogRegFit prev;
    bool have_prev = false;
    for (auto l : order) {
      LogRegFit fit = train_logreg(x_train, y_train, grid[l], w_pos, cfg.solver,
                                   have_prev ? &prev : nullptr);
      const auto scores = kernels::parallel::decision_scores(x_val, fit.w, fit.b);
      auc_sum[l] += metrics::auc(scores, y_val);
      for (std::size_t k = 0; k < val_idx.size(); ++k) oof[l][val_idx[k]] = scores[k];
      prev = std::move(fit);
      have_prev = true;
    }
  }

  LambdaSelection sel;
  sel.mean_auc.resize(g);
  std::size_t best = 0;
  for (std::size_t l = 0; l < g; ++l) {
    sel.mean_auc[l] = auc_sum[l] / cfg.cv_folds;
    const bool better = sel.mean_auc[l] > sel.mean_auc[best];
    const bool tie_smaller = sel.mean_auc[l] == sel.mean_auc[best] && grid[l] < grid[best];
    if (l > 0 && (better || tie_smaller)) best = l;
  }
  sel.lambda = grid[best];
  sel.oof_scores = std::move(oof[best]);
  return sel;
}

}  // namespace icutl::risk
