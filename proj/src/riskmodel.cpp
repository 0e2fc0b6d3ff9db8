#include "icutl/riskmodel.hpp"

#include <algorithm>
#include <cmath>

#include "icutl/error.hpp"
#include "icutl/kernels.hpp"
#include "icutl/rng.hpp"

namespace icutl::risk {
namespace {

std::vector<int> labels_of(std::span<const features::CohortMember> members) {
  std::vector<int> y;
  y.reserve(members.size());
  for (const auto& m : members) y.push_back(m.label);
  return y;
}

std::vector<std::string> model_feature_names(const features::FeatureSpec& spec, int t_hours) {
  std::vector<std::string> names;
  for (int w = 0; w < t_hours / features::kWindowHours; ++w) {
    for (const auto& n : spec.names) names.push_back(n + "_w" + std::to_string(w));
  }
  return names;
}

std::size_t count_positive(std::span<const int> y) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
}

// Scores raw rows through predict_score, the same path the service uses.
void score_rows(const HorizonModel& model, const Matrix& raw, std::vector<double>& scores,
                std::vector<double>& probs) {
  scores.resize(raw.rows());
  probs.resize(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto p = predict_score(model, raw.row(i));
    scores[i] = p.score;
    probs[i] = p.probability;
  }
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, int t_hours) {
  return stream_seed(seed, 1000 + static_cast<std::uint64_t>(t_hours));
}
std::uint64_t fold_seed(std::uint64_t seed, int t_hours) {
  return stream_seed(seed, 2000 + static_cast<std::uint64_t>(t_hours));
}
std::uint64_t bootstrap_seed(std::uint64_t seed, int t_hours) {
  return stream_seed(seed, 3000 + static_cast<std::uint64_t>(t_hours));
}

const HorizonModel* ModelBundle::find(int t_hours) const {
  for (const auto& h : horizons) {
    if (h.t_hours == t_hours) return &h;
  }
  return nullptr;
}

Prediction predict_score(const HorizonModel& model, std::span<const double> raw_row) {
  const std::size_t d = model.weights.size();
  if (raw_row.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "feature vector length " +
                                                   std::to_string(raw_row.size()) + ", model expects " +
                                                   std::to_string(d));
  }
  const std::size_t windows = static_cast<std::size_t>(model.t_hours / features::kWindowHours);
  const std::size_t n_features = windows ? d / windows : d;
  const auto x = features::standardize_row(raw_row, model.stats, n_features);
  double z = model.intercept;
  for (std::size_t j = 0; j < d; ++j) z += x[j] * model.weights[j];
  return {z, model.platt(z)};
}

Split stratified_split(std::span<const int> y, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  Split split;
  for (auto* cls : {&pos, &neg}) {
    auto& v = *cls;
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(v.size())));
    split.train.insert(split.train.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), v.begin() + static_cast<std::ptrdiff_t>(n_train), v.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

HorizonEvaluation evaluate_rows(int t_hours, std::span<const double> scores,
                                std::span<const double> probs, std::span<const int> labels,
                                std::size_t resamples, std::uint64_t seed) {
  HorizonEvaluation ev;
  ev.t_hours = t_hours;
  ev.n = labels.size();
  ev.events = count_positive(labels);
  ev.auc = metrics::auc(probs, labels);
  ev.auc_raw = metrics::auc(scores, labels);
  ev.ci = metrics::bootstrap_auc_ci(probs, labels, resamples, seed);
  ev.calibration = metrics::calibration_deciles(probs, labels);
  ev.hl = metrics::hosmer_lemeshow(probs, labels);
  return ev;
}

namespace {

struct HorizonOutcome {
  HorizonModel model;
  HorizonEvaluation evaluation;
};

HorizonOutcome train_horizon(const Datastore& store, const TrainConfig& cfg, int t) {
  const auto spec = features::FeatureSpec::standard();
  const auto members = features::build_cohort(store, t);
  const auto y = labels_of(members);
  const auto split = stratified_split(y, cfg.train_fraction, split_seed(cfg.seed, t));

  std::vector<int> y_train, y_test;
  for (auto i : split.train) y_train.push_back(y[i]);
  for (auto i : split.test) y_test.push_back(y[i]);
  const std::size_t pos_train = count_positive(y_train);
  const std::size_t folds = static_cast<std::size_t>(cfg.cv_folds);
  if (pos_train < folds || y_train.size() - pos_train < folds) {
    throw Error(ErrorCode::kTooFew, "training split has " + std::to_string(pos_train) +
                                        " deaths and " + std::to_string(y_train.size() - pos_train) +
                                        " survivors; need " + std::to_string(folds) + " of each");
  }
  const std::size_t pos_test = count_positive(y_test);
  if (pos_test == 0 || pos_test == y_test.size()) {
    throw Error(ErrorCode::kSingleClass, "held-out split has a single class");
  }
  if (y_test.size() < 10) {
    throw Error(ErrorCode::kTooFew, "held-out split has fewer than 10 rows");
  }

  const Matrix raw = kernels::parallel::feature_matrix(store, members, t, spec);
  const Matrix raw_train = raw.select_rows(split.train);
  const Matrix raw_test = raw.select_rows(split.test);
  const auto standardized = features::impute_and_standardize(raw_train, nullptr, spec.size());

  const auto sel = select_lambda(standardized.matrix, y_train, cfg, fold_seed(cfg.seed, t));
  const auto fit = train_logreg(standardized.matrix, y_train, sel.lambda,
                                balanced_pos_weight(y_train), cfg.solver);

  HorizonOutcome out;
  auto& m = out.model;
  m.t_hours = t;
  m.feature_names = model_feature_names(spec, t);
  m.stats = standardized.stats;
  m.weights = fit.w;
  m.intercept = fit.b;
  m.platt = fit_platt(sel.oof_scores, y_train);
  m.lambda = sel.lambda;

  std::vector<double> scores, probs;
  score_rows(m, raw_test, scores, probs);
  out.evaluation = evaluate_rows(t, scores, probs, y_test, cfg.bootstrap_resamples,
                                 bootstrap_seed(cfg.seed, t));
  return out;
}

}  // namespace

TrainResult train_all_horizons(const Datastore& store, const TrainConfig& cfg) {
  if (cfg.cv_folds < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  auto horizons = cfg.horizons;
  for (int t : horizons) features::check_horizon(t);
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  TrainResult result;
  result.bundle.seed = cfg.seed;
  for (int t : horizons) {
    try {
      auto outcome = train_horizon(store, cfg, t);
      result.bundle.horizons.push_back(std::move(outcome.model));
      result.report.horizons.push_back(std::move(outcome.evaluation));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingleClass && e.code() != ErrorCode::kTooFew) throw;
      result.report.skipped.push_back({t, e.what()});
    }
  }
  result.bundle.bundle_id = derive_bundle_id(result.bundle);
  return result;
}

std::vector<features::CohortMember> evaluation_rows(const Datastore& store,
                                                    const ModelBundle& bundle, int t_hours,
                                                    double train_fraction, bool all_rows) {
  auto members = features::build_cohort(store, t_hours);
  if (all_rows) return members;
  const auto y = labels_of(members);
  const auto split = stratified_split(y, train_fraction, split_seed(bundle.seed, t_hours));
  std::vector<features::CohortMember> out;
  for (auto i : split.test) out.push_back(members[i]);
  return out;
}

EvaluationReport evaluate_bundle(const Datastore& store, const ModelBundle& bundle,
                                 const TrainConfig& cfg, bool all_rows) {
  const auto spec = features::FeatureSpec::standard();
  EvaluationReport report;
  for (const auto& model : bundle.horizons) {
    const int t = model.t_hours;
    const auto rows = evaluation_rows(store, bundle, t, cfg.train_fraction, all_rows);
    const auto y = labels_of(rows);
    try {
      if (rows.size() < 10) throw Error(ErrorCode::kTooFew, "fewer than 10 evaluation rows");
      const Matrix raw = kernels::parallel::feature_matrix(store, rows, t, spec);
      std::vector<double> scores, probs;
      score_rows(model, raw, scores, probs);
      report.horizons.push_back(evaluate_rows(t, scores, probs, y, cfg.bootstrap_resamples,
                                              bootstrap_seed(bundle.seed, t)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingleClass && e.code() != ErrorCode::kTooFew) throw;
      report.skipped.push_back({t, e.what()});
    }
  }
  return report;
}

timeline::RiskSeries risk_timeline(const ModelBundle& bundle, const Datastore& store,
                                   StayId icustay_id) {
  const auto* stay = store.find_stay(icustay_id);
  if (!stay) throw Error(ErrorCode::kUnknownStay, "unknown icustay_id " + std::to_string(icustay_id));
  const auto spec = features::FeatureSpec::standard();
  const double elapsed = hours_between(stay->intime, stay->outtime);
  timeline::RiskSeries series;
  series.model_id = bundle.bundle_id;
  for (const auto& model : bundle.horizons) {
    if (model.t_hours > elapsed) continue;
    const auto raw = features::extract_features(store, icustay_id, model.t_hours, spec);
    const auto p = predict_score(model, raw);
    series.points.push_back(
        {stay->intime.plus_seconds(model.t_hours * kSecondsPerHour), p.probability});
  }
  return series;
}

}  // namespace icutl::risk
