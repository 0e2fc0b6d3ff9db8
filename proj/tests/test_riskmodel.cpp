#include <doctest.h>

#include <cmath>
#include <numeric>

#include "icutl/error.hpp"
#include "icutl/kernels.hpp"
#include "icutl/riskmodel.hpp"
#include "icutl/rng.hpp"
#include "icutl/synthgen.hpp"
#include "support.hpp"

using namespace icutl;
using namespace icutl::risk;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data make_data(Rng& rng, std::size_t n, std::size_t d, double signal) {
  Data data{Matrix(n, d), std::vector<int>(n)};
  std::vector<double> beta(d);
  for (auto& b : beta) b = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    double z = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      data.x(i, j) = rng.normal();
      z += signal * beta[j] * data.x(i, j);
    }
    data.y[i] = rng.bernoulli(kernels::sigmoid(z)) ? 1 : 0;
  }
  data.y[0] = 1;
  data.y[1] = 0;
  return data;
}

double objective_at(const Data& d, double lambda, double w_pos, const std::vector<double>& w, double b) {
  std::vector<double> g(w.size() + 1);
  return objective(d.x, d.y, lambda, w_pos, w, b, g);
}

HorizonModel toy_model(int t, double a, double b) {
  HorizonModel m;
  m.t_hours = t;
  const std::size_t d = features::FeatureSpec::standard().dim(t);
  m.feature_names.assign(d, "f");
  m.stats.means.assign(d, 0.0);
  m.stats.stds.assign(d, 1.0);
  m.weights.assign(d, 0.0);
  m.platt = {a, b};
  m.lambda = 1.0;
  return m;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(100);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + rng.below(60), d = 1 + rng.below(8);
    auto data = make_data(rng, n, d, 1.0);
    const double lambda = std::pow(10.0, rng.uniform(-3, 2));
    const double w_pos = rng.uniform(0.5, 8.0);
    std::vector<double> w(d);
    for (auto& v : w) v = rng.normal();
    const double b = rng.normal();
    std::vector<double> g(d + 1);
    objective(data.x, data.y, lambda, w_pos, w, b, g);
    const double h = 1e-5;
    for (std::size_t j = 0; j <= d; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < d) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (objective_at(data, lambda, w_pos, wp, bp) - objective_at(data, lambda, w_pos, wm, bm)) / (2 * h);
      CHECK(std::abs(fd - g[j]) / std::max(1e-8, std::abs(g[j])) < 1e-5);
    }
  }
}

TEST_CASE("solver reaches a stationary point below the zero-model loss") {
  Rng rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    auto data = make_data(rng, 300, 10, 0.7);
    const double w_pos = balanced_pos_weight(data.y);
    for (double lambda : {1e-3, 1.0, 100.0}) {
      const auto fit = train_logreg(data.x, data.y, lambda, w_pos);
      CHECK(fit.converged);
      CHECK(fit.grad_norm_inf < 1e-6);
      CHECK(fit.objective <= objective_at(data, lambda, w_pos, std::vector<double>(10, 0.0), 0.0));
    }
  }
}

TEST_CASE("huge penalty shrinks weights but not the intercept") {
  Rng rng(102);
  auto data = make_data(rng, 200, 6, 1.0);
  const auto fit = train_logreg(data.x, data.y, 1e9, 1.0);
  double norm = 0.0;
  for (double v : fit.w) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-3);
  // Intercept alone fits the base rate.
  const double rate = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(data.y.size());
  CHECK(kernels::sigmoid(fit.b) == doctest::Approx(rate).epsilon(1e-3));
}

TEST_CASE("1-D separable data gives a positive slope, as a grid search confirms") {
  Matrix x(40, 1);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = (i - 19.5) / 10.0;
    y[i] = x(i, 0) > 0 ? 1 : 0;
  }
  const auto fit = train_logreg(x, y, 1.0, 1.0);
  CHECK(fit.w[0] > 0.0);
  // Coarse grid over (w, b): the minimizer has w > 0 and is close to the fit.
  double best = INFINITY, best_w = 0.0;
  std::vector<double> g(2);
  for (double w = -10; w <= 10; w += 0.05) {
    for (double b = -2; b <= 2; b += 0.1) {
      const double f = objective(x, y, 1.0, 1.0, std::vector<double>{w}, b, g);
      if (f < best) {
        best = f;
        best_w = w;
      }
    }
  }
  CHECK(best_w > 0.0);
  CHECK(std::abs(best_w - fit.w[0]) < 0.1);
}

TEST_CASE("training rejects single-class labels") {
  Matrix x(4, 1, 1.0);
  CHECK_THROWS_AS(train_logreg(x, std::vector<int>{1, 1, 1, 1}, 1.0, 1.0), Error);
  CHECK_THROWS_AS(balanced_pos_weight(std::vector<int>{0, 0}), Error);
  CHECK(balanced_pos_weight(std::vector<int>{1, 0, 0, 0}) == 3.0);
}

TEST_CASE("warm start reaches the same optimum") {
  Rng rng(103);
  auto data = make_data(rng, 400, 12, 0.5);
  const auto cold = train_logreg(data.x, data.y, 0.1, 2.0);
  const auto seed_fit = train_logreg(data.x, data.y, 10.0, 2.0);
  const auto warm = train_logreg(data.x, data.y, 0.1, 2.0, {}, &seed_fit);
  for (std::size_t j = 0; j < cold.w.size(); ++j) CHECK(std::abs(cold.w[j] - warm.w[j]) < 1e-5);
}

TEST_CASE("platt recovers the generating sigmoid") {
  Rng rng(104);
  const std::size_t n = 10000;
  std::vector<double> z(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.normal() * 2.0;
    y[i] = rng.bernoulli(kernels::sigmoid(z[i])) ? 1 : 0;
  }
  const auto p = fit_platt(z, y);
  CHECK(std::abs(p.a + 1.0) < 0.1);
  CHECK(std::abs(p.b) < 0.1);
}

TEST_CASE("platt on symmetric data has zero offset") {
  std::vector<double> z;
  std::vector<int> y;
  for (int i = 1; i <= 50; ++i) {
    const double v = 0.1 * i;
    const int label = (i % 3 == 0) ? 0 : 1;
    z.push_back(v);
    y.push_back(label);
    z.push_back(-v);
    y.push_back(1 - label);
  }
  const auto p = fit_platt(z, y);
  CHECK(std::abs(p.b) < 1e-8);
  CHECK(p.a < 0.0);
}

TEST_CASE("platt clamps a reversed slope and rejects one class") {
  std::vector<double> z = {1, 2, 3, 4, 5, 6};
  std::vector<int> y = {1, 1, 1, 0, 0, 0};
  const auto p = fit_platt(z, y);
  CHECK(p.a == 0.0);
  const double mean_t = (3 * (4.0 / 5.0) + 3 * (1.0 / 5.0)) / 6.0;
  CHECK(p(0.0) == doctest::Approx(mean_t));
  CHECK_THROWS_AS(fit_platt(z, std::vector<int>(6, 0)), Error);
}

TEST_CASE("stratified folds balance positives") {
  Rng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.below(500);
    std::vector<int> y(n);
    for (auto& v : y) v = rng.bernoulli(0.15) ? 1 : 0;
    const auto folds = stratified_folds(y, 5, 77 + trial);
    std::vector<int> pos(5, 0), all(5, 0);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(folds[i] >= 0);
      REQUIRE(folds[i] < 5);
      pos[folds[i]] += y[i];
      all[folds[i]] += 1;
    }
    CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
    CHECK(*std::max_element(all.begin(), all.end()) - *std::min_element(all.begin(), all.end()) <= 1);
  }
  CHECK(stratified_folds(std::vector<int>{1, 0, 1, 0}, 2, 1) == stratified_folds(std::vector<int>{1, 0, 1, 0}, 2, 1));
}

TEST_CASE("lambda selection") {
  Rng rng(106);
  auto data = make_data(rng, 300, 8, 0.6);
  TrainConfig cfg;
  cfg.lambda_grid = {3.0};
  const auto single = select_lambda(data.x, data.y, cfg, 1);
  CHECK(single.lambda == 3.0);
  CHECK(single.oof_scores.size() == data.y.size());

  cfg.lambda_grid = default_lambda_grid();
  const auto a = select_lambda(data.x, data.y, cfg, 9);
  const auto b = select_lambda(data.x, data.y, cfg, 9);
  CHECK(a.lambda == b.lambda);
  CHECK(a.mean_auc == b.mean_auc);
  const auto best = std::max_element(a.mean_auc.begin(), a.mean_auc.end()) - a.mean_auc.begin();
  CHECK(a.lambda == cfg.lambda_grid[static_cast<std::size_t>(best)]);

  // Constant features make every grid value tie; the smallest wins.
  Matrix flat(60, 2, 0.0);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) y[i] = i % 4 == 0;
  cfg.lambda_grid = {10.0, 0.1, 1.0};
  CHECK(select_lambda(flat, y, cfg, 3).lambda == 0.1);
}

TEST_CASE("predict_score examples") {
  auto m = toy_model(12, -1.0, 0.0);
  const std::vector<double> zeros(29, 0.0);
  const auto p0 = predict_score(m, zeros);
  CHECK(p0.score == 0.0);
  CHECK(p0.probability == 0.5);
  m.intercept = 1.3;
  CHECK(predict_score(m, zeros).probability == kernels::sigmoid(1.3));
  CHECK_THROWS_AS(predict_score(m, std::vector<double>(28, 0.0)), Error);
}

TEST_CASE("predict_score matches a hand recomputation") {
  auto m = toy_model(24, -0.8, 0.3);
  Rng rng(107);
  std::vector<double> raw(58);
  for (std::size_t j = 0; j < 58; ++j) {
    m.stats.means[j] = rng.normal();
    m.stats.stds[j] = j == 5 ? 0.0 : rng.uniform(0.5, 2.0);
    m.weights[j] = rng.normal() * 0.2;
    raw[j] = rng.normal();
  }
  m.intercept = -0.4;
  raw[3] = features::kMissing;          // window 0 missing: mean
  raw[29 + 7] = features::kMissing;     // window 1 missing: window 0 value
  double z = m.intercept;
  for (std::size_t j = 0; j < 58; ++j) {
    double v = raw[j];
    if (j == 3) v = m.stats.means[3];
    if (j == 36) v = raw[7];
    const double x = m.stats.stds[j] < 1e-12 ? 0.0 : (v - m.stats.means[j]) / m.stats.stds[j];
    z += x * m.weights[j];
  }
  const double p = 1.0 / (1.0 + std::exp(-0.8 * z + 0.3));
  const auto got = predict_score(m, raw);
  CHECK(std::abs(got.score - z) < 1e-12);
  CHECK(std::abs(got.probability - p) < 1e-12);
}

TEST_CASE("raising a positively weighted feature raises risk") {
  auto m = toy_model(12, -1.2, 0.1);
  Rng rng(108);
  for (auto& w : m.weights) w = rng.normal();
  std::vector<double> raw(29);
  for (auto& v : raw) v = rng.normal();
  for (std::size_t j = 0; j < 29; ++j) {
    if (m.weights[j] <= 0) continue;
    auto up = raw;
    up[j] += 0.5;
    CHECK(predict_score(m, up).probability > predict_score(m, raw).probability);
  }
}

TEST_CASE("bundle json round-trips exactly") {
  ModelBundle b;
  b.bundle_id = "test-bundle";
  b.created_at = "2150-01-01T00:00:00";
  b.seed = 18446744073709551615ULL;
  auto m = toy_model(12, -0.123456789012345678, 1.0 / 3.0);
  Rng rng(109);
  for (auto& w : m.weights) w = rng.normal() * 1e-7;
  m.intercept = 1e-300;
  m.lambda = 0.001;
  b.horizons.push_back(m);
  b.horizons.push_back(toy_model(24, -1.0, 0.0));
  const auto text = serialize_bundle(b);
  const auto back = parse_bundle(text);
  CHECK(serialize_bundle(back) == text);
  CHECK(back.seed == b.seed);
  CHECK(back.horizons[0].weights == m.weights);
  CHECK(back.horizons[0].platt.a == m.platt.a);
  CHECK(back.horizons[0].intercept == 1e-300);
}

TEST_CASE("bundle schema violations") {
  ModelBundle b;
  b.bundle_id = "x";
  b.horizons.push_back(toy_model(12, -1, 0));
  const auto good = nlohmann::json::parse(serialize_bundle(b));
  auto expect_violation = [](const nlohmann::json& doc) {
    try {
      parse_bundle(doc.dump());
      FAIL("accepted " << doc.dump().substr(0, 80));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemaViolation);
    }
  };
  auto doc = good;
  doc["horizons"][0]["weights"].erase(0);
  expect_violation(doc);
  doc = good;
  doc["horizons"][0]["t_hours"] = 18;
  expect_violation(doc);
  doc = good;
  doc["horizons"].push_back(good["horizons"][0]);
  expect_violation(doc);  // not strictly increasing
  doc = good;
  doc["horizons"][0]["lambda"] = 0;
  expect_violation(doc);
  doc = good;
  doc.erase("bundle_id");
  expect_violation(doc);
  doc = good;
  doc["horizons"][0]["means"][3] = "1.0";
  expect_violation(doc);
  doc = good;
  doc["horizons"] = nlohmann::json::array();
  expect_violation(doc);
  try {
    parse_bundle("{not json");
    FAIL("accepted bad json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaViolation);
  }
}

TEST_CASE("risk timeline points follow the stay length") {
  const auto store = Datastore::ingest(testing::fixture_dir());
  ModelBundle b;
  b.bundle_id = "toy";
  for (int t : features::all_horizons()) b.horizons.push_back(toy_model(t, -1, 0));
  // Stay 200 lasts exactly 24h.
  const auto s200 = risk_timeline(b, store, 200);
  REQUIRE(s200.points.size() == 2);
  CHECK(s200.points[0].time == store.find_stay(200)->intime.plus_hours(12));
  CHECK(s200.points[1].time == store.find_stay(200)->intime.plus_hours(24));
  CHECK(s200.model_id == "toy");
  // Stay 100 lasts 106h.
  CHECK(risk_timeline(b, store, 100).points.size() == 8);
  CHECK_THROWS_AS(risk_timeline(b, store, 4), Error);
}

TEST_CASE("short stays get an empty risk series") {
  testing::TempDir dir("short_stay");
  testing::copy_fixture(dir.path());
  testing::write_file(dir / "icustays.csv",
                      "icustay_id,hadm_id,subject_id,intime,outtime,first_careunit\n"
                      "100,10,1,2150-01-01T02:00:00,2150-01-05T12:00:00,MICU\n"
                      "200,20,2,2150-02-01T01:00:00,2150-02-01T08:00:00,CCU\n"
                      "210,21,2,2151-03-01T00:00:00,2151-03-04T00:00:00,SICU\n");
  testing::write_file(dir / "chartevents.csv",
                      "icustay_id,charttime,item_name,value_num,unit\n"
                      "200,2150-02-01T02:00:00,heart_rate,72,bpm\n");
  const auto store = Datastore::ingest(dir.path());
  ModelBundle b;
  b.bundle_id = "toy";
  b.horizons.push_back(toy_model(12, -1, 0));
  CHECK(risk_timeline(b, store, 200).points.empty());
}

TEST_CASE("training pipeline on a small synthetic dataset") {
  testing::TempDir dir("train_small");
  synth::SynthConfig scfg;
  scfg.n_patients = 900;
  scfg.seed = 21;
  synth::generate(scfg, dir.path());
  const auto store = Datastore::ingest(dir.path());
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.horizons = {24, 12};
  cfg.bootstrap_resamples = 200;
  const auto r1 = train_all_horizons(store, cfg);
  const auto r2 = train_all_horizons(store, cfg);
  CHECK(serialize_bundle(r1.bundle) == serialize_bundle(r2.bundle));
  REQUIRE(r1.bundle.horizons.size() == 2);
  CHECK(r1.bundle.horizons[0].t_hours == 12);
  CHECK(r1.bundle.horizons[1].weights.size() == 58);
  CHECK(r1.bundle.bundle_id.rfind("mortality-s4-", 0) == 0);
  for (const auto& ev : r1.report.horizons) {
    CHECK(ev.auc == ev.auc_raw);
    std::size_t total = 0;
    for (const auto& bin : ev.calibration) total += bin.count;
    CHECK(total == ev.n);
    CHECK(ev.ci.lo <= ev.auc);
    CHECK(ev.auc <= ev.ci.hi);
  }
  for (const auto& m : r1.bundle.horizons) CHECK(m.platt.a <= 0.0);

  // Re-evaluation reproduces the training-time held-out report.
  const auto again = evaluate_bundle(store, r1.bundle, cfg, false);
  CHECK(to_json(again).dump() == to_json(r1.report).dump());

  // Served risk equals offline scoring.
  const auto members = features::build_cohort(store, 12);
  const auto stay = members.front().icustay_id;
  const auto series = risk_timeline(r1.bundle, store, stay);
  REQUIRE(!series.points.empty());
  const auto raw = features::extract_features(store, stay, 12, features::FeatureSpec::standard());
  CHECK(series.points[0].probability == predict_score(r1.bundle.horizons[0], raw).probability);
}

TEST_CASE("horizons without both classes are skipped, not fatal") {
  const auto store = Datastore::ingest(testing::fixture_dir());
  TrainConfig cfg;
  cfg.horizons = {12};
  const auto r = train_all_horizons(store, cfg);
  CHECK(r.bundle.horizons.empty());
  REQUIRE(r.report.skipped.size() == 1);
  CHECK(r.report.skipped[0].t_hours == 12);
  cfg.horizons = {13};
  CHECK_THROWS_AS(train_all_horizons(store, cfg), Error);
}

TEST_CASE("report formats") {
  EvaluationReport rep;
  HorizonEvaluation h;
  h.t_hours = 12;
  h.n = 100;
  h.events = 9;
  h.auc = 0.8;
  h.ci = {0.7, 0.9, 0};
  h.hl = {5.0, 8, 0.75, 10};
  h.calibration.assign(10, {0.1, 0.1, 10});
  rep.horizons.push_back(h);
  rep.skipped.push_back({168, "too few"});
  const auto csv = report_csv(rep);
  CHECK(csv == "t_hours,n,events,auc,lo,hi,hl_chi2,hl_p\n12,100,9,0.80000000000000004,"
               "0.69999999999999996,0.90000000000000002,5,0.75\n");
  const auto j = to_json(rep);
  CHECK(j["horizons"][0]["n_patients"] == 100);
  CHECK(j["horizons"][0]["calibration_bins"].size() == 10);
  CHECK(j["skipped"][0]["t_hours"] == 168);
  CHECK(report_table(rep).find("skipped t=168h") != std::string::npos);
}
