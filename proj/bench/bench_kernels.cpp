// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <optional>
#include <unistd.h>

#include "icutl/kernels.hpp"
#include "icutl/rng.hpp"
#include "icutl/synthgen.hpp"

using namespace icutl;

namespace {

struct Problem {
  Matrix x;
  std::vector<int> y;
  std::vector<double> w;
};

const Problem& problem() {
  static const Problem p = [] {
    Rng rng(1);
    Problem out{Matrix(20000, 232), std::vector<int>(20000), std::vector<double>(232)};
    for (std::size_t i = 0; i < out.x.rows(); ++i) {
      for (std::size_t j = 0; j < out.x.cols(); ++j) out.x(i, j) = rng.normal();
      out.y[i] = rng.bernoulli(0.15) ? 1 : 0;
    }
    for (auto& v : out.w) v = 0.05 * rng.normal();
    return out;
  }();
  return p;
}

std::pair<std::vector<double>, std::vector<int>> score_sample() {
  Rng rng(2);
  std::vector<double> s(5000);
  std::vector<int> y(5000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = rng.bernoulli(0.15) ? 1 : 0;
    s[i] = rng.normal() + y[i];
  }
  return {s, y};
}

const Datastore& dataset() {
  static const Datastore store = [] {
    const auto dir = std::filesystem::temp_directory_path() / ("icutl_bench_" + std::to_string(::getpid()));
    synth::SynthConfig cfg;
    cfg.n_patients = 1500;
    cfg.seed = 3;
    synth::generate(cfg, dir);
    auto s = Datastore::ingest(dir);
    std::filesystem::remove_all(dir);
    return s;
  }();
  return store;
}

template <auto Fn>
void BM_loss_grad(benchmark::State& state) {
  const auto& p = problem();
  std::vector<double> g(p.w.size() + 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p.x, p.y, p.w, 0.1, 5.0, g));
}

template <auto Fn>
void BM_decision_scores(benchmark::State& state) {
  const auto& p = problem();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p.x, p.w, 0.1));
}

template <auto Fn>
void BM_bootstrap(benchmark::State& state) {
  const auto [s, y] = score_sample();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(s, y, 200, 7));
}

template <auto Fn>
void BM_feature_matrix(benchmark::State& state) {
  const auto& store = dataset();
  const auto members = features::build_cohort(store, 48);
  const auto spec = features::FeatureSpec::standard();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(store, members, 48, spec));
}

}  // namespace

BENCHMARK(BM_loss_grad<kernels::serial::logistic_loss_grad>)->Name("loss_grad/serial");
BENCHMARK(BM_loss_grad<kernels::parallel::logistic_loss_grad>)->Name("loss_grad/parallel");
BENCHMARK(BM_decision_scores<kernels::serial::decision_scores>)->Name("decision_scores/serial");
BENCHMARK(BM_decision_scores<kernels::parallel::decision_scores>)->Name("decision_scores/parallel");
BENCHMARK(BM_bootstrap<kernels::serial::bootstrap_aucs>)->Name("bootstrap_aucs/serial");
BENCHMARK(BM_bootstrap<kernels::parallel::bootstrap_aucs>)->Name("bootstrap_aucs/parallel");
BENCHMARK(BM_feature_matrix<kernels::serial::feature_matrix>)->Name("feature_matrix/serial");
BENCHMARK(BM_feature_matrix<kernels::parallel::feature_matrix>)->Name("feature_matrix/parallel");

BENCHMARK_MAIN();
