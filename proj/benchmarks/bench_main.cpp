#include <benchmark/benchmark.h>

#include <vector>

#include "orcsf/pipeline/encoder.hpp"
#include "orcsf/pipeline/patches.hpp"
#include "orcsf/pipeline/preprocess.hpp"
#include "orcsf/randmat.hpp"
#include "orcsf/rng.hpp"
#include "orcsf/sparsefilter.hpp"
#include "orcsf/spectral.hpp"

using namespace orcsf;

static void BM_Roundness(benchmark::State& state) {
  const auto n = state.range(0);
  const auto f = randmat::sample_gaussian(n, 10000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(spectral::roundness(f));
}
BENCHMARK(BM_Roundness)->Arg(64)->Arg(243)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_GramEigenvalues(benchmark::State& state) {
  const auto f = randmat::sample_gaussian(state.range(0), 2000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral::gram_eigenvalues(f).largest());
}
BENCHMARK(BM_GramEigenvalues)->Arg(64)->Arg(243)->Unit(benchmark::kMillisecond);

static void BM_SampleToeplitz(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(randmat::sample_toeplitz(0.8, state.range(0), 10000, 3).data());
}
BENCHMARK(BM_SampleToeplitz)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_SparseFilteringGradient(benchmark::State& state) {
  const auto x = randmat::sample_gaussian(243, 10000, 4);
  const auto w = sf::initial_weights(state.range(0), 243, 5);
  Eigen::MatrixXd grad;
  for (auto _ : state) benchmark::DoNotOptimize(sf::objective_and_gradient(w.matrix, x, 1e-8, 1e-12, grad));
}
BENCHMARK(BM_SparseFilteringGradient)->Arg(64)->Arg(243)->Unit(benchmark::kMillisecond);

static void BM_EncodeImage(benchmark::State& state) {
  Rng rng(6);
  std::vector<std::uint8_t> image(pipeline::kImageBytes);
  for (auto& b : image) b = static_cast<std::uint8_t>(rng.below(256));
  pipeline::Preprocessing prep;
  prep.whitening = pipeline::fit_whitening(randmat::sample_gaussian(243, 2000, 7), 0.1);
  const auto dict = rng.normal_matrix(state.range(0), 243);
  const pipeline::Encoder encoder(dict, prep);
  for (auto _ : state) benchmark::DoNotOptimize(encoder.encode(image).data());
}
BENCHMARK(BM_EncodeImage)->Arg(64)->Arg(243)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
