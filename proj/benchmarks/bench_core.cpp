#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "cts/attention.hpp"
#include "cts/autoencoder.hpp"
#include "cts/divergence.hpp"
#include "cts/featurize.hpp"
#include "cts/random.hpp"
#include "cts/reward_model.hpp"
#include "cts/trust.hpp"

namespace {

using namespace cts;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_Histograms(benchmark::State& state) {
  const auto reference = random_values(static_cast<std::size_t>(state.range(0)), 1);
  const auto batch = random_values(static_cast<std::size_t>(state.range(0)), 2);
  const auto edges = drift::quantile_edges(reference);
  for (auto _ : state) {
    const auto e = drift::build_histogram(reference, edges);
    const auto a = drift::build_histogram(batch, edges);
    benchmark::DoNotOptimize(drift::psi(e, a) + drift::jsd(e, a));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_Histograms)->Arg(500)->Arg(5000);

void BM_Attention(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix q = random_matrix(n, 16, 3), k = random_matrix(n, 16, 4), v = random_matrix(n, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(drift::attention(q, k, v, 16).data());
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(64);

void BM_AutoencoderGradient(benchmark::State& state) {
  drift::AutoencoderConfig config;
  config.variant = state.range(0) == 0 ? drift::AutoencoderVariant::kPlain : drift::AutoencoderVariant::kAttention;
  config.eta = 0.1;
  const auto model = drift::init_autoencoder(260, config, 6);
  const Matrix clean = random_matrix(32, 260, 7);
  const Matrix corrupted = clean + 0.05 * random_matrix(32, 260, 8);
  for (auto _ : state) benchmark::DoNotOptimize(drift::loss_and_gradient(model, corrupted, clean).loss);
  state.SetLabel(std::string(drift::to_string(config.variant)));
}
BENCHMARK(BM_AutoencoderGradient)->Arg(0)->Arg(1);

void BM_TrainRewardModel(benchmark::State& state) {
  const Eigen::Index n = 2000;
  const Matrix x = random_matrix(n, 64, 9);
  Rng rng(10);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = rng.bernoulli(1.0 / (1.0 + std::exp(-2.0 * x(i, 0)))) ? 1 : 0;
  }
  reward::BoostingConfig config;
  config.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(reward::train(x, y, config).trees.size());
}
BENCHMARK(BM_TrainRewardModel)->Unit(benchmark::kMillisecond);

void BM_TokenBucket(benchmark::State& state) {
  const std::vector<std::string> words{"market", "politics", "good", "senate", "rally", "outlook"};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(token_bucket(words[i++ % words.size()], 17, 256));
}
BENCHMARK(BM_TokenBucket);

void BM_TrustTimeline(benchmark::State& state) {
  const auto t = random_values(static_cast<std::size_t>(state.range(0)), 11);
  std::vector<double> scores;
  for (double v : t) scores.push_back(1.0 / (1.0 + std::exp(-v)));
  for (auto _ : state) benchmark::DoNotOptimize(trust::ema_smooth(scores, 0.5).back());
}
BENCHMARK(BM_TrustTimeline)->Arg(10)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
