// Copyright 2026 The qoeseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "qoeseq/hmm.hpp"
#include "qoeseq/random.hpp"
#include "qoeseq/vq.hpp"

namespace {

qoeseq::HmmParams random_model(std::size_t s, std::size_t v, std::uint64_t seed) {
  qoeseq::Rng rng(seed);
  auto row = [&](std::size_t n) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& x : p) sum += (x = 0.05 + rng.uniform());
    for (auto& x : p) x /= sum;
    return p;
  };
  qoeseq::HmmParams m;
  m.pi = row(s);
  std::vector<std::vector<double>> a, b;
  for (std::size_t i = 0; i < s; ++i) {
    a.push_back(row(s));
    b.push_back(row(v));
  }
  m.A = qoeseq::Matrix::from_rows(a);
  m.B = qoeseq::Matrix::from_rows(b);
  return m;
}

void BM_Viterbi(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto t = static_cast<std::size_t>(state.range(1));
  const auto params = random_model(s, 32, 1);
  const qoeseq::LogModel model(params);
  const auto tokens = qoeseq::sample_sequence(params, t, 2).tokens;
  for (auto _ : state) benchmark::DoNotOptimize(qoeseq::viterbi_decode(model, tokens));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * t));
}
BENCHMARK(BM_Viterbi)->Args({5, 300})->Args({5, 3000})->Args({10, 300});

void BM_ForwardLoglik(benchmark::State& state) {
  const auto params = random_model(5, 32, 1);
  const auto tokens = qoeseq::sample_sequence(params, 300, 2).tokens;
  for (auto _ : state) benchmark::DoNotOptimize(qoeseq::forward_loglik(params, tokens));
}
BENCHMARK(BM_ForwardLoglik);

void BM_Posteriors(benchmark::State& state) {
  const auto params = random_model(5, 32, 1);
  const auto tokens = qoeseq::sample_sequence(params, 300, 2).tokens;
  for (auto _ : state) benchmark::DoNotOptimize(qoeseq::posterior_marginals(params, tokens));
}
BENCHMARK(BM_Posteriors);

void BM_KMeans(benchmark::State& state) {
  qoeseq::Rng rng(3);
  qoeseq::Matrix points;
  for (int i = 0; i < 8000; ++i) {
    std::vector<double> row(6);
    for (auto& x : row) x = rng.normal() + (i % 5);
    points.push_row(row);
  }
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qoeseq::kmeans_fit(points, {.k = k, .seed = 4}));
}
BENCHMARK(BM_KMeans)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_VqEncode(benchmark::State& state) {
  qoeseq::Rng rng(3);
  qoeseq::Matrix points;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> row(6);
    for (auto& x : row) x = rng.normal();
    points.push_row(row);
  }
  const auto codebook = qoeseq::kmeans_fit(points, {.k = 32, .seed = 4});
  for (auto _ : state) benchmark::DoNotOptimize(qoeseq::vq_encode_all(codebook, points));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * points.rows()));
}
BENCHMARK(BM_VqEncode);

}  // namespace

BENCHMARK_MAIN();
