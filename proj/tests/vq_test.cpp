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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "qoeseq/random.hpp"
#include "qoeseq/vq.hpp"
#include "test_util.hpp"

using namespace qoeseq;

namespace {

Matrix gaussian_blobs(std::uint64_t seed, std::size_t per_blob, std::size_t blobs, std::size_t d) {
  Rng rng(seed);
  Matrix m;
  std::vector<double> x(d);
  for (std::size_t b = 0; b < blobs; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      for (std::size_t j = 0; j < d; ++j) x[j] = 4.0 * static_cast<double>((b + j) % blobs) + rng.normal();
      m.push_row(x);
    }
  }
  return m;
}

void check_monotone_descent(const Codebook& book) {
  REQUIRE(book.inertia_trace.size() >= 2);
  for (std::size_t i = 1; i < book.inertia_trace.size(); ++i) {
    // Lloyd steps never raise the objective; allow only accumulation round-off.
    CHECK(book.inertia_trace[i] <= book.inertia_trace[i - 1] * (1.0 + 1e-12) + 1e-12);
  }
  CHECK(book.inertia == book.inertia_trace.back());
}

}  // namespace

TEST_CASE("kmeans with K = number of points returns the points") {
  Matrix pts{{0, 0}, {1, 5}, {-2, 3}, {7, 7}};
  Codebook book = kmeans_fit(pts, {.k = 4, .seed = 3});
  CHECK(book.inertia == 0.0);
  std::set<std::vector<double>> got, want;
  for (std::size_t k = 0; k < 4; ++k) {
    auto c = book.centroids.row(k);
    got.insert({c.begin(), c.end()});
    auto p = pts.row(k);
    want.insert({p.begin(), p.end()});
  }
  CHECK(got == want);
}

TEST_CASE("kmeans two well separated pairs") {
  Matrix pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  oracle::Table raw = pts.to_rows();
  const double best = oracle::best_two_partition(raw);
  CHECK(best == doctest::Approx(1.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Codebook book = kmeans_fit(pts, {.k = 2, .seed = seed});
    CHECK(book.inertia == doctest::Approx(best).epsilon(1e-12));
    std::set<std::vector<double>> got;
    for (std::size_t k = 0; k < 2; ++k) {
      auto c = book.centroids.row(k);
      got.insert({c.begin(), c.end()});
    }
    CHECK(got == std::set<std::vector<double>>{{0, 0.5}, {10, 10.5}});
  }
}

TEST_CASE("kmeans K=1 is the coordinate-wise mean") {
  Matrix pts{{1, 2}, {3, 6}, {5, 1}};
  Codebook book = kmeans_fit(pts, {.k = 1, .seed = 0});
  CHECK(book.centroids(0, 0) == doctest::Approx(3.0));
  CHECK(book.centroids(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("kmeans error paths") {
  Matrix dupes{{1, 1}, {1, 1}, {2, 2}};
  CHECK_ERROR_CODE(kmeans_fit(dupes, {.k = 3}), ErrorCode::kTooFewDistinctPoints);
  CHECK_ERROR_CODE(kmeans_fit(Matrix{}, {.k = 1}), ErrorCode::kTooFewDistinctPoints);
  Matrix bad{{1, NAN}, {2, 2}};
  CHECK_ERROR_CODE(kmeans_fit(bad, {.k = 1}), ErrorCode::kNonFiniteInput);
}

TEST_CASE("kmeans descent, determinism, distinct centroids") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Matrix pts = gaussian_blobs(seed, 60, 5, 3);
    KMeansOptions opt{.k = 12, .seed = seed};
    Codebook a = kmeans_fit(pts, opt);
    Codebook b = kmeans_fit(pts, opt);
    check_monotone_descent(a);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
    std::set<std::vector<double>> distinct;
    for (std::size_t k = 0; k < a.size(); ++k) {
      auto c = a.centroids.row(k);
      distinct.insert({c.begin(), c.end()});
      CHECK(vq_encode(a, c) == k);
    }
    CHECK(distinct.size() == a.size());
  }
}

TEST_CASE("kmeans with K = distinct point count reaches zero inertia") {
  Matrix pts;
  for (int i = 0; i < 50; ++i) pts.push_row(std::vector<double>{0, 0});
  for (int i = 0; i < 50; ++i) pts.push_row(std::vector<double>{100, 100});
  for (int i = 0; i < 6; ++i) pts.push_row(std::vector<double>{50.0 + i, 50.0 - i});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Codebook book = kmeans_fit(pts, {.k = 8, .seed = seed});
    CHECK(book.size() == 8);
    check_monotone_descent(book);
    CHECK(book.inertia == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("vq_encode nearest and tie-break") {
  Codebook book;
  book.centroids = Matrix{{0, 0}, {10, 10}};
  CHECK(vq_encode(book, std::vector<double>{0.1, 0.2}) == 0);
  Codebook line;
  line.centroids = Matrix{{0}, {2}};
  CHECK(vq_encode(line, std::vector<double>{1}) == 0);
  CHECK_ERROR_CODE(vq_encode(line, std::vector<double>{1, 2}), ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(vq_encode(line, std::vector<double>{INFINITY}), ErrorCode::kNonFiniteInput);
}

TEST_CASE("vq_encode and quantization_error match the linear-scan oracle") {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> n01;
  Matrix train;
  for (int i = 0; i < 400; ++i) train.push_row(std::vector<double>{n01(gen), n01(gen), n01(gen)});
  Codebook book = kmeans_fit(train, {.k = 16, .seed = 9});
  const oracle::Table centroids = book.centroids.to_rows();

  Matrix probe;
  double total = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x{2 * n01(gen), 2 * n01(gen), 2 * n01(gen)};
    probe.push_row(x);
    auto [idx, d2] = oracle::nearest(centroids, x);
    CHECK(vq_encode(book, x) == idx);
    total += d2;
  }
  CHECK(quantization_error(book, probe) == doctest::Approx(total / 1000).epsilon(1e-12));
}

TEST_CASE("quantization_error small cases") {
  Codebook book;
  book.centroids = Matrix{{0, 0}, {5, 5}};
  CHECK(quantization_error(book, book.centroids) == 0.0);
  CHECK(quantization_error(book, Matrix{{2, 0}}) == 4.0);
  CHECK_ERROR_CODE(quantization_error(book, Matrix{{1}}), ErrorCode::kDimensionMismatch);
}

TEST_CASE("binning_fit edges") {
  BinningScheme s = binning_fit(Matrix{{0}, {10}}, 2);
  REQUIRE(s.edges[0].size() == 1);
  CHECK(s.edges[0][0] == 5.0);

  BinningScheme constant = binning_fit(Matrix{{3, 0}, {3, 1}}, 4);
  CHECK(constant.edges[0].empty());
  CHECK(binning_encode(constant, std::vector<double>{-100, 0}) == 0);
  CHECK(binning_encode(constant, std::vector<double>{100, 0}) == 0);

  BinningScheme five = binning_fit(Matrix{{1}, {100}, {42}}, 5);
  const std::vector<double> want{20.8, 40.6, 60.4, 80.2};
  REQUIRE(five.edges[0].size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(five.edges[0][i] == doctest::Approx(want[i]).epsilon(1e-14));

  CHECK_ERROR_CODE(binning_fit(Matrix{}, 3), ErrorCode::kEmptyInput);
}

TEST_CASE("binning_encode mixed radix") {
  BinningScheme s = binning_fit(Matrix{{0, 0}, {1, 1}}, 2);
  CHECK(s.alphabet_size() == 4);
  CHECK(binning_encode(s, std::vector<double>{0.1, 0.1}) == 0);
  CHECK(binning_encode(s, std::vector<double>{0.9, 0.1}) == 2);
  CHECK(binning_encode(s, std::vector<double>{0.1, 0.9}) == 1);
  CHECK(binning_encode(s, std::vector<double>{-5, 7}) == 1);  // clamps to end bins
  CHECK_ERROR_CODE(binning_encode(s, std::vector<double>{1}), ErrorCode::kDimensionMismatch);
}

TEST_CASE("binning_encode matches the digit-by-digit oracle and is a bijection") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix train;
  for (int i = 0; i < 200; ++i) train.push_row(std::vector<double>{u(gen), 3 * u(gen), u(gen)});
  BinningScheme s = binning_fit(train, 3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x{1.2 * u(gen), 3.6 * u(gen), 1.2 * u(gen)};
    CHECK(binning_encode(s, x) == oracle::binned_token(s.edges, 3, x));
  }
  // Bin centres of every digit tuple map to distinct tokens covering [0, 27).
  std::set<Token> seen;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        auto centre = [&](int j, int digit) {
          const auto& e = s.edges[j];
          const double lo = e[0] - (e[1] - e[0]);
          return lo + (digit + 0.5) * (e[1] - e[0]);
        };
        Token tok = binning_encode(s, std::vector<double>{centre(0, a), centre(1, b), centre(2, c)});
        CHECK(tok == static_cast<Token>(a * 9 + b * 3 + c));
        seen.insert(tok);
      }
    }
  }
  CHECK(seen.size() == 27);
}
