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

#ifndef QOESEQ_VQ_HPP_
#define QOESEQ_VQ_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qoeseq/matrix.hpp"

namespace qoeseq {

using Token = std::size_t;

inline constexpr std::size_t kDefaultCodebookSize = 32;
inline constexpr std::size_t kDefaultBinsPerFeature = 3;

struct KMeansOptions {
  std::size_t k = kDefaultCodebookSize;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-6;  // on the largest Euclidean centroid shift
};

// K centroids learned by k-means; centroid indices form the token alphabet.
struct Codebook {
  Matrix centroids;  // K x D
  double inertia = 0.0;
  std::uint64_t seed = 0;
  // Inertia after each Lloyd iteration, in order. Empty for loaded codebooks.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;

  std::size_t size() const noexcept { return centroids.rows(); }
  std::size_t dim() const noexcept { return centroids.cols(); }
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters are
// reseeded at the point farthest from its assigned centroid, so the
// alphabet size always equals options.k.
Codebook kmeans_fit(const Matrix& points, const KMeansOptions& options);

// Index of the nearest centroid; ties go to the lowest index.
Token vq_encode(const Codebook& codebook, std::span<const double> x);
std::vector<Token> vq_encode_all(const Codebook& codebook, const Matrix& points);

// Mean squared distance from each point to its nearest centroid.
double quantization_error(const Codebook& codebook, const Matrix& points);

// Per-feature equal-width scalar discretizer; the composite token is the
// mixed-radix number of the per-feature bins, feature 0 most significant.
struct BinningScheme {
  std::size_t bins = kDefaultBinsPerFeature;
  // Interior cut points per feature. Constant features have none and always
  // land in bin 0.
  std::vector<std::vector<double>> edges;

  std::size_t dim() const noexcept { return edges.size(); }
  std::size_t alphabet_size() const;
};

BinningScheme binning_fit(const Matrix& points, std::size_t bins_per_feature);
Token binning_encode(const BinningScheme& scheme, std::span<const double> x);
std::vector<Token> binning_encode_all(const BinningScheme& scheme, const Matrix& points);

}  // namespace qoeseq

#endif  // QOESEQ_VQ_HPP_
