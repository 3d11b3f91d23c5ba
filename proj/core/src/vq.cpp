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

#include "qoeseq/vq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qoeseq/error.hpp"
#include "qoeseq/random.hpp"

namespace qoeseq {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

struct Nearest {
  std::size_t index = 0;
  double distance = std::numeric_limits<double>::infinity();
};

Nearest nearest_centroid(const Matrix& centroids, std::span<const double> x) {
  Nearest best;
  for (std::size_t k = 0; k < centroids.rows(); ++k) {
    const double d = squared_distance(centroids.row(k), x);
    if (d < best.distance) {
      best.distance = d;
      best.index = k;
    }
  }
  return best;
}

void require_finite(const Matrix& points) {
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "non-finite coordinate");
  }
}

void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "non-finite coordinate");
  }
}

std::size_t count_distinct_rows(const Matrix& points) {
  std::vector<std::size_t> order(points.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = points.row(a);
    auto rb = points.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids;
  centroids.push_row(points.row(rng.uniform_index(n)));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centroids.row(0));

  while (centroids.rows() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    // Distinct points >= k guarantees total > 0 here.
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t pick = n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      cumulative += d2[i];
      last_positive = i;
      if (target < cumulative) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_positive;
    centroids.push_row(points.row(pick));
    const auto c = centroids.row(centroids.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
    }
  }
  return centroids;
}

// Assigns every point; returns the inertia.
double assign(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& labels,
              std::vector<double>& dists) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const Nearest nn = nearest_centroid(centroids, points.row(i));
    labels[i] = nn.index;
    dists[i] = nn.distance;
    inertia += nn.distance;
  }
  return inertia;
}

// Moves each empty centroid onto the point farthest from its current
// centroid, one empty cluster at a time, lowest index first.
void repair_empty_clusters(const Matrix& points, Matrix& centroids,
                           std::vector<std::size_t>& labels, std::vector<double>& dists) {
  const std::size_t k = centroids.rows();
  for (;;) {
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t label : labels) ++counts[label];
    auto empty = std::find(counts.begin(), counts.end(), 0);
    if (empty == counts.end()) return;
    const auto target = static_cast<std::size_t>(empty - counts.begin());

    std::size_t farthest = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
      if (dists[i] > worst) {
        worst = dists[i];
        farthest = i;
      }
    }
    if (worst <= 0.0) return;  // unreachable with >= k distinct points
    auto dst = centroids.row(target);
    auto src = points.row(farthest);
    std::copy(src.begin(), src.end(), dst.begin());
    labels[farthest] = target;
    dists[farthest] = 0.0;
  }
}

// Replaces each centroid with the mean of its members; returns the largest
// Euclidean shift.
double update_centroids(const Matrix& points, Matrix& centroids,
                        const std::vector<std::size_t>& labels) {
  const std::size_t k = centroids.rows();
  const std::size_t d = centroids.cols();
  Matrix sums(k, d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto p = points.row(i);
    auto s = sums.row(labels[i]);
    for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
    ++counts[labels[i]];
  }
  double max_shift = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    auto s = sums.row(c);
    for (std::size_t j = 0; j < d; ++j) s[j] /= static_cast<double>(counts[c]);
    max_shift = std::max(max_shift, std::sqrt(squared_distance(s, centroids.row(c))));
    auto dst = centroids.row(c);
    std::copy(s.begin(), s.end(), dst.begin());
  }
  return max_shift;
}

}  // namespace

Codebook kmeans_fit(const Matrix& points, const KMeansOptions& options) {
  if (options.k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (options.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  if (!(options.tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be >= 0");
  if (points.rows() == 0 || points.cols() == 0) {
    throw Error(ErrorCode::kTooFewDistinctPoints, "no points to cluster");
  }
  require_finite(points);
  const std::size_t distinct = count_distinct_rows(points);
  if (distinct < options.k) {
    throw Error(ErrorCode::kTooFewDistinctPoints,
                std::to_string(distinct) + " distinct points for k=" + std::to_string(options.k));
  }

  Rng rng(options.seed);
  Codebook book;
  book.seed = options.seed;
  book.centroids = seed_plus_plus(points, options.k, rng);

  std::vector<std::size_t> labels(points.rows());
  std::vector<double> dists(points.rows());
  double inertia = assign(points, book.centroids, labels, dists);
  book.inertia_trace.push_back(inertia);

  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    repair_empty_clusters(points, book.centroids, labels, dists);
    const double shift = update_centroids(points, book.centroids, labels);
    inertia = assign(points, book.centroids, labels, dists);
    book.inertia_trace.push_back(inertia);
    book.iterations = iter + 1;
    if (shift <= options.tol) break;
  }
  book.inertia = inertia;
  return book;
}

Token vq_encode(const Codebook& codebook, std::span<const double> x) {
  if (x.size() != codebook.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) + " features, codebook has " +
                    std::to_string(codebook.dim()));
  }
  require_finite(x);
  return nearest_centroid(codebook.centroids, x).index;
}

std::vector<Token> vq_encode_all(const Codebook& codebook, const Matrix& points) {
  std::vector<Token> tokens;
  tokens.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) tokens.push_back(vq_encode(codebook, points.row(i)));
  return tokens;
}

double quantization_error(const Codebook& codebook, const Matrix& points) {
  if (points.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no points");
  if (points.cols() != codebook.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "point dimension differs from codebook");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += nearest_centroid(codebook.centroids, points.row(i)).distance;
  }
  return total / static_cast<double>(points.rows());
}

std::size_t BinningScheme::alphabet_size() const {
  std::size_t v = 1;
  for (std::size_t j = 0; j < edges.size(); ++j) v *= bins;
  return v;
}

BinningScheme binning_fit(const Matrix& points, std::size_t bins_per_feature) {
  if (bins_per_feature < 1) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
  if (points.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no points to bin");
  require_finite(points);
  const std::size_t d = points.cols();

  std::size_t alphabet = 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (alphabet > std::numeric_limits<std::uint32_t>::max() / bins_per_feature) {
      throw Error(ErrorCode::kInvalidArgument, "binned alphabet B^D is too large");
    }
    alphabet *= bins_per_feature;
  }

  BinningScheme scheme;
  scheme.bins = bins_per_feature;
  scheme.edges.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = points(0, j);
    double hi = lo;
    for (std::size_t i = 1; i < points.rows(); ++i) {
      lo = std::min(lo, points(i, j));
      hi = std::max(hi, points(i, j));
    }
    if (hi <= lo) continue;
    const double width = (hi - lo) / static_cast<double>(bins_per_feature);
    for (std::size_t b = 1; b < bins_per_feature; ++b) {
      scheme.edges[j].push_back(lo + static_cast<double>(b) * width);
    }
  }
  return scheme;
}

Token binning_encode(const BinningScheme& scheme, std::span<const double> x) {
  if (x.size() != scheme.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) + " features, scheme has " +
                    std::to_string(scheme.dim()));
  }
  require_finite(x);
  Token token = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& e = scheme.edges[j];
    const auto bin = static_cast<Token>(std::upper_bound(e.begin(), e.end(), x[j]) - e.begin());
    token = token * scheme.bins + bin;
  }
  return token;
}

std::vector<Token> binning_encode_all(const BinningScheme& scheme, const Matrix& points) {
  std::vector<Token> tokens;
  tokens.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    tokens.push_back(binning_encode(scheme, points.row(i)));
  }
  return tokens;
}

}  // namespace qoeseq
