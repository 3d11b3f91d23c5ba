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

#ifndef QOESEQ_RANDOM_HPP_
#define QOESEQ_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace qoeseq {

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the distribution adaptors below are written out so
// that samples do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform integer in [0, n); n must be positive. Rejection-sampled, no bias.
  std::size_t uniform_index(std::size_t n);

  // Standard normal via Box-Muller (one variate per call).
  double normal();

  // Inverse-CDF draw from a discrete distribution: the smallest index i with
  // u < cumsum(p)[i]. Zero-mass entries are never selected.
  std::size_t categorical(std::span<const double> probabilities);

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qoeseq

#endif  // QOESEQ_RANDOM_HPP_
