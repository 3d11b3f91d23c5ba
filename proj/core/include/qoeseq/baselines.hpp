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

#ifndef QOESEQ_BASELINES_HPP_
#define QOESEQ_BASELINES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "qoeseq/hmm.hpp"
#include "qoeseq/matrix.hpp"
#include "qoeseq/telemetry.hpp"
#include "qoeseq/vq.hpp"

namespace qoeseq {

// Per-timestep MAP classifier over tokens: the HMM with its transition
// matrix removed.
struct TokenClassifier {
  std::vector<double> priors;  // S
  Matrix likelihoods;          // S x V

  std::size_t num_states() const noexcept { return priors.size(); }
  std::size_t alphabet_size() const noexcept { return likelihoods.cols(); }
  void validate() const;
};

TokenClassifier token_classifier_fit(std::span<const LabeledSequence> sequences,
                                     std::size_t num_states, std::size_t alphabet_size,
                                     double alpha = kDefaultAlpha);
std::vector<State> token_classify(const TokenClassifier& model, std::span<const Token> tokens);

inline constexpr double kVarianceFloor = 1e-9;
// Prior given to classes without training rows before renormalization.
inline constexpr double kEmptyClassPrior = 1e-12;

// Gaussian naive Bayes over continuous features.
struct GaussianNB {
  std::vector<double> priors;  // S
  Matrix means;                // S x D
  Matrix variances;            // S x D, >= kVarianceFloor

  std::size_t num_states() const noexcept { return priors.size(); }
  std::size_t dim() const noexcept { return means.cols(); }
  void validate() const;
};

GaussianNB gnb_fit(const Matrix& features, std::span<const State> labels, std::size_t num_states);
// Uses every session's discretized QoE labels.
GaussianNB gnb_fit(const Dataset& train);

State gnb_predict(const GaussianNB& model, std::span<const double> x);
std::vector<State> gnb_classify(const GaussianNB& model, const Matrix& features);
std::vector<State> gnb_classify(const GaussianNB& model, const SessionSeries& session);

}  // namespace qoeseq

#endif  // QOESEQ_BASELINES_HPP_
