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

#ifndef QOESEQ_HMM_HPP_
#define QOESEQ_HMM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qoeseq/matrix.hpp"
#include "qoeseq/telemetry.hpp"
#include "qoeseq/vq.hpp"

namespace qoeseq {

inline constexpr double kDefaultAlpha = 1.0;
inline constexpr double kStochasticTolerance = 1e-9;

// First-order discrete HMM.
//   pi[s]      = P(state_0 = s)
//   A(i, j)    = P(state_{t+1} = j | state_t = i)
//   B(s, v)    = P(token_t = v | state_t = s)
struct HmmParams {
  std::vector<double> pi;
  Matrix A;
  Matrix B;
  double alpha = 0.0;  // smoothing used at fit time; informational

  std::size_t num_states() const noexcept { return pi.size(); }
  std::size_t alphabet_size() const noexcept { return B.cols(); }

  // Throws InvalidModel unless shapes agree, entries lie in [0, 1], and pi
  // and every row of A and B sum to 1 within kStochasticTolerance.
  void validate() const;
};

struct LabeledSequence {
  std::vector<Token> tokens;
  std::vector<State> states;
};

struct DecodedSequence {
  std::vector<State> states;
  double log_prob = 0.0;  // log P(path, tokens); -inf if no path has mass
  bool zero_probability = false;
};

// Count-based estimate with add-alpha smoothing. With alpha = 0, rows that
// saw no events become uniform.
HmmParams fit_supervised(std::span<const LabeledSequence> sequences, std::size_t num_states,
                         std::size_t alphabet_size, double alpha = kDefaultAlpha);

// Log-space tables reused across calls on the same model.
class LogModel {
 public:
  explicit LogModel(const HmmParams& params);

  std::size_t num_states() const noexcept { return s_; }
  std::size_t alphabet_size() const noexcept { return v_; }
  double log_pi(std::size_t s) const { return log_pi_[s]; }
  double log_a(std::size_t i, std::size_t j) const { return log_a_[i * s_ + j]; }
  double log_b(std::size_t s, std::size_t v) const { return log_b_[s * v_ + v]; }

 private:
  std::size_t s_;
  std::size_t v_;
  std::vector<double> log_pi_;
  std::vector<double> log_a_;
  std::vector<double> log_b_;
};

// Max-product decoding in log space; every argmax prefers the lowest state
// index.
DecodedSequence viterbi_decode(const HmmParams& model, std::span<const Token> tokens);
DecodedSequence viterbi_decode(const LogModel& model, std::span<const Token> tokens);

// log P(tokens) by the scaled forward recursion; -inf when impossible.
double forward_loglik(const HmmParams& model, std::span<const Token> tokens);

// T x S matrix of P(state_t = s | tokens) by scaled forward-backward.
Matrix posterior_marginals(const HmmParams& model, std::span<const Token> tokens);

// Ancestral sampling; the same seed always yields the same sequence.
LabeledSequence sample_sequence(const HmmParams& model, std::size_t length, std::uint64_t seed);

}  // namespace qoeseq

#endif  // QOESEQ_HMM_HPP_
