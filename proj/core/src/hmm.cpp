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

#include "qoeseq/hmm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qoeseq/error.hpp"
#include "qoeseq/random.hpp"

namespace qoeseq {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_row(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidModel, what + " has an entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw Error(ErrorCode::kInvalidModel, what + " sums to " + std::to_string(sum));
  }
}

// (count + alpha) / (total + alpha * n), uniform when nothing was counted.
void normalize_counts(std::span<double> counts, double alpha) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double denom = total + alpha * static_cast<double>(counts.size());
  if (denom <= 0.0) {
    for (double& c : counts) c = 1.0 / static_cast<double>(counts.size());
    return;
  }
  for (double& c : counts) c = (c + alpha) / denom;
}

void check_tokens(std::span<const Token> tokens, std::size_t alphabet_size) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptySequence, "token sequence is empty");
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] >= alphabet_size) {
      throw Error(ErrorCode::kTokenOutOfRange,
                  "token " + std::to_string(tokens[t]) + " at t=" + std::to_string(t) +
                      " outside alphabet of size " + std::to_string(alphabet_size));
    }
  }
}

// Scaled forward pass. Row t of `alpha_hat` holds P(state_t | tokens_0..t);
// scales[t] is P(token_t | tokens_0..t-1). Returns false if some scale is 0.
bool scaled_forward(const HmmParams& m, std::span<const Token> tokens, Matrix& alpha_hat,
                    std::vector<double>& scales) {
  const std::size_t s = m.num_states();
  const std::size_t n = tokens.size();
  alpha_hat = Matrix(n, s, 0.0);
  scales.assign(n, 0.0);

  for (std::size_t t = 0; t < n; ++t) {
    auto cur = alpha_hat.row(t);
    const Token o = tokens[t];
    if (t == 0) {
      for (std::size_t j = 0; j < s; ++j) cur[j] = m.pi[j] * m.B(j, o);
    } else {
      auto prev = alpha_hat.row(t - 1);
      for (std::size_t j = 0; j < s; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s; ++i) acc += prev[i] * m.A(i, j);
        cur[j] = acc * m.B(j, o);
      }
    }
    double c = 0.0;
    for (double v : cur) c += v;
    if (!(c > 0.0)) return false;
    for (double& v : cur) v /= c;
    scales[t] = c;
  }
  return true;
}

}  // namespace

void HmmParams::validate() const {
  const std::size_t s = num_states();
  if (s == 0) throw Error(ErrorCode::kInvalidModel, "model has no states");
  if (A.rows() != s || A.cols() != s) throw Error(ErrorCode::kInvalidModel, "A must be S x S");
  if (B.rows() != s || B.cols() == 0) {
    throw Error(ErrorCode::kInvalidModel, "B must be S x V with V >= 1");
  }
  check_row(pi, "pi");
  for (std::size_t i = 0; i < s; ++i) {
    check_row(A.row(i), "A row " + std::to_string(i));
    check_row(B.row(i), "B row " + std::to_string(i));
  }
}

HmmParams fit_supervised(std::span<const LabeledSequence> sequences, std::size_t num_states,
                         std::size_t alphabet_size, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kNegativeAlpha, "alpha must be >= 0");
  if (sequences.empty()) throw Error(ErrorCode::kEmptyInput, "no training sequences");
  if (num_states == 0 || alphabet_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "num_states and alphabet_size must be positive");
  }

  HmmParams m;
  m.alpha = alpha;
  m.pi.assign(num_states, 0.0);
  m.A = Matrix(num_states, num_states, 0.0);
  m.B = Matrix(num_states, alphabet_size, 0.0);

  for (std::size_t k = 0; k < sequences.size(); ++k) {
    const auto& seq = sequences[k];
    if (seq.tokens.size() != seq.states.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "sequence " + std::to_string(k) + " has unequal token/state lengths");
    }
    if (seq.tokens.empty()) {
      throw Error(ErrorCode::kEmptyInput, "sequence " + std::to_string(k) + " is empty");
    }
    for (std::size_t t = 0; t < seq.states.size(); ++t) {
      if (seq.states[t] >= num_states || seq.tokens[t] >= alphabet_size) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "sequence " + std::to_string(k) + " t=" + std::to_string(t) +
                        " has an index out of range");
      }
    }
    m.pi[seq.states[0]] += 1.0;
    for (std::size_t t = 0; t < seq.states.size(); ++t) {
      m.B(seq.states[t], seq.tokens[t]) += 1.0;
      if (t > 0) m.A(seq.states[t - 1], seq.states[t]) += 1.0;
    }
  }

  normalize_counts(m.pi, alpha);
  for (std::size_t i = 0; i < num_states; ++i) {
    normalize_counts(m.A.row(i), alpha);
    normalize_counts(m.B.row(i), alpha);
  }
  return m;
}

LogModel::LogModel(const HmmParams& params)
    : s_(params.num_states()), v_(params.alphabet_size()) {
  params.validate();
  log_pi_.resize(s_);
  log_a_.resize(s_ * s_);
  log_b_.resize(s_ * v_);
  for (std::size_t i = 0; i < s_; ++i) {
    log_pi_[i] = std::log(params.pi[i]);
    for (std::size_t j = 0; j < s_; ++j) log_a_[i * s_ + j] = std::log(params.A(i, j));
    for (std::size_t v = 0; v < v_; ++v) log_b_[i * v_ + v] = std::log(params.B(i, v));
  }
}

DecodedSequence viterbi_decode(const HmmParams& model, std::span<const Token> tokens) {
  return viterbi_decode(LogModel(model), tokens);
}

DecodedSequence viterbi_decode(const LogModel& model, std::span<const Token> tokens) {
  check_tokens(tokens, model.alphabet_size());
  const std::size_t s = model.num_states();
  const std::size_t n = tokens.size();

  std::vector<double> delta(s);
  std::vector<double> next(s);
  std::vector<std::uint32_t> back(n * s, 0);

  for (std::size_t j = 0; j < s; ++j) delta[j] = model.log_pi(j) + model.log_b(j, tokens[0]);

  for (std::size_t t = 1; t < n; ++t) {
    const Token o = tokens[t];
    for (std::size_t j = 0; j < s; ++j) {
      double best = kNegInf;
      std::uint32_t arg = 0;
      for (std::size_t i = 0; i < s; ++i) {
        const double v = delta[i] + model.log_a(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<std::uint32_t>(i);
        }
      }
      next[j] = best + model.log_b(j, o);
      back[t * s + j] = arg;
    }
    delta.swap(next);
  }

  DecodedSequence out;
  out.log_prob = kNegInf;
  State last = 0;
  for (std::size_t j = 0; j < s; ++j) {
    if (delta[j] > out.log_prob) {
      out.log_prob = delta[j];
      last = j;
    }
  }
  out.zero_probability = out.log_prob == kNegInf;
  out.states.resize(n);
  out.states[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) {
    out.states[t - 1] = back[t * s + out.states[t]];
  }
  return out;
}

double forward_loglik(const HmmParams& model, std::span<const Token> tokens) {
  model.validate();
  check_tokens(tokens, model.alphabet_size());
  Matrix alpha_hat;
  std::vector<double> scales;
  if (!scaled_forward(model, tokens, alpha_hat, scales)) return kNegInf;
  double loglik = 0.0;
  for (double c : scales) loglik += std::log(c);
  return loglik;
}

Matrix posterior_marginals(const HmmParams& model, std::span<const Token> tokens) {
  model.validate();
  check_tokens(tokens, model.alphabet_size());
  const std::size_t s = model.num_states();
  const std::size_t n = tokens.size();

  Matrix gamma;
  std::vector<double> scales;
  if (!scaled_forward(model, tokens, gamma, scales)) {
    throw Error(ErrorCode::kZeroProbabilitySequence, "sequence has probability 0");
  }

  // beta_hat_t(i) = P(tokens_{t+1..} | state_t = i) / prod_{u>t} scales[u]
  std::vector<double> beta(s, 1.0);
  std::vector<double> prev(s);
  for (std::size_t t = n; t-- > 0;) {
    auto row = gamma.row(t);
    double total = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      row[i] *= beta[i];
      total += row[i];
    }
    for (double& g : row) g /= total;
    if (t == 0) break;
    const Token o = tokens[t];
    for (std::size_t i = 0; i < s; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) acc += model.A(i, j) * model.B(j, o) * beta[j];
      prev[i] = acc / scales[t];
    }
    beta.swap(prev);
  }
  return gamma;
}

LabeledSequence sample_sequence(const HmmParams& model, std::size_t length, std::uint64_t seed) {
  model.validate();
  if (length == 0) throw Error(ErrorCode::kInvalidArgument, "length must be >= 1");
  Rng rng(seed);
  LabeledSequence seq;
  seq.states.reserve(length);
  seq.tokens.reserve(length);
  State state = rng.categorical(model.pi);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = rng.categorical(model.A.row(state));
    seq.states.push_back(state);
    seq.tokens.push_back(rng.categorical(model.B.row(state)));
  }
  return seq;
}

}  // namespace qoeseq
