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

#include "qoeseq/baselines.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qoeseq/error.hpp"

namespace qoeseq {
namespace {

void check_distribution(std::span<const double> row, const std::string& what) {
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

void smooth(std::span<double> counts, double alpha) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double denom = total + alpha * static_cast<double>(counts.size());
  for (double& c : counts) {
    c = denom > 0.0 ? (c + alpha) / denom : 1.0 / static_cast<double>(counts.size());
  }
}

}  // namespace

void TokenClassifier::validate() const {
  if (priors.empty() || likelihoods.rows() != priors.size() || likelihoods.cols() == 0) {
    throw Error(ErrorCode::kInvalidModel, "token classifier shapes disagree");
  }
  check_distribution(priors, "priors");
  for (std::size_t s = 0; s < priors.size(); ++s) {
    check_distribution(likelihoods.row(s), "likelihood row " + std::to_string(s));
  }
}

TokenClassifier token_classifier_fit(std::span<const LabeledSequence> sequences,
                                     std::size_t num_states, std::size_t alphabet_size,
                                     double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kNegativeAlpha, "alpha must be >= 0");
  if (sequences.empty()) throw Error(ErrorCode::kEmptyInput, "no training sequences");
  if (num_states == 0 || alphabet_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "num_states and alphabet_size must be positive");
  }
  TokenClassifier m;
  m.priors.assign(num_states, 0.0);
  m.likelihoods = Matrix(num_states, alphabet_size, 0.0);
  for (const auto& seq : sequences) {
    if (seq.tokens.size() != seq.states.size()) {
      throw Error(ErrorCode::kLengthMismatch, "unequal token/state lengths");
    }
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      if (seq.states[t] >= num_states || seq.tokens[t] >= alphabet_size) {
        throw Error(ErrorCode::kIndexOutOfRange, "index out of range at t=" + std::to_string(t));
      }
      m.priors[seq.states[t]] += 1.0;
      m.likelihoods(seq.states[t], seq.tokens[t]) += 1.0;
    }
  }
  smooth(m.priors, alpha);
  for (std::size_t s = 0; s < num_states; ++s) smooth(m.likelihoods.row(s), alpha);
  return m;
}

std::vector<State> token_classify(const TokenClassifier& model, std::span<const Token> tokens) {
  const std::size_t s_count = model.num_states();
  std::vector<State> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token o = tokens[t];
    if (o >= model.alphabet_size()) {
      throw Error(ErrorCode::kTokenOutOfRange,
                  "token " + std::to_string(o) + " at t=" + std::to_string(t));
    }
    State best = 0;
    double best_score = -1.0;
    for (State s = 0; s < s_count; ++s) {
      const double score = model.priors[s] * model.likelihoods(s, o);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    out.push_back(best);
  }
  return out;
}

void GaussianNB::validate() const {
  const std::size_t s = priors.size();
  if (s == 0 || means.rows() != s || variances.rows() != s || variances.cols() != means.cols()) {
    throw Error(ErrorCode::kInvalidModel, "gaussian naive Bayes shapes disagree");
  }
  check_distribution(priors, "priors");
  for (double v : variances.data()) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidModel, "variances must be positive");
    }
  }
}

GaussianNB gnb_fit(const Matrix& features, std::span<const State> labels,
                   std::size_t num_states) {
  if (features.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  if (labels.size() != features.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "labels and feature rows differ in count");
  }
  if (num_states == 0) throw Error(ErrorCode::kInvalidArgument, "num_states must be positive");
  const std::size_t d = features.cols();

  GaussianNB m;
  m.priors.assign(num_states, 0.0);
  m.means = Matrix(num_states, d, 0.0);
  m.variances = Matrix(num_states, d, 0.0);
  std::vector<double> counts(num_states, 0.0);

  for (std::size_t i = 0; i < features.rows(); ++i) {
    if (labels[i] >= num_states) {
      throw Error(ErrorCode::kIndexOutOfRange, "label out of range at row " + std::to_string(i));
    }
    counts[labels[i]] += 1.0;
    auto mu = m.means.row(labels[i]);
    auto x = features.row(i);
    for (std::size_t j = 0; j < d; ++j) mu[j] += x[j];
  }
  for (std::size_t s = 0; s < num_states; ++s) {
    if (counts[s] == 0.0) continue;
    for (double& mu : m.means.row(s)) mu /= counts[s];
  }
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto mu = m.means.row(labels[i]);
    auto var = m.variances.row(labels[i]);
    auto x = features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = x[j] - mu[j];
      var[j] += dev * dev;
    }
  }

  double prior_total = 0.0;
  for (std::size_t s = 0; s < num_states; ++s) {
    auto var = m.variances.row(s);
    if (counts[s] == 0.0) {
      // EmptyClass: no data, so a unit Gaussian at the origin and a floor prior.
      for (double& v : var) v = 1.0;
      m.priors[s] = kEmptyClassPrior;
    } else {
      for (double& v : var) v = std::max(v / counts[s], kVarianceFloor);
      m.priors[s] = counts[s] / static_cast<double>(features.rows());
    }
    prior_total += m.priors[s];
  }
  for (double& p : m.priors) p /= prior_total;
  return m;
}

GaussianNB gnb_fit(const Dataset& train) {
  Matrix features;
  std::vector<State> labels;
  for (std::size_t k = 0; k < train.sessions.size(); ++k) {
    const auto states = train.session_states(k);
    for (std::size_t t = 0; t < states.size(); ++t) {
      features.push_row(train.sessions[k].records[t].features);
      labels.push_back(states[t]);
    }
  }
  if (features.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  return gnb_fit(features, labels, static_cast<std::size_t>(train.num_states));
}

State gnb_predict(const GaussianNB& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) + " features, model has " +
                    std::to_string(model.dim()));
  }
  State best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (State s = 0; s < model.num_states(); ++s) {
    double score = std::log(model.priors[s]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = model.variances(s, j);
      const double dev = x[j] - model.means(s, j);
      score += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * dev * dev / var;
    }
    if (score > best_score) {
      best_score = score;
      best = s;
    }
  }
  return best;
}

std::vector<State> gnb_classify(const GaussianNB& model, const Matrix& features) {
  std::vector<State> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out.push_back(gnb_predict(model, features.row(i)));
  return out;
}

std::vector<State> gnb_classify(const GaussianNB& model, const SessionSeries& session) {
  std::vector<State> out;
  out.reserve(session.size());
  for (const auto& r : session.records) out.push_back(gnb_predict(model, r.features));
  return out;
}

}  // namespace qoeseq
