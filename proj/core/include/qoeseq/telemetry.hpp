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

#ifndef QOESEQ_TELEMETRY_HPP_
#define QOESEQ_TELEMETRY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qoeseq/matrix.hpp"

namespace qoeseq {

using State = std::size_t;

inline constexpr double kMinQoeScore = 1.0;
inline constexpr double kMaxQoeScore = 100.0;
inline constexpr int kDefaultNumStates = 5;

// One timestep of telemetry for one session.
struct FeatureRecord {
  std::string session_id;
  std::size_t t = 0;
  std::vector<double> features;
  std::optional<double> qoe;
};

// Time-ordered records of one session; t runs 0, 1, 2, ... without gaps.
struct SessionSeries {
  std::string session_id;
  std::vector<FeatureRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool labeled() const;
  // Row t holds records[t].features.
  Matrix feature_matrix() const;
};

struct Dataset {
  std::vector<SessionSeries> sessions;
  std::vector<std::string> feature_names;
  int num_states = kDefaultNumStates;

  std::size_t dim() const noexcept { return feature_names.size(); }
  std::size_t record_count() const;

  // All feature vectors, sessions concatenated in order.
  Matrix pooled_features() const;

  // Discretized QoE labels of one session. Throws MissingLabel when any
  // record has no score.
  std::vector<State> session_states(std::size_t session) const;

  // Checks the structural invariants (dimension, finiteness, timestep
  // contiguity, score range). Throws on the first violation.
  void validate() const;
};

// Column mapping for CSV ingestion. An empty feature_columns list selects
// every header column other than the session, time, and QoE columns, in
// header order.
struct CsvSchema {
  std::string session_column = "session_id";
  std::string time_column = "t";
  std::string qoe_column = "qoe";
  std::vector<std::string> feature_columns;
  int num_states = kDefaultNumStates;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset parse_csv(std::istream& in, const CsvSchema& schema = {});

// Writes the dataset in the ingest schema (session_id, t, features..., qoe).
// The qoe column is emitted when any record carries a score.
void write_csv(std::ostream& out, const Dataset& data);

struct StandardizationParams {
  std::vector<double> means;
  std::vector<double> std_devs;  // population; 0 marks a constant feature
};

StandardizationParams fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const Dataset& data, const StandardizationParams& params);
// Standardizes one vector in place.
void standardize(std::span<double> x, const StandardizationParams& params);

// Equal-width binning of [1, 100] into num_states levels.
State discretize_qoe(double score, int num_states);
// Centre of the score bin for `state`; discretize_qoe maps it back to state.
double state_midpoint(State state, int num_states);

// Whole-session split; test receives round(test_fraction * N) sessions,
// clamped to [1, N - 1].
std::pair<Dataset, Dataset> split_sessions(const Dataset& data, double test_fraction,
                                           std::uint64_t seed);

// Parameters of the synthetic telemetry generator: a Markov chain over
// QoE states with a diagonal Gaussian per state. rotation_degrees rotates
// every state's noise in the plane of features 0 and 1, producing clusters
// that are not aligned with the feature axes.
struct GeneratorSpec {
  int num_states = 0;
  Matrix means;       // S x D
  Matrix variances;   // S x D, strictly positive
  Matrix transition;  // S x S, row-stochastic
  std::vector<double> initial;  // empty = uniform
  std::size_t sessions = 0;
  std::size_t length = 0;
  double rotation_degrees = 0.0;
  std::vector<std::string> feature_names;  // empty = f0..f{D-1}

  // Throws InvalidSpec on any violated precondition.
  void validate() const;
};

// Also returns the sampled hidden state paths when `paths` is non-null.
Dataset synthesize_dataset(const GeneratorSpec& spec, std::uint64_t seed,
                           std::vector<std::vector<State>>* paths = nullptr);

}  // namespace qoeseq

#endif  // QOESEQ_TELEMETRY_HPP_
