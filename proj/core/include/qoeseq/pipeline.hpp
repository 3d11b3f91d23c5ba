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

#ifndef QOESEQ_PIPELINE_HPP_
#define QOESEQ_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qoeseq/baselines.hpp"
#include "qoeseq/evaluation.hpp"
#include "qoeseq/hmm.hpp"
#include "qoeseq/serialization.hpp"
#include "qoeseq/telemetry.hpp"
#include "qoeseq/vq.hpp"

namespace qoeseq {

// Run configuration shared by every CLI subcommand. Exactly one of
// input_csv / synth is used as the data source by `pipeline`.
struct PipelineConfig {
  std::optional<std::filesystem::path> input_csv;
  std::optional<GeneratorSpec> synth;
  std::vector<std::string> feature_columns;
  int states = kDefaultNumStates;
  std::size_t codebook_size = kDefaultCodebookSize;
  std::size_t bins = kDefaultBinsPerFeature;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::size_t reps = kDefaultRepetitions;
  std::size_t warmup = kDefaultWarmup;
  std::size_t kmeans_max_iters = 300;
  double kmeans_tol = 1e-6;
  std::filesystem::path out = "qoeseq_out";

  // Throws ConfigInvalid when a value is outside its consumer's range.
  void validate() const;
  CsvSchema schema() const;
};

// Unknown keys are rejected. A string-valued "synth" or "input" is resolved
// relative to `base_dir`.
PipelineConfig config_from_json(std::string_view text,
                                const std::filesystem::path& base_dir = {});
// Snapshot with the generator spec inlined; config_from_json reads it back.
std::string config_to_json(const PipelineConfig& config);

GeneratorSpec generator_spec_from_json(std::string_view text);
std::string generator_spec_to_json(const GeneratorSpec& spec);

// Standardize-then-quantize front ends. Both are immutable after fitting.
struct VqQuantizer {
  StandardizationParams standardizer;
  Codebook codebook;

  std::size_t alphabet_size() const noexcept { return codebook.size(); }
  std::vector<Token> encode(const SessionSeries& session) const;
};

struct BinnedQuantizer {
  StandardizationParams standardizer;
  BinningScheme scheme;

  std::size_t alphabet_size() const { return scheme.alphabet_size(); }
  std::vector<Token> encode(const SessionSeries& session) const;
};

VqQuantizer fit_vq_quantizer(const Dataset& train, const KMeansOptions& options);
BinnedQuantizer fit_binned_quantizer(const Dataset& train, std::size_t bins);

// Pairs each session's tokens with its discretized labels.
template <class Quantizer>
std::vector<LabeledSequence> labeled_sequences(const Dataset& data, const Quantizer& q) {
  std::vector<LabeledSequence> out;
  out.reserve(data.sessions.size());
  for (std::size_t k = 0; k < data.sessions.size(); ++k) {
    out.push_back({q.encode(data.sessions[k]), data.session_states(k)});
  }
  return out;
}

struct ExperimentOptions {
  KMeansOptions kmeans;
  std::size_t bins = kDefaultBinsPerFeature;
  double alpha = kDefaultAlpha;
  LatencyOptions latency;
  bool include_literature = true;
};

// Everything fitted on the training split, plus the test-split comparison.
struct ExperimentResult {
  VqQuantizer vq;
  BinnedQuantizer binned;
  HmmParams vq_hmm;
  HmmParams binned_hmm;
  TokenClassifier token_classifier;
  GaussianNB gaussian_nb;
  ComparisonReport report;
};

inline constexpr const char* kVqHmmName = "vq_hmm";
inline constexpr const char* kBinnedHmmName = "binned_hmm";
inline constexpr const char* kTokenClassifierName = "token_classifier";
inline constexpr const char* kGaussianNbName = "gaussian_nb";

ExperimentResult run_experiment(const Dataset& train, const Dataset& test,
                                const ExperimentOptions& options);

// Loads or synthesizes the dataset named by the config.
Dataset load_dataset(const PipelineConfig& config);

struct PipelineOutputs {
  ExperimentResult result;
  // Written files relative to config.out, in a fixed order.
  std::vector<std::filesystem::path> files;
  // Subset of `files` whose content depends on wall-clock timing.
  std::vector<std::filesystem::path> timing_files;
};

// ingest -> split -> standardize -> fit quantizers -> fit models -> decode
// -> evaluate, writing every artifact under config.out.
PipelineOutputs run_pipeline(const PipelineConfig& config);

// CSV: session_id,t,token[,state]
void write_tokens_csv(std::ostream& out, const Dataset& data,
                      const std::vector<std::vector<Token>>& tokens, bool with_states);
// Reads the format above; states are empty when the column is absent.
struct TokenTable {
  std::vector<std::string> session_ids;
  std::vector<LabeledSequence> sequences;
};
TokenTable read_tokens_csv(std::istream& in);

// CSV: sequence,t,state,token
void write_samples_csv(std::ostream& out, const std::vector<LabeledSequence>& samples);

}  // namespace qoeseq

#endif  // QOESEQ_PIPELINE_HPP_
