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

#ifndef QOESEQ_SERIALIZATION_HPP_
#define QOESEQ_SERIALIZATION_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "qoeseq/baselines.hpp"
#include "qoeseq/hmm.hpp"
#include "qoeseq/telemetry.hpp"
#include "qoeseq/vq.hpp"

// Versioned JSON documents for every fitted artifact. Doubles are written in
// shortest round-trip form, so a load reproduces the saved values exactly.
// Loaders re-check each type's invariants and throw InvalidModel on
// violation, SchemaMismatch on a foreign version or model_type, and
// ParseError on malformed JSON.

namespace qoeseq {

inline constexpr int kFormatVersion = 1;

struct CodebookDocument {
  Codebook codebook;
  StandardizationParams standardizer;
};

struct BinningDocument {
  BinningScheme scheme;
  StandardizationParams standardizer;
};

struct HmmDocument {
  HmmParams params;
  std::string codebook_ref;
};

struct TokenClassifierDocument {
  TokenClassifier model;
  double alpha = kDefaultAlpha;
  std::string codebook_ref;
};

std::string to_json(const CodebookDocument& doc);
std::string to_json(const BinningDocument& doc);
std::string to_json(const HmmDocument& doc);
std::string to_json(const TokenClassifierDocument& doc);
std::string to_json(const GaussianNB& model);

CodebookDocument codebook_from_json(std::string_view text);
BinningDocument binning_from_json(std::string_view text);
HmmDocument hmm_from_json(std::string_view text);
TokenClassifierDocument token_classifier_from_json(std::string_view text);
GaussianNB gaussian_nb_from_json(std::string_view text);

// The `model_type` discriminator of a document.
std::string model_type_of(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
// Writes atomically enough for CLI use: truncates, writes, checks the stream.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace qoeseq

#endif  // QOESEQ_SERIALIZATION_HPP_
