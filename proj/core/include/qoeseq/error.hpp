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

#ifndef QOESEQ_ERROR_HPP_
#define QOESEQ_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace qoeseq {

enum class ErrorCode {
  // ingest
  kMissingColumn,
  kNonNumericCell,
  kDuplicateTimestep,
  kGapInTimesteps,
  kQoEOutOfRange,
  kEmptyDataset,
  kDimensionMismatch,
  kScoreOutOfRange,
  kInvalidStateCount,
  kTooFewSessions,
  kInvalidSpec,
  // quantization
  kTooFewDistinctPoints,
  kNonFiniteInput,
  kEmptyInput,
  // hmm / baselines
  kIndexOutOfRange,
  kNegativeAlpha,
  kTokenOutOfRange,
  kEmptySequence,
  kZeroProbabilitySequence,
  kInvalidModel,
  kMissingLabel,
  // evaluation
  kLengthMismatch,
  kEmptyMatrix,
  kInvalidRepetitions,
  // tooling
  kConfigInvalid,
  kFileMissing,
  kSchemaMismatch,
  kParseError,
  kIoError,
  kInvalidArgument,
  kReplayMismatch,
};

// Stable identifier, e.g. "GapInTimesteps". Used in CLI error lines.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qoeseq

#endif  // QOESEQ_ERROR_HPP_
