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

#include "qoeseq/error.hpp"

namespace qoeseq {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kDuplicateTimestep: return "DuplicateTimestep";
    case ErrorCode::kGapInTimesteps: return "GapInTimesteps";
    case ErrorCode::kQoEOutOfRange: return "QoEOutOfRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kInvalidStateCount: return "InvalidStateCount";
    case ErrorCode::kTooFewSessions: return "TooFewSessions";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kTooFewDistinctPoints: return "TooFewDistinctPoints";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNegativeAlpha: return "NegativeAlpha";
    case ErrorCode::kTokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kZeroProbabilitySequence: return "ZeroProbabilitySequence";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kInvalidRepetitions: return "InvalidRepetitions";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kFileMissing: return "FileMissing";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kReplayMismatch: return "ReplayMismatch";
  }
  return "Unknown";
}

}  // namespace qoeseq
