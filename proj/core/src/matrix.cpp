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

#include "qoeseq/matrix.hpp"

#include "qoeseq/error.hpp"

namespace qoeseq {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  for (const auto& r : rows) {
    push_row(std::span<const double>(r.begin(), r.size()));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  for (const auto& r : rows) m.push_row(r);
  return m;
}

void Matrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row has " + std::to_string(values.size()) + " columns, expected " +
                    std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto v = row(r);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

}  // namespace qoeseq
