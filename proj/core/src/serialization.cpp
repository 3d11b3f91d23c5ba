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

#include "qoeseq/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qoeseq/error.hpp"

namespace qoeseq {
namespace {

using nlohmann::json;

constexpr const char* kCodebookType = "codebook";
constexpr const char* kBinningType = "binning";
constexpr const char* kHmmType = "hmm";
constexpr const char* kTokenClassifierType = "token_classifier";
constexpr const char* kGaussianNbType = "gaussian_nb";

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  if (!j.is_array() || j.size() != rows) {
    throw Error(ErrorCode::kInvalidModel, std::string(name) + " must have " +
                                              std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto values = j[r].get<std::vector<double>>();
    if (values.size() != cols) {
      throw Error(ErrorCode::kInvalidModel, std::string(name) + " row " + std::to_string(r) +
                                                " must have " + std::to_string(cols) +
                                                " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = values[c];
  }
  return m;
}

json standardizer_to_json(const StandardizationParams& p) {
  return json{{"means", p.means}, {"std_devs", p.std_devs}};
}

StandardizationParams standardizer_from_json(const json& j, std::size_t dim) {
  StandardizationParams p;
  p.means = j.at("means").get<std::vector<double>>();
  p.std_devs = j.at("std_devs").get<std::vector<double>>();
  if (p.means.size() != dim || p.std_devs.size() != dim) {
    throw Error(ErrorCode::kInvalidModel, "standardizer dimension differs from D");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(p.means[i]) || !(p.std_devs[i] >= 0.0) || !std::isfinite(p.std_devs[i])) {
      throw Error(ErrorCode::kInvalidModel, "standardizer entries must be finite, std >= 0");
    }
  }
  return p;
}

json header(const char* type) { return json{{"version", kFormatVersion}, {"model_type", type}}; }

// Parses and checks version and model_type; wraps library exceptions.
template <class Fn>
auto load_document(std::string_view text, const char* type, Fn&& body) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "document must be a JSON object");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) {
      throw Error(ErrorCode::kSchemaMismatch, "unsupported format version " +
                                                  std::to_string(version) + " (expected " +
                                                  std::to_string(kFormatVersion) + ")");
    }
    const std::string actual = j.value("model_type", std::string(type));
    if (actual != type) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "expected model_type '" + std::string(type) + "', found '" + actual + "'");
    }
    return body(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::size_t positive_size(const json& j, const char* key) {
  const auto v = j.at(key).get<long long>();
  if (v < 1) throw Error(ErrorCode::kInvalidModel, std::string(key) + " must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string to_json(const CodebookDocument& doc) {
  json j = header(kCodebookType);
  j["K"] = doc.codebook.size();
  j["D"] = doc.codebook.dim();
  j["centroids"] = matrix_to_json(doc.codebook.centroids);
  j["inertia"] = doc.codebook.inertia;
  j["seed"] = doc.codebook.seed;
  j["standardizer"] = standardizer_to_json(doc.standardizer);
  return j.dump(2) + "\n";
}

CodebookDocument codebook_from_json(std::string_view text) {
  return load_document(text, kCodebookType, [](const json& j) {
    CodebookDocument doc;
    const std::size_t k = positive_size(j, "K");
    const std::size_t d = positive_size(j, "D");
    doc.codebook.centroids = matrix_from_json(j.at("centroids"), k, d, "centroids");
    doc.codebook.inertia = j.at("inertia").get<double>();
    doc.codebook.seed = j.at("seed").get<std::uint64_t>();
    for (double v : doc.codebook.centroids.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidModel, "non-finite centroid");
    }
    if (!(doc.codebook.inertia >= 0.0)) {
      throw Error(ErrorCode::kInvalidModel, "inertia must be >= 0");
    }
    doc.standardizer = standardizer_from_json(j.at("standardizer"), d);
    return doc;
  });
}

std::string to_json(const BinningDocument& doc) {
  json j = header(kBinningType);
  j["B"] = doc.scheme.bins;
  j["D"] = doc.scheme.dim();
  j["edges"] = doc.scheme.edges;
  j["standardizer"] = standardizer_to_json(doc.standardizer);
  return j.dump(2) + "\n";
}

BinningDocument binning_from_json(std::string_view text) {
  return load_document(text, kBinningType, [](const json& j) {
    BinningDocument doc;
    doc.scheme.bins = positive_size(j, "B");
    const std::size_t d = positive_size(j, "D");
    doc.scheme.edges = j.at("edges").get<std::vector<std::vector<double>>>();
    if (doc.scheme.edges.size() != d) throw Error(ErrorCode::kInvalidModel, "edges must have D rows");
    for (const auto& e : doc.scheme.edges) {
      if (!e.empty() && e.size() != doc.scheme.bins - 1) {
        throw Error(ErrorCode::kInvalidModel, "each feature needs B-1 edges or none");
      }
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!std::isfinite(e[i]) || (i > 0 && !(e[i] > e[i - 1]))) {
          throw Error(ErrorCode::kInvalidModel, "edges must be finite and strictly increasing");
        }
      }
    }
    doc.standardizer = standardizer_from_json(j.at("standardizer"), d);
    return doc;
  });
}

std::string to_json(const HmmDocument& doc) {
  const auto& p = doc.params;
  json j = header(kHmmType);
  j["S"] = p.num_states();
  j["V"] = p.alphabet_size();
  j["pi"] = p.pi;
  j["A"] = matrix_to_json(p.A);
  j["B"] = matrix_to_json(p.B);
  j["alpha"] = p.alpha;
  j["codebook_ref"] = doc.codebook_ref;
  return j.dump(2) + "\n";
}

HmmDocument hmm_from_json(std::string_view text) {
  return load_document(text, kHmmType, [](const json& j) {
    HmmDocument doc;
    const std::size_t s = positive_size(j, "S");
    const std::size_t v = positive_size(j, "V");
    doc.params.pi = j.at("pi").get<std::vector<double>>();
    if (doc.params.pi.size() != s) throw Error(ErrorCode::kInvalidModel, "pi must have S entries");
    doc.params.A = matrix_from_json(j.at("A"), s, s, "A");
    doc.params.B = matrix_from_json(j.at("B"), s, v, "B");
    doc.params.alpha = j.value("alpha", 0.0);
    doc.codebook_ref = j.value("codebook_ref", std::string());
    doc.params.validate();
    return doc;
  });
}

std::string to_json(const TokenClassifierDocument& doc) {
  json j = header(kTokenClassifierType);
  j["S"] = doc.model.num_states();
  j["V"] = doc.model.alphabet_size();
  j["priors"] = doc.model.priors;
  j["likelihoods"] = matrix_to_json(doc.model.likelihoods);
  j["alpha"] = doc.alpha;
  j["codebook_ref"] = doc.codebook_ref;
  return j.dump(2) + "\n";
}

TokenClassifierDocument token_classifier_from_json(std::string_view text) {
  return load_document(text, kTokenClassifierType, [](const json& j) {
    TokenClassifierDocument doc;
    const std::size_t s = positive_size(j, "S");
    const std::size_t v = positive_size(j, "V");
    doc.model.priors = j.at("priors").get<std::vector<double>>();
    if (doc.model.priors.size() != s) {
      throw Error(ErrorCode::kInvalidModel, "priors must have S entries");
    }
    doc.model.likelihoods = matrix_from_json(j.at("likelihoods"), s, v, "likelihoods");
    doc.alpha = j.value("alpha", kDefaultAlpha);
    doc.codebook_ref = j.value("codebook_ref", std::string());
    doc.model.validate();
    return doc;
  });
}

std::string to_json(const GaussianNB& model) {
  json j = header(kGaussianNbType);
  j["S"] = model.num_states();
  j["D"] = model.dim();
  j["priors"] = model.priors;
  j["means"] = matrix_to_json(model.means);
  j["variances"] = matrix_to_json(model.variances);
  return j.dump(2) + "\n";
}

GaussianNB gaussian_nb_from_json(std::string_view text) {
  return load_document(text, kGaussianNbType, [](const json& j) {
    GaussianNB m;
    const std::size_t s = positive_size(j, "S");
    const std::size_t d = positive_size(j, "D");
    m.priors = j.at("priors").get<std::vector<double>>();
    if (m.priors.size() != s) throw Error(ErrorCode::kInvalidModel, "priors must have S entries");
    m.means = matrix_from_json(j.at("means"), s, d, "means");
    m.variances = matrix_from_json(j.at("variances"), s, d, "variances");
    m.validate();
    return m;
  });
}

std::string model_type_of(std::string_view text) {
  try {
    const json j = json::parse(text);
    return j.at("model_type").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileMissing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace qoeseq
