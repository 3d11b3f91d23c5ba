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

#include "qoeseq/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "qoeseq/error.hpp"

namespace qoeseq {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) config_error(std::string("unknown ") + what + " key '" + key + "'");
  }
}

std::uint64_t read_u64(const json& v, const char* key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
  config_error(std::string(key) + " must be a non-negative integer");
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

GeneratorSpec generator_spec_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "generator spec must be an object");
  static const std::set<std::string> kKeys = {"num_states", "means",          "variances",
                                              "transition", "initial",        "sessions",
                                              "length",     "rotation_degrees", "feature_names"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kInvalidSpec, "unknown spec key '" + key + "'");
  }
  try {
    GeneratorSpec spec;
    spec.num_states = j.at("num_states").get<int>();
    spec.means = Matrix::from_rows(j.at("means").get<std::vector<std::vector<double>>>());
    spec.variances = Matrix::from_rows(j.at("variances").get<std::vector<std::vector<double>>>());
    spec.transition =
        Matrix::from_rows(j.at("transition").get<std::vector<std::vector<double>>>());
    if (j.contains("initial")) spec.initial = j.at("initial").get<std::vector<double>>();
    spec.sessions = j.at("sessions").get<std::size_t>();
    spec.length = j.at("length").get<std::size_t>();
    spec.rotation_degrees = j.value("rotation_degrees", 0.0);
    if (j.contains("feature_names")) {
      spec.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDimensionMismatch) throw Error(ErrorCode::kInvalidSpec, e.what());
    throw;
  }
}

json generator_spec_json(const GeneratorSpec& spec) {
  json j;
  j["num_states"] = spec.num_states;
  j["means"] = matrix_json(spec.means);
  j["variances"] = matrix_json(spec.variances);
  j["transition"] = matrix_json(spec.transition);
  if (!spec.initial.empty()) j["initial"] = spec.initial;
  j["sessions"] = spec.sessions;
  j["length"] = spec.length;
  if (spec.rotation_degrees != 0.0) j["rotation_degrees"] = spec.rotation_degrees;
  if (!spec.feature_names.empty()) j["feature_names"] = spec.feature_names;
  return j;
}

std::vector<std::string> split_simple(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::size_t parse_size(const std::string& cell, std::size_t row) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::kNonNumericCell,
                "row " + std::to_string(row) + ": expected an integer, got '" + cell + "'");
  }
  return v;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_text_file(path, ss.str());
}

}  // namespace

void PipelineConfig::validate() const {
  if (states < 2) config_error("states must be >= 2");
  if (codebook_size < 1) config_error("codebook_size must be >= 1");
  if (bins < 1) config_error("bins must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) config_error("alpha must be finite and >= 0");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) config_error("test_fraction must lie in (0, 1)");
  if (reps < 1) config_error("reps must be >= 1");
  if (kmeans_max_iters < 1) config_error("kmeans_max_iters must be >= 1");
  if (!(kmeans_tol >= 0.0)) config_error("kmeans_tol must be >= 0");
  if (input_csv && synth) config_error("set at most one of input and synth");
  if (synth && synth->num_states != states) {
    config_error("states (" + std::to_string(states) + ") differs from the generator's num_states (" +
                 std::to_string(synth->num_states) + ")");
  }
}

CsvSchema PipelineConfig::schema() const {
  CsvSchema s;
  s.feature_columns = feature_columns;
  s.num_states = states;
  return s;
}

PipelineConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "input", "synth",  "feature_columns", "states", "codebook_size", "bins",
      "alpha", "seed",   "test_fraction",   "reps",   "warmup",        "kmeans_max_iters",
      "kmeans_tol", "out"};
  reject_unknown_keys(j, kKeys, "config");

  PipelineConfig c;
  try {
    if (j.contains("input")) c.input_csv = base_dir / j.at("input").get<std::string>();
    if (j.contains("synth")) {
      const json& s = j.at("synth");
      if (s.is_string()) {
        c.synth = generator_spec_from_json(read_text_file(base_dir / s.get<std::string>()));
      } else {
        c.synth = generator_spec_from(s);
      }
      c.states = c.synth->num_states;
    }
    if (j.contains("feature_columns")) {
      c.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    }
    if (j.contains("states")) c.states = j.at("states").get<int>();
    if (j.contains("codebook_size")) c.codebook_size = read_u64(j.at("codebook_size"), "codebook_size");
    if (j.contains("bins")) c.bins = read_u64(j.at("bins"), "bins");
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) c.seed = read_u64(j.at("seed"), "seed");
    if (j.contains("test_fraction")) c.test_fraction = j.at("test_fraction").get<double>();
    if (j.contains("reps")) c.reps = read_u64(j.at("reps"), "reps");
    if (j.contains("warmup")) c.warmup = read_u64(j.at("warmup"), "warmup");
    if (j.contains("kmeans_max_iters")) {
      c.kmeans_max_iters = read_u64(j.at("kmeans_max_iters"), "kmeans_max_iters");
    }
    if (j.contains("kmeans_tol")) c.kmeans_tol = j.at("kmeans_tol").get<double>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  if (c.input_csv) j["input"] = c.input_csv->string();
  if (c.synth) j["synth"] = generator_spec_json(*c.synth);
  if (!c.feature_columns.empty()) j["feature_columns"] = c.feature_columns;
  j["states"] = c.states;
  j["codebook_size"] = c.codebook_size;
  j["bins"] = c.bins;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  j["reps"] = c.reps;
  j["warmup"] = c.warmup;
  j["kmeans_max_iters"] = c.kmeans_max_iters;
  j["kmeans_tol"] = c.kmeans_tol;
  j["out"] = c.out.string();
  return j.dump(2) + "\n";
}

GeneratorSpec generator_spec_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
  return generator_spec_from(j);
}

std::string generator_spec_to_json(const GeneratorSpec& spec) {
  return generator_spec_json(spec).dump(2) + "\n";
}

std::vector<Token> VqQuantizer::encode(const SessionSeries& session) const {
  std::vector<Token> tokens;
  tokens.reserve(session.size());
  std::vector<double> x;
  for (const auto& r : session.records) {
    x = r.features;
    standardize(x, standardizer);
    tokens.push_back(vq_encode(codebook, x));
  }
  return tokens;
}

std::vector<Token> BinnedQuantizer::encode(const SessionSeries& session) const {
  std::vector<Token> tokens;
  tokens.reserve(session.size());
  std::vector<double> x;
  for (const auto& r : session.records) {
    x = r.features;
    standardize(x, standardizer);
    tokens.push_back(binning_encode(scheme, x));
  }
  return tokens;
}

VqQuantizer fit_vq_quantizer(const Dataset& train, const KMeansOptions& options) {
  VqQuantizer q;
  q.standardizer = fit_standardizer(train);
  q.codebook = kmeans_fit(apply_standardizer(train, q.standardizer).pooled_features(), options);
  return q;
}

BinnedQuantizer fit_binned_quantizer(const Dataset& train, std::size_t bins) {
  BinnedQuantizer q;
  q.standardizer = fit_standardizer(train);
  q.scheme = binning_fit(apply_standardizer(train, q.standardizer).pooled_features(), bins);
  return q;
}

ExperimentResult run_experiment(const Dataset& train, const Dataset& test,
                                const ExperimentOptions& options) {
  if (train.num_states != test.num_states || train.dim() != test.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and test disagree on S or D");
  }
  const auto s = static_cast<std::size_t>(train.num_states);

  ExperimentResult r;
  r.vq = fit_vq_quantizer(train, options.kmeans);
  r.binned.standardizer = r.vq.standardizer;
  r.binned.scheme =
      binning_fit(apply_standardizer(train, r.binned.standardizer).pooled_features(), options.bins);

  const auto vq_train = labeled_sequences(train, r.vq);
  const auto binned_train = labeled_sequences(train, r.binned);
  r.vq_hmm = fit_supervised(vq_train, s, r.vq.alphabet_size(), options.alpha);
  r.binned_hmm = fit_supervised(binned_train, s, r.binned.alphabet_size(), options.alpha);
  r.token_classifier = token_classifier_fit(vq_train, s, r.vq.alphabet_size(), options.alpha);
  r.gaussian_nb = gnb_fit(apply_standardizer(train, r.vq.standardizer));

  const LogModel vq_log(r.vq_hmm);
  const LogModel binned_log(r.binned_hmm);
  auto standardized = [&](const SessionSeries& session) {
    Matrix m = session.feature_matrix();
    for (std::size_t t = 0; t < m.rows(); ++t) standardize(m.row(t), r.vq.standardizer);
    return m;
  };

  const std::vector<ModelDescriptor> models = {
      {kVqHmmName,
       [&](const SessionSeries& x) { return viterbi_decode(vq_log, r.vq.encode(x)).states; },
       [&](const SessionSeries& x) { return posterior_marginals(r.vq_hmm, r.vq.encode(x)); }},
      {kBinnedHmmName,
       [&](const SessionSeries& x) {
         return viterbi_decode(binned_log, r.binned.encode(x)).states;
       },
       [&](const SessionSeries& x) {
         return posterior_marginals(r.binned_hmm, r.binned.encode(x));
       }},
      {kTokenClassifierName,
       [&](const SessionSeries& x) { return token_classify(r.token_classifier, r.vq.encode(x)); },
       nullptr},
      {kGaussianNbName,
       [&](const SessionSeries& x) { return gnb_classify(r.gaussian_nb, standardized(x)); },
       nullptr},
  };
  r.report = compare_models(test, models, options.latency, options.include_literature);
  return r;
}

Dataset load_dataset(const PipelineConfig& config) {
  if (config.input_csv) return load_csv(*config.input_csv, config.schema());
  if (config.synth) return synthesize_dataset(*config.synth, config.seed);
  config_error("no data source: set input or synth");
}

PipelineOutputs run_pipeline(const PipelineConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config);
  auto [train, test] = split_sessions(data, config.test_fraction, config.seed);

  ExperimentOptions options;
  options.kmeans.k = config.codebook_size;
  options.kmeans.seed = config.seed;
  options.kmeans.max_iters = config.kmeans_max_iters;
  options.kmeans.tol = config.kmeans_tol;
  options.bins = config.bins;
  options.alpha = config.alpha;
  options.latency.repetitions = config.reps;
  options.latency.warmup = config.warmup;

  PipelineOutputs outputs;
  outputs.result = run_experiment(train, test, options);
  const ExperimentResult& r = outputs.result;

  const auto& dir = config.out;
  ensure_directory(dir);
  auto emit = [&](const std::filesystem::path& rel, std::string_view text) {
    ensure_directory((dir / rel).parent_path());
    write_text_file(dir / rel, text);
    outputs.files.push_back(rel);
  };
  auto emit_csv = [&](const std::filesystem::path& rel, auto&& writer) {
    std::ostringstream ss;
    writer(ss);
    emit(rel, ss.str());
  };

  emit_csv("train.csv", [&](std::ostream& o) { write_csv(o, train); });
  emit_csv("test.csv", [&](std::ostream& o) { write_csv(o, test); });
  emit("codebook.json", to_json(CodebookDocument{r.vq.codebook, r.vq.standardizer}));
  emit("binning.json", to_json(BinningDocument{r.binned.scheme, r.binned.standardizer}));
  emit("hmm_vq.json", to_json(HmmDocument{r.vq_hmm, "codebook.json"}));
  emit("hmm_binned.json", to_json(HmmDocument{r.binned_hmm, "binning.json"}));
  emit("token_classifier.json",
       to_json(TokenClassifierDocument{r.token_classifier, config.alpha, "codebook.json"}));
  emit("gaussian_nb.json", to_json(r.gaussian_nb));
  emit_csv("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, r.report.models); });
  emit_csv("class_metrics.csv",
           [&](std::ostream& o) { write_class_metrics_csv(o, r.report.models); });
  emit_csv("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, r.report.rows); });
  outputs.timing_files.push_back("comparison.csv");
  for (const auto& model : r.report.models) {
    for (const auto& trace : model.traces) {
      emit_csv(std::filesystem::path("traces") / model.name / (trace.session_id + ".csv"),
               [&](std::ostream& o) { write_trace_csv(o, trace); });
    }
  }
  return outputs;
}

void write_tokens_csv(std::ostream& out, const Dataset& data,
                      const std::vector<std::vector<Token>>& tokens, bool with_states) {
  if (tokens.size() != data.sessions.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one token list per session required");
  }
  out << "session_id,t,token" << (with_states ? ",state" : "") << '\n';
  for (std::size_t k = 0; k < data.sessions.size(); ++k) {
    const auto& session = data.sessions[k];
    std::vector<State> states;
    if (with_states) states = data.session_states(k);
    for (std::size_t t = 0; t < tokens[k].size(); ++t) {
      out << session.session_id << ',' << t << ',' << tokens[k][t];
      if (with_states) out << ',' << states[t];
      out << '\n';
    }
  }
}

TokenTable read_tokens_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_simple(line);
  if (header.size() < 3 || header[0] != "session_id" || header[1] != "t" || header[2] != "token") {
    throw Error(ErrorCode::kMissingColumn, "token file needs session_id,t,token columns");
  }
  const bool with_states = header.size() >= 4 && header[3] == "state";

  TokenTable table;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_simple(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParseError, "row " + std::to_string(row) + " has wrong cell count");
    }
    auto [it, inserted] = index.try_emplace(cells[0], table.sequences.size());
    if (inserted) {
      table.session_ids.push_back(cells[0]);
      table.sequences.emplace_back();
    }
    auto& seq = table.sequences[it->second];
    const std::size_t t = parse_size(cells[1], row);
    if (t != seq.tokens.size()) {
      throw Error(t < seq.tokens.size() ? ErrorCode::kDuplicateTimestep
                                        : ErrorCode::kGapInTimesteps,
                  "session '" + cells[0] + "' row " + std::to_string(row));
    }
    seq.tokens.push_back(parse_size(cells[2], row));
    if (with_states) seq.states.push_back(parse_size(cells[3], row));
  }
  return table;
}

void write_samples_csv(std::ostream& out, const std::vector<LabeledSequence>& samples) {
  out << "sequence,t,state,token\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t t = 0; t < samples[k].tokens.size(); ++t) {
      out << k << ',' << t << ',' << samples[k].states[t] << ',' << samples[k].tokens[t] << '\n';
    }
  }
}

}  // namespace qoeseq
