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

#include "qoeseq/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "qoeseq/error.hpp"
#include "qoeseq/random.hpp"

namespace qoeseq {
namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string cell_location(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

bool getline_crlf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void check_num_states(int num_states) {
  if (num_states < 2) {
    throw Error(ErrorCode::kInvalidStateCount,
                "num_states must be >= 2, got " + std::to_string(num_states));
  }
}

}  // namespace

bool SessionSeries::labeled() const {
  return std::all_of(records.begin(), records.end(),
                     [](const FeatureRecord& r) { return r.qoe.has_value(); });
}

Matrix SessionSeries::feature_matrix() const {
  Matrix m;
  for (const auto& r : records) m.push_row(r.features);
  return m;
}

std::size_t Dataset::record_count() const {
  std::size_t n = 0;
  for (const auto& s : sessions) n += s.size();
  return n;
}

Matrix Dataset::pooled_features() const {
  Matrix m;
  for (const auto& s : sessions) {
    for (const auto& r : s.records) m.push_row(r.features);
  }
  return m;
}

std::vector<State> Dataset::session_states(std::size_t session) const {
  const auto& series = sessions.at(session);
  std::vector<State> states;
  states.reserve(series.size());
  for (const auto& r : series.records) {
    if (!r.qoe) {
      throw Error(ErrorCode::kMissingLabel, "session '" + series.session_id +
                                                "' has no qoe score at t=" +
                                                std::to_string(r.t));
    }
    // A single-state dataset can only come from the generator.
    states.push_back(num_states == 1 ? 0 : discretize_qoe(*r.qoe, num_states));
  }
  return states;
}

void Dataset::validate() const {
  if (num_states < 1) {
    throw Error(ErrorCode::kInvalidStateCount, "num_states must be positive");
  }
  const std::size_t d = dim();
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.records.size(); ++i) {
      const auto& r = s.records[i];
      if (r.t != i) {
        throw Error(ErrorCode::kGapInTimesteps,
                    "session '" + s.session_id + "' expected t=" + std::to_string(i));
      }
      if (r.features.size() != d) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "session '" + s.session_id + "' t=" + std::to_string(i) + " has " +
                        std::to_string(r.features.size()) + " features, expected " +
                        std::to_string(d));
      }
      for (double x : r.features) {
        if (!std::isfinite(x)) {
          throw Error(ErrorCode::kNonFiniteInput,
                      "session '" + s.session_id + "' t=" + std::to_string(i));
        }
      }
      if (r.qoe && !(*r.qoe >= kMinQoeScore && *r.qoe <= kMaxQoeScore)) {
        throw Error(ErrorCode::kQoEOutOfRange,
                    "session '" + s.session_id + "' t=" + std::to_string(i));
      }
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileMissing, "cannot open " + path.string());
  return parse_csv(in, schema);
}

Dataset parse_csv(std::istream& in, const CsvSchema& schema) {
  check_num_states(schema.num_states);

  std::string line;
  if (!getline_crlf(in, line)) throw Error(ErrorCode::kParseError, "missing header row");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = std::string(trim(h));

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require_column = [&](const std::string& name) {
    auto idx = find_column(name);
    if (!idx) throw Error(ErrorCode::kMissingColumn, "missing column '" + name + "'");
    return *idx;
  };

  const std::size_t session_col = require_column(schema.session_column);
  const std::size_t time_col = require_column(schema.time_column);
  const std::optional<std::size_t> qoe_col = find_column(schema.qoe_column);

  std::vector<std::size_t> feature_cols;
  Dataset data;
  data.num_states = schema.num_states;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == session_col || c == time_col || (qoe_col && c == *qoe_col)) continue;
      feature_cols.push_back(c);
      data.feature_names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      feature_cols.push_back(require_column(name));
      data.feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) {
    throw Error(ErrorCode::kMissingColumn, "no feature columns in header");
  }

  std::unordered_map<std::string, std::size_t> session_index;
  std::vector<std::pair<std::size_t, FeatureRecord>> rows;  // (data row, record)
  std::vector<std::vector<std::size_t>> by_session;

  std::size_t row = 0;
  while (getline_crlf(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParseError, "row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) +
                                              " cells, header has " +
                                              std::to_string(header.size()));
    }
    FeatureRecord rec;
    rec.session_id = std::string(trim(cells[session_col]));
    auto t = parse_index(cells[time_col]);
    if (!t) {
      throw Error(ErrorCode::kNonNumericCell,
                  cell_location(row, header[time_col]) + ": '" + cells[time_col] + "'");
    }
    rec.t = *t;
    rec.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      auto v = parse_double(cells[c]);
      if (!v) {
        throw Error(ErrorCode::kNonNumericCell,
                    cell_location(row, header[c]) + ": '" + cells[c] + "'");
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::kNonFiniteInput, cell_location(row, header[c]));
      }
      rec.features.push_back(*v);
    }
    if (qoe_col && !trim(cells[*qoe_col]).empty()) {
      auto q = parse_double(cells[*qoe_col]);
      if (!q) {
        throw Error(ErrorCode::kNonNumericCell,
                    cell_location(row, header[*qoe_col]) + ": '" + cells[*qoe_col] + "'");
      }
      if (!(*q >= kMinQoeScore && *q <= kMaxQoeScore)) {
        throw Error(ErrorCode::kQoEOutOfRange,
                    "row " + std::to_string(row) + ": qoe " + cells[*qoe_col] +
                        " outside [1, 100]");
      }
      rec.qoe = *q;
    }

    auto [it, inserted] = session_index.try_emplace(rec.session_id, by_session.size());
    if (inserted) by_session.emplace_back();
    by_session[it->second].push_back(rows.size());
    rows.emplace_back(row, std::move(rec));
  }

  for (auto& members : by_session) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].second.t < rows[b].second.t;
    });
    SessionSeries series;
    series.session_id = rows[members.front()].second.session_id;
    for (std::size_t i = 0; i < members.size(); ++i) {
      FeatureRecord& rec = rows[members[i]].second;
      if (rec.t < i) {
        throw Error(ErrorCode::kDuplicateTimestep,
                    "session '" + series.session_id + "' repeats t=" + std::to_string(rec.t));
      }
      if (rec.t > i) {
        throw Error(ErrorCode::kGapInTimesteps,
                    "session '" + series.session_id + "' is missing t=" + std::to_string(i));
      }
      series.records.push_back(std::move(rec));
    }
    data.sessions.push_back(std::move(series));
  }
  return data;
}

void write_csv(std::ostream& out, const Dataset& data) {
  bool any_qoe = false;
  for (const auto& s : data.sessions) {
    for (const auto& r : s.records) any_qoe = any_qoe || r.qoe.has_value();
  }
  out << "session_id,t";
  for (const auto& name : data.feature_names) out << ',' << name;
  if (any_qoe) out << ",qoe";
  out << '\n';

  char buf[64];
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  for (const auto& s : data.sessions) {
    for (const auto& r : s.records) {
      out << s.session_id << ',' << r.t;
      for (double x : r.features) {
        out << ',';
        put(x);
      }
      if (any_qoe) {
        out << ',';
        if (r.qoe) put(*r.qoe);
      }
      out << '\n';
    }
  }
}

StandardizationParams fit_standardizer(const Dataset& train) {
  const std::size_t d = train.dim();
  const std::size_t n = train.record_count();
  if (n == 0) throw Error(ErrorCode::kEmptyDataset, "cannot fit standardizer on no records");

  // Two passes over the data: mean first, then centred second moment.
  StandardizationParams params{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& s : train.sessions) {
    for (const auto& r : s.records) {
      if (r.features.size() != d) {
        throw Error(ErrorCode::kDimensionMismatch, "record dimension differs from dataset");
      }
      for (std::size_t j = 0; j < d; ++j) params.means[j] += r.features[j];
    }
  }
  for (double& m : params.means) m /= static_cast<double>(n);
  for (const auto& s : train.sessions) {
    for (const auto& r : s.records) {
      for (std::size_t j = 0; j < d; ++j) {
        const double dev = r.features[j] - params.means[j];
        params.std_devs[j] += dev * dev;
      }
    }
  }
  for (double& v : params.std_devs) v = std::sqrt(v / static_cast<double>(n));
  return params;
}

void standardize(std::span<double> x, const StandardizationParams& params) {
  if (x.size() != params.means.size() || params.std_devs.size() != params.means.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) + " features, standardizer has " +
                    std::to_string(params.means.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double sd = params.std_devs[j] == 0.0 ? 1.0 : params.std_devs[j];
    x[j] = (x[j] - params.means[j]) / sd;
  }
}

Dataset apply_standardizer(const Dataset& data, const StandardizationParams& params) {
  if (data.dim() != params.means.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dataset has " + std::to_string(data.dim()) + " features, standardizer has " +
                    std::to_string(params.means.size()));
  }
  Dataset out = data;
  for (auto& s : out.sessions) {
    for (auto& r : s.records) standardize(r.features, params);
  }
  return out;
}

State discretize_qoe(double score, int num_states) {
  check_num_states(num_states);
  if (!(score >= kMinQoeScore && score <= kMaxQoeScore)) {
    throw Error(ErrorCode::kScoreOutOfRange,
                "score " + std::to_string(score) + " outside [1, 100]");
  }
  const double width = (kMaxQoeScore - kMinQoeScore) / num_states;
  const auto bin = static_cast<State>(std::floor((score - kMinQoeScore) / width));
  return std::min(bin, static_cast<State>(num_states - 1));
}

double state_midpoint(State state, int num_states) {
  if (num_states < 1 || state >= static_cast<State>(num_states)) {
    throw Error(ErrorCode::kInvalidStateCount, "state index out of range");
  }
  const double width = (kMaxQoeScore - kMinQoeScore) / num_states;
  return kMinQoeScore + (static_cast<double>(state) + 0.5) * width;
}

std::pair<Dataset, Dataset> split_sessions(const Dataset& data, double test_fraction,
                                           std::uint64_t seed) {
  const std::size_t n = data.sessions.size();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewSessions,
                "need at least 2 sessions to split, got " + std::to_string(n));
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  Dataset train, test;
  train.feature_names = test.feature_names = data.feature_names;
  train.num_states = test.num_states = data.num_states;
  // Preserve the original session order on both sides.
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? test : train).sessions.push_back(data.sessions[i]);
  }
  return {std::move(train), std::move(test)};
}

void GeneratorSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); };
  if (num_states < 1) fail("num_states must be >= 1");
  const auto s = static_cast<std::size_t>(num_states);
  if (means.rows() != s || variances.rows() != s) fail("means/variances need one row per state");
  if (means.cols() == 0 || variances.cols() != means.cols()) {
    fail("means and variances must share a non-zero feature dimension");
  }
  if (transition.rows() != s || transition.cols() != s) fail("transition must be S x S");
  for (std::size_t i = 0; i < s; ++i) {
    double sum = 0.0;
    for (double p : transition.row(i)) {
      if (!(p >= 0.0 && p <= 1.0)) fail("transition entries must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("transition row " + std::to_string(i) + " sums to " +
                                         std::to_string(sum));
    for (double v : variances.row(i)) {
      if (!(v > 0.0) || !std::isfinite(v)) fail("variances must be positive and finite");
    }
    for (double m : means.row(i)) {
      if (!std::isfinite(m)) fail("means must be finite");
    }
  }
  if (!initial.empty()) {
    if (initial.size() != s) fail("initial distribution must have S entries");
    double sum = 0.0;
    for (double p : initial) {
      if (!(p >= 0.0 && p <= 1.0)) fail("initial entries must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("initial distribution must sum to 1");
  }
  if (sessions == 0 || length == 0) fail("sessions and length must be positive");
  if (rotation_degrees != 0.0 && means.cols() < 2) fail("rotation needs at least 2 features");
  if (!std::isfinite(rotation_degrees)) fail("rotation must be finite");
  if (!feature_names.empty() && feature_names.size() != means.cols()) {
    fail("feature_names must have D entries");
  }
}

Dataset synthesize_dataset(const GeneratorSpec& spec, std::uint64_t seed,
                           std::vector<std::vector<State>>* paths) {
  spec.validate();
  const auto s = static_cast<std::size_t>(spec.num_states);
  const std::size_t d = spec.means.cols();

  std::vector<double> initial = spec.initial;
  if (initial.empty()) initial.assign(s, 1.0 / static_cast<double>(s));
  const double angle = spec.rotation_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);

  Dataset data;
  data.num_states = spec.num_states;
  if (spec.feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("f" + std::to_string(j));
  } else {
    data.feature_names = spec.feature_names;
  }
  if (paths) paths->clear();

  Rng rng(seed);
  std::vector<double> noise(d);
  const int width = static_cast<int>(std::to_string(spec.sessions - 1).size());
  for (std::size_t k = 0; k < spec.sessions; ++k) {
    SessionSeries series;
    std::string id = std::to_string(k);
    series.session_id = "s" + std::string(width - id.size(), '0') + id;
    std::vector<State> path;
    path.reserve(spec.length);
    State state = rng.categorical(initial);
    for (std::size_t t = 0; t < spec.length; ++t) {
      if (t > 0) state = rng.categorical(spec.transition.row(state));
      path.push_back(state);
      for (std::size_t j = 0; j < d; ++j) {
        noise[j] = rng.normal() * std::sqrt(spec.variances(state, j));
      }
      if (angle != 0.0) {
        const double a = noise[0];
        const double b = noise[1];
        noise[0] = c * a - sn * b;
        noise[1] = sn * a + c * b;
      }
      FeatureRecord rec;
      rec.session_id = series.session_id;
      rec.t = t;
      rec.features.resize(d);
      for (std::size_t j = 0; j < d; ++j) rec.features[j] = spec.means(state, j) + noise[j];
      rec.qoe = state_midpoint(state, spec.num_states);
      series.records.push_back(std::move(rec));
    }
    data.sessions.push_back(std::move(series));
    if (paths) paths->push_back(std::move(path));
  }
  return data;
}

}  // namespace qoeseq
