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

#include "qoeseq/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qoeseq/error.hpp"

namespace qoeseq {
namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

void put_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_double(*v);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Timed results are stored here so the calls cannot be elided.
namespace {
volatile std::size_t g_latency_sink = 0;
}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t n = 0;
  for (std::size_t j = 0; j < num_states_; ++j) n += at(truth, j);
  return n;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < num_states_; ++i) n += at(i, predicted);
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_states_ != num_states_) {
    throw Error(ErrorCode::kDimensionMismatch, "confusion matrices differ in size");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const State> truth, std::span<const State> predicted,
                          std::size_t num_states) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kLengthMismatch, "truth has " + std::to_string(truth.size()) +
                                               " steps, prediction has " +
                                               std::to_string(predicted.size()));
  }
  if (truth.empty()) throw Error(ErrorCode::kLengthMismatch, "nothing to compare");
  ConfusionMatrix cm(num_states);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t] >= num_states || predicted[t] >= num_states) {
      throw Error(ErrorCode::kIndexOutOfRange, "state out of range at t=" + std::to_string(t));
    }
    ++cm.at(truth[t], predicted[t]);
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  const std::size_t s = cm.num_states();

  MetricsReport report;
  std::uint64_t correct = 0;
  std::size_t supported = 0;
  for (std::size_t c = 0; c < s; ++c) {
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t row = cm.row_sum(c);
    const std::uint64_t col = cm.col_sum(c);
    correct += tp;
    ClassMetrics m;
    m.support = row;
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    if (row > 0) {
      report.macro_precision += m.precision;
      report.macro_recall += m.recall;
      report.macro_f1 += m.f1;
      ++supported;
    }
    report.per_class.push_back(m);
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  // total > 0 guarantees at least one supported class.
  report.macro_precision /= static_cast<double>(supported);
  report.macro_recall /= static_cast<double>(supported);
  report.macro_f1 /= static_cast<double>(supported);
  return report;
}

double steady_clock_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

LatencyReport summarize_latency(std::vector<double> samples, std::size_t sequence_length,
                                std::size_t warmup) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidRepetitions, "no latency samples");
  std::sort(samples.begin(), samples.end());
  LatencyReport r;
  r.repetitions = samples.size();
  r.sequence_length = sequence_length;
  r.warmup = warmup;
  r.min = samples.front();
  r.max = samples.back();
  r.median = quantile_sorted(samples, 0.5);
  r.p95 = quantile_sorted(samples, 0.95);
  return r;
}

LatencyReport measure_latency(const std::function<void()>& call, std::size_t repetitions,
                              std::size_t warmup, const MonotonicClock& clock,
                              std::size_t sequence_length) {
  if (repetitions < 1) throw Error(ErrorCode::kInvalidRepetitions, "repetitions must be >= 1");
  for (std::size_t i = 0; i < warmup; ++i) call();
  std::vector<double> samples;
  samples.reserve(repetitions);
  for (std::size_t i = 0; i < repetitions; ++i) {
    const double start = clock();
    call();
    samples.push_back(clock() - start);
  }
  return summarize_latency(std::move(samples), sequence_length, warmup);
}

LatencyReport measure_latency(const DecodeFn& decode, std::span<const Token> tokens,
                              std::size_t repetitions, std::size_t warmup,
                              const MonotonicClock& clock) {
  auto call = [&] {
    auto states = decode(tokens);
    g_latency_sink = states.empty() ? 0 : states.back();
  };
  return measure_latency(call, repetitions, warmup, clock, tokens.size());
}

std::vector<double> posterior_entropy(const Matrix& posteriors) {
  std::vector<double> out;
  out.reserve(posteriors.rows());
  for (std::size_t t = 0; t < posteriors.rows(); ++t) {
    double h = 0.0;
    for (double p : posteriors.row(t)) {
      if (p > 0.0) h -= p * std::log(p);
    }
    out.push_back(h);
  }
  return out;
}

std::vector<ComparisonRow> literature_rows() {
  return {
      {"vq_hmm (published)", 0.77, std::nullopt, 0.0015, std::nullopt, "paper"},
      {"binned_hmm (published)", 0.29, std::nullopt, 0.0011, std::nullopt, "paper"},
      {"classifier_feature_engineering (published)", 0.64, std::nullopt, 0.0021, std::nullopt,
       "paper"},
      {"classifier_discretized (published)", 0.67, std::nullopt, 0.0017, std::nullopt, "paper"},
      {"lstm (published)", std::nullopt, std::nullopt, 0.023, std::nullopt, "paper"},
  };
}

ComparisonReport compare_models(const Dataset& test, std::span<const ModelDescriptor> models,
                                const LatencyOptions& latency, bool include_literature) {
  if (test.sessions.empty()) throw Error(ErrorCode::kEmptyDataset, "test set has no sessions");
  const auto s = static_cast<std::size_t>(test.num_states);

  std::vector<std::vector<State>> truths;
  truths.reserve(test.sessions.size());
  for (std::size_t k = 0; k < test.sessions.size(); ++k) truths.push_back(test.session_states(k));

  ComparisonReport report;
  for (const auto& model : models) {
    ModelEvaluation eval;
    eval.name = model.name;
    eval.confusion = ConfusionMatrix(s);
    for (std::size_t k = 0; k < test.sessions.size(); ++k) {
      const auto& session = test.sessions[k];
      SessionTrace trace;
      trace.session_id = session.session_id;
      trace.truth = truths[k];
      trace.predicted = model.predict(session);
      if (model.posteriors) trace.entropy = posterior_entropy(model.posteriors(session));
      eval.confusion += confusion(trace.truth, trace.predicted, s);
      eval.traces.push_back(std::move(trace));
    }
    eval.metrics = metrics(eval.confusion);

    const SessionSeries& timed = test.sessions.front();
    eval.latency = measure_latency(
        [&] {
          auto out = model.predict(timed);
          g_latency_sink = out.size();
        },
        latency.repetitions, latency.warmup, latency.clock, timed.size());

    report.rows.push_back({eval.name, eval.metrics.accuracy, eval.metrics.macro_f1,
                           eval.latency.median, eval.latency.p95, "measured"});
    report.models.push_back(std::move(eval));
  }
  if (include_literature) {
    for (auto& row : literature_rows()) report.rows.push_back(std::move(row));
  }
  return report;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "model,accuracy,macro_f1,median_latency_s,p95_latency_s,source\n";
  for (const auto& r : rows) {
    out << r.model << ',';
    put_optional(out, r.accuracy);
    out << ',';
    put_optional(out, r.macro_f1);
    out << ',';
    put_optional(out, r.median_latency_s);
    out << ',';
    put_optional(out, r.p95_latency_s);
    out << ',' << r.source << '\n';
  }
}

void write_metrics_csv(std::ostream& out, std::span<const ModelEvaluation> models) {
  out << "model,accuracy,macro_precision,macro_recall,macro_f1\n";
  for (const auto& m : models) {
    out << m.name << ',' << format_double(m.metrics.accuracy) << ','
        << format_double(m.metrics.macro_precision) << ','
        << format_double(m.metrics.macro_recall) << ',' << format_double(m.metrics.macro_f1)
        << '\n';
  }
}

void write_class_metrics_csv(std::ostream& out, std::span<const ModelEvaluation> models) {
  out << "model,class,precision,recall,f1,support\n";
  for (const auto& m : models) {
    for (std::size_t c = 0; c < m.metrics.per_class.size(); ++c) {
      const auto& pc = m.metrics.per_class[c];
      out << m.name << ',' << c << ',' << format_double(pc.precision) << ','
          << format_double(pc.recall) << ',' << format_double(pc.f1) << ',' << pc.support
          << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const SessionTrace& trace) {
  out << "t,true_state,predicted_state,posterior_entropy\n";
  for (std::size_t t = 0; t < trace.predicted.size(); ++t) {
    out << t << ',';
    if (t < trace.truth.size()) out << trace.truth[t];
    out << ',' << trace.predicted[t] << ',';
    if (t < trace.entropy.size()) out << format_double(trace.entropy[t]);
    out << '\n';
  }
}

SessionTrace read_trace_csv(std::istream& in, const std::string& session_id) {
  SessionTrace trace;
  trace.session_id = session_id;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("t,true_state,predicted_state")) {
    throw Error(ErrorCode::kParseError, "not a trace file");
  }
  auto parse_state = [](const std::string& cell) {
    State v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::kParseError, "bad state '" + cell + "' in trace");
    }
    return v;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 4) throw Error(ErrorCode::kParseError, "trace row needs 4 cells");
    if (!cells[1].empty()) trace.truth.push_back(parse_state(cells[1]));
    trace.predicted.push_back(parse_state(cells[2]));
    if (!cells[3].empty()) {
      double h = 0.0;
      std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), h);
      trace.entropy.push_back(h);
    }
  }
  return trace;
}

}  // namespace qoeseq
