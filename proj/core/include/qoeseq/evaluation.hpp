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

#ifndef QOESEQ_EVALUATION_HPP_
#define QOESEQ_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qoeseq/matrix.hpp"
#include "qoeseq/telemetry.hpp"
#include "qoeseq/vq.hpp"

namespace qoeseq {

// Rows are true states, columns predicted states.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_states)
      : num_states_(num_states), counts_(num_states * num_states, 0) {}

  std::size_t num_states() const noexcept { return num_states_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts_[truth * num_states_ + predicted];
  }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * num_states_ + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  // Accumulates another matrix of the same size.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

 private:
  std::size_t num_states_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const State> truth, std::span<const State> predicted,
                          std::size_t num_states);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  // Unweighted means over classes with non-zero support.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

MetricsReport metrics(const ConfusionMatrix& cm);

struct LatencyReport {
  double median = 0.0;  // seconds
  double p95 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t repetitions = 0;
  std::size_t sequence_length = 0;
  std::size_t warmup = 0;
};

// Seconds on a monotonic clock. Tests inject deterministic fakes.
using MonotonicClock = std::function<double()>;
double steady_clock_seconds();

// Order statistics over raw samples. Quantiles interpolate linearly between
// order statistics, so an even count gives the mean of the central pair.
LatencyReport summarize_latency(std::vector<double> samples, std::size_t sequence_length = 0,
                                std::size_t warmup = 0);

inline constexpr std::size_t kDefaultRepetitions = 100;
inline constexpr std::size_t kDefaultWarmup = 10;

// Runs `warmup` untimed calls, then `repetitions` timed calls, serially.
LatencyReport measure_latency(const std::function<void()>& call, std::size_t repetitions,
                              std::size_t warmup, const MonotonicClock& clock,
                              std::size_t sequence_length = 0);

using DecodeFn = std::function<std::vector<State>(std::span<const Token>)>;
LatencyReport measure_latency(const DecodeFn& decode, std::span<const Token> tokens,
                              std::size_t repetitions = kDefaultRepetitions,
                              std::size_t warmup = kDefaultWarmup,
                              const MonotonicClock& clock = steady_clock_seconds);

// Shannon entropy (nats) of each posterior row.
std::vector<double> posterior_entropy(const Matrix& posteriors);

// A model under comparison. `predict` labels one session; `posteriors` is
// optional and feeds the entropy column of the time-domain traces.
struct ModelDescriptor {
  std::string name;
  std::function<std::vector<State>(const SessionSeries&)> predict;
  std::function<Matrix(const SessionSeries&)> posteriors;
};

struct SessionTrace {
  std::string session_id;
  std::vector<State> truth;
  std::vector<State> predicted;
  std::vector<double> entropy;  // empty when the model has no posteriors
};

struct ModelEvaluation {
  std::string name;
  ConfusionMatrix confusion{0};
  MetricsReport metrics;
  LatencyReport latency;
  std::vector<SessionTrace> traces;
};

struct ComparisonRow {
  std::string model;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> median_latency_s;
  std::optional<double> p95_latency_s;
  std::string source;  // "measured" or "paper"
};

// Published reference figures, reported alongside measurements and never
// re-measured.
std::vector<ComparisonRow> literature_rows();

struct LatencyOptions {
  std::size_t repetitions = kDefaultRepetitions;
  std::size_t warmup = kDefaultWarmup;
  MonotonicClock clock = steady_clock_seconds;
};

struct ComparisonReport {
  std::vector<ModelEvaluation> models;
  std::vector<ComparisonRow> rows;  // measured rows, then literature rows
};

// Accuracy pools every timestep of every test session. Latency is the
// per-sequence wall time of `predict` on the first test session.
ComparisonReport compare_models(const Dataset& test, std::span<const ModelDescriptor> models,
                                const LatencyOptions& latency = {},
                                bool include_literature = true);

// CSV: model,accuracy,macro_f1,median_latency_s,p95_latency_s,source
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
// CSV: model,accuracy,macro_precision,macro_recall,macro_f1 (no timings,
// so it is reproducible byte-for-byte).
void write_metrics_csv(std::ostream& out, std::span<const ModelEvaluation> models);
// CSV: model,class,precision,recall,f1,support
void write_class_metrics_csv(std::ostream& out, std::span<const ModelEvaluation> models);
// CSV: t,true_state,predicted_state,posterior_entropy
void write_trace_csv(std::ostream& out, const SessionTrace& trace);
SessionTrace read_trace_csv(std::istream& in, const std::string& session_id = {});

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace qoeseq

#endif  // QOESEQ_EVALUATION_HPP_
