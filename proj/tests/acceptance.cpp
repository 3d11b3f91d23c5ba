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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qoeseq/error.hpp"
#include "qoeseq/pipeline.hpp"
#include "qoeseq/random.hpp"

using namespace qoeseq;

namespace {

enum class Status { kPass, kWarn, kFail };

struct Outcome {
  Status status;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

HmmParams to_params(const oracle::Model& m) {
  HmmParams p;
  p.pi = m.pi;
  p.A = Matrix::from_rows(m.A);
  p.B = Matrix::from_rows(m.B);
  return p;
}

struct Instance {
  oracle::Model model;
  std::vector<Token> tokens;
};

std::vector<Instance> random_instances() {
  constexpr int kInstances = 300;
  std::mt19937_64 gen(20240601);
  std::vector<Instance> out;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t s = 2 + gen() % 3;
    const std::size_t v = 2 + gen() % 5;
    const std::size_t t = 1 + gen() % 8;
    Instance inst{oracle::random_model(gen, s, v), {}};
    for (std::size_t k = 0; k < t; ++k) inst.tokens.push_back(gen() % v);
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome viterbi_oracle() {
  constexpr double kLogTol = 1e-9;
  constexpr double kTieGap = 1e-9;
  constexpr double kMaxSeconds = 10.0;
  const auto start = std::chrono::steady_clock::now();
  const auto instances = random_instances();
  std::size_t mismatched = 0;
  std::size_t compared_paths = 0;
  double worst = 0.0;
  for (const auto& inst : instances) {
    const auto e = oracle::enumerate_paths(inst.model, inst.tokens);
    const auto d = viterbi_decode(to_params(inst.model), inst.tokens);
    worst = std::max(worst, std::abs(d.log_prob - e.best_log));
    if (e.best_log - e.second_log > kTieGap) {
      ++compared_paths;
      if (std::vector<std::size_t>(d.states.begin(), d.states.end()) != e.best_path) ++mismatched;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst <= kLogTol && mismatched == 0 && elapsed < kMaxSeconds;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu models, max |dlog| %.2e (tol %.0e), %zu/%zu unique paths differ, %.2fs (limit %.0fs)",
              instances.size(), worst, kLogTol, mismatched, compared_paths, elapsed, kMaxSeconds)};
}

Outcome forward_oracle() {
  constexpr double kRelTol = 1e-9;
  const auto instances = random_instances();
  double worst = 0.0;
  std::size_t below_viterbi = 0;
  for (const auto& inst : instances) {
    const auto e = oracle::enumerate_paths(inst.model, inst.tokens);
    const HmmParams p = to_params(inst.model);
    const double ll = forward_loglik(p, inst.tokens);
    worst = std::max(worst, std::abs(std::exp(ll) - e.total) / e.total);
    if (ll < viterbi_decode(p, inst.tokens).log_prob) ++below_viterbi;
  }
  const bool ok = worst <= kRelTol && below_viterbi == 0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu models, max rel err %.2e (tol %.0e), %zu with loglik < viterbi",
              instances.size(), worst, kRelTol, below_viterbi)};
}

Outcome parameter_recovery() {
  constexpr double kMaxErr = 0.02;
  constexpr double kMaxSeconds = 5.0;
  HmmParams truth;
  truth.pi = {0.98, 0.01, 0.01};
  truth.A = Matrix{{0.8, 0.15, 0.05}, {0.1, 0.75, 0.15}, {0.2, 0.2, 0.6}};
  truth.B = Matrix{{0.30, 0.25, 0.20, 0.10, 0.05, 0.04, 0.03, 0.03},
                   {0.05, 0.10, 0.20, 0.30, 0.20, 0.10, 0.03, 0.02},
                   {0.02, 0.03, 0.05, 0.10, 0.10, 0.20, 0.25, 0.25}};
  const auto start = std::chrono::steady_clock::now();
  std::vector<LabeledSequence> data;
  for (std::uint64_t k = 0; k < 500; ++k) data.push_back(sample_sequence(truth, 100, 1000 + k));
  const HmmParams fit = fit_supervised(data, 3, 8, 1.0);
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(fit.pi[i] - truth.pi[i]));
    for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(fit.A(i, j) - truth.A(i, j)));
    for (std::size_t j = 0; j < 8; ++j) worst = std::max(worst, std::abs(fit.B(i, j) - truth.B(i, j)));
  }
  const bool ok = worst <= kMaxErr && elapsed < kMaxSeconds;
  return {ok ? Status::kPass : Status::kFail,
          fmt("500x100 steps, max entry err %.4f (tol %.2f), %.2fs (limit %.0fs)", worst, kMaxErr,
              elapsed, kMaxSeconds)};
}

Outcome posterior_normalization() {
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  std::size_t rows = 0;
  for (const auto& inst : random_instances()) {
    const Matrix post = posterior_marginals(to_params(inst.model), inst.tokens);
    for (std::size_t t = 0; t < post.rows(); ++t, ++rows) {
      double sum = 0.0;
      for (double x : post.row(t)) sum += x;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return {worst <= kTol ? Status::kPass : Status::kFail,
          fmt("%zu rows, max |sum-1| %.2e (tol %.0e)", rows, worst, kTol)};
}

GeneratorSpec rotated_clusters_spec() {
  const double r = 1.0 / std::sqrt(2.0);
  const double delta = 1.5;
  const double long_var = 9.0;
  const double short_var = 0.25;
  GeneratorSpec g;
  g.num_states = 3;
  g.means = Matrix{{delta * r, -delta * r}, {0, 0}, {-delta * r, delta * r}};
  g.variances = Matrix{{long_var, short_var}, {long_var, short_var}, {long_var, short_var}};
  g.transition = Matrix{{0.9, 0.05, 0.05}, {0.05, 0.9, 0.05}, {0.05, 0.05, 0.9}};
  g.rotation_degrees = 45.0;
  g.sessions = 60;
  g.length = 200;
  return g;
}

std::vector<Codebook> g_fitted_codebooks;

Outcome vq_binning_gap() {
  constexpr double kMinBinnedGap = 0.10;
  constexpr double kMinTokenGap = 0.05;
  // Regression values observed once with seed 1; tolerance covers
  // platform-level floating point differences only.
  constexpr double kFrozenVq = 0.96;
  constexpr double kFrozenBinned = 0.784;
  constexpr double kFrozenToken = 0.837;
  constexpr double kFrozenTol = 0.02;
  constexpr std::uint64_t kSeed = 1;

  const Dataset d = synthesize_dataset(rotated_clusters_spec(), kSeed);
  auto [train, test] = split_sessions(d, 0.25, kSeed);
  ExperimentOptions opt;
  opt.kmeans.k = 16;
  opt.kmeans.seed = kSeed;
  opt.bins = 3;
  opt.latency.repetitions = 1;
  opt.latency.warmup = 0;
  opt.include_literature = false;
  const ExperimentResult r = run_experiment(train, test, opt);
  g_fitted_codebooks.push_back(r.vq.codebook);

  double vq = 0, binned = 0, token = 0;
  for (const auto& m : r.report.models) {
    if (m.name == kVqHmmName) vq = m.metrics.accuracy;
    if (m.name == kBinnedHmmName) binned = m.metrics.accuracy;
    if (m.name == kTokenClassifierName) token = m.metrics.accuracy;
  }
  const bool gaps = vq - binned >= kMinBinnedGap && vq - token >= kMinTokenGap;
  const bool frozen = std::abs(vq - kFrozenVq) <= kFrozenTol &&
                      std::abs(binned - kFrozenBinned) <= kFrozenTol &&
                      std::abs(token - kFrozenToken) <= kFrozenTol;
  return {gaps && frozen ? Status::kPass : Status::kFail,
          fmt("vq_hmm %.3f, binned_hmm %.3f (gap %.3f >= %.2f), token_classifier %.3f (gap %.3f >= "
              "%.2f), frozen within %.2f: %s",
              vq, binned, vq - binned, kMinBinnedGap, token, vq - token, kMinTokenGap, kFrozenTol,
              frozen ? "yes" : "no")};
}

Outcome metric_arithmetic() {
  constexpr double kIdentityTol = 1e-12;
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 2624;
  cm.at(0, 1) = 1476;
  cm.at(1, 0) = 3776;
  cm.at(1, 1) = 2124;
  const MetricsReport rep = metrics(cm);
  const ClassMetrics& c = rep.per_class[0];
  const double rounded = std::round(c.f1 * 100.0) / 100.0;
  const bool published = std::abs(c.precision - 0.41) < 1e-12 && std::abs(c.recall - 0.64) < 1e-12 &&
                         std::abs(rounded - 0.50) < 1e-12;

  std::mt19937_64 gen(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t s = 2 + gen() % 5;
    ConfusionMatrix m(s);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) m.at(i, j) = gen() % 50;
    for (const auto& k : metrics(m).per_class) {
      if (k.precision + k.recall == 0.0) continue;
      const double h = 2.0 * k.precision * k.recall / (k.precision + k.recall);
      worst = std::max(worst, std::abs(k.f1 - h));
    }
  }
  const bool ok = published && worst <= kIdentityTol;
  return {ok ? Status::kPass : Status::kFail,
          fmt("P=%.2f R=%.2f -> F1 %.6f (rounds to %.2f, expected 0.50); identity max err %.2e (tol "
              "%.0e)",
              c.precision, c.recall, c.f1, rounded, worst, kIdentityTol)};
}

Outcome latency_smoke() {
  constexpr double kBudget = 1.5e-3;
  Rng rng(5);
  auto random_row = [&](std::size_t n) {
    std::vector<double> p(n);
    double sum = 0;
    for (auto& x : p) sum += (x = 0.05 + rng.uniform());
    for (auto& x : p) x /= sum;
    return p;
  };
  HmmParams p;
  p.pi = random_row(5);
  std::vector<std::vector<double>> a, b;
  for (int i = 0; i < 5; ++i) a.push_back(random_row(5)), b.push_back(random_row(32));
  p.A = Matrix::from_rows(a);
  p.B = Matrix::from_rows(b);
  std::vector<Token> tokens(300);
  for (auto& t : tokens) t = rng.uniform_index(32);
  const LogModel model(p);
  const LatencyReport rep = measure_latency(
      [&](std::span<const Token> obs) { return viterbi_decode(model, obs).states; }, tokens);
  const bool fast = rep.median < kBudget;
  return {fast ? Status::kPass : Status::kWarn,
          fmt("S=5 V=32 T=300 median %.3f ms, p95 %.3f ms (budget %.1f ms%s)", rep.median * 1e3,
              rep.p95 * 1e3, kBudget * 1e3, fast ? "" : ", soft gate")};
}

PipelineConfig determinism_config(const std::filesystem::path& out) {
  PipelineConfig c;
  GeneratorSpec g = rotated_clusters_spec();
  g.sessions = 20;
  g.length = 80;
  c.synth = g;
  c.states = 3;
  c.codebook_size = 16;
  c.seed = 42;
  c.reps = 5;
  c.warmup = 1;
  c.out = out;
  return c;
}

// Loads one artifact and checks its invariants; returns an empty string on success.
std::string reload(const std::filesystem::path& dir, const std::filesystem::path& rel) {
  const auto path = dir / rel;
  if (rel.extension() == ".json") {
    const std::string text = read_text_file(path);
    const std::string type = model_type_of(text);
    if (type == "codebook") {
      if (codebook_from_json(text).codebook.size() == 0) return "empty codebook";
    } else if (type == "binning") {
      binning_from_json(text);
    } else if (type == "hmm") {
      hmm_from_json(text).params.validate();
    } else if (type == "token_classifier") {
      token_classifier_from_json(text).model.validate();
    } else if (type == "gaussian_nb") {
      gaussian_nb_from_json(text).validate();
    } else {
      return "unknown model type " + type;
    }
  } else if (*rel.begin() == "traces") {
    std::istringstream in(read_text_file(path));
    const SessionTrace t = read_trace_csv(in);
    if (t.truth.size() != t.predicted.size()) return "trace length mismatch";
  } else if (rel == "train.csv" || rel == "test.csv") {
    load_csv(path, CsvSchema{.num_states = 3}).validate();
  } else if (read_text_file(path).find('\n') == std::string::npos) {
    return "empty table";
  }
  return {};
}

Outcome determinism_round_trip() {
  const auto root = std::filesystem::temp_directory_path() / "qoeseq_acceptance";
  std::filesystem::remove_all(root);
  const PipelineOutputs a = run_pipeline(determinism_config(root / "a"));
  const PipelineOutputs b = run_pipeline(determinism_config(root / "b"));
  g_fitted_codebooks.push_back(a.result.vq.codebook);

  std::size_t compared = 0;
  std::vector<std::string> problems;
  if (a.files != b.files) problems.push_back("file lists differ");
  for (const auto& rel : a.files) {
    const bool timing = std::find(a.timing_files.begin(), a.timing_files.end(), rel) !=
                        a.timing_files.end();
    if (!timing) {
      ++compared;
      if (read_text_file(root / "a" / rel) != read_text_file(root / "b" / rel))
        problems.push_back(rel.string() + " differs");
    }
    try {
      if (auto why = reload(root / "a", rel); !why.empty()) problems.push_back(rel.string() + ": " + why);
    } catch (const Error& e) {
      problems.push_back(rel.string() + ": " + e.what());
    }
  }
  const auto s1 = sample_sequence(a.result.vq_hmm, 500, 99);
  const auto s2 = sample_sequence(b.result.vq_hmm, 500, 99);
  if (s1.states != s2.states || s1.tokens != s2.tokens) problems.push_back("samples differ");

  std::string detail = fmt("%zu artifacts byte-identical, %zu reloaded", compared, a.files.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty() ? Status::kPass : Status::kFail, detail};
}

Outcome kmeans_descent() {
  constexpr double kRelSlack = 1e-12;
  std::vector<Codebook> books = g_fitted_codebooks;
  Rng rng(11);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix pts;
    const std::size_t d = 1 + seed % 4;
    for (int i = 0; i < 400; ++i) {
      std::vector<double> row(d);
      for (auto& x : row) x = rng.normal() + 3.0 * static_cast<double>(i % 5);
      pts.push_row(row);
    }
    for (std::size_t k : {2, 4, 8, 16, 32}) books.push_back(kmeans_fit(pts, {.k = k, .seed = seed}));
  }
  std::size_t violations = 0;
  for (const auto& cb : books)
    for (std::size_t i = 1; i < cb.inertia_trace.size(); ++i)
      if (cb.inertia_trace[i] > cb.inertia_trace[i - 1] * (1.0 + kRelSlack)) ++violations;

  Matrix dup;
  for (int rep = 0; rep < 4; ++rep)
    for (int p = 0; p < 6; ++p) dup.push_row(std::vector<double>{p * 1.5, p % 2 - 0.25});
  double zero_inertia = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    zero_inertia = std::max(zero_inertia, kmeans_fit(dup, {.k = 6, .seed = seed}).inertia);

  const bool ok = violations == 0 && zero_inertia == 0.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu codebooks, %zu increasing steps; K=distinct inertia %.3g", books.size(), violations,
              zero_inertia)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"viterbi matches exhaustive enumeration", viterbi_oracle},
      {"forward likelihood matches enumeration", forward_oracle},
      {"supervised fit recovers parameters", parameter_recovery},
      {"posterior rows are normalized", posterior_normalization},
      {"vector quantization beats binning", vq_binning_gap},
      {"metric arithmetic", metric_arithmetic},
      {"viterbi latency", latency_smoke},
      {"determinism and artifact round-trip", determinism_round_trip},
      {"k-means descent", kmeans_descent},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kWarn ? "WARN" : "FAIL";
    if (o.status == Status::kFail) ++failures;
    std::printf("[%s] %d. %s: %s\n", tag, index, name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
