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

// qoeseq: command-line front end. Every subcommand writes into one output
// directory and finishes by recording manifest.json there.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qoeseq/error.hpp"
#include "qoeseq/pipeline.hpp"
#include "qoeseq/random.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qoeseq;

namespace {

constexpr int kManifestVersion = 1;
constexpr const char* kManifestFile = "manifest.json";
constexpr std::size_t kDefaultBenchLength = 300;

struct Invocation {
  std::string command;
  PipelineConfig config;
  std::map<std::string, std::string> options;

  bool has(const std::string& key) const { return options.count(key) > 0; }
  const std::string& get(const std::string& key) const {
    auto it = options.find(key);
    if (it == options.end()) throw Error(ErrorCode::kInvalidArgument, "missing --" + key);
    return it->second;
  }
};

struct RunRecord {
  std::vector<fs::path> artifacts;  // relative to the output directory
  std::vector<fs::path> timing;     // artifacts whose bytes depend on wall-clock time
  std::vector<fs::path> inputs;     // absolute paths read by the run
};

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string file_hash(const fs::path& p) { return sha256_hex(read_text_file(p)); }

class Output {
 public:
  Output(fs::path dir, RunRecord& record) : dir_(std::move(dir)), record_(record) {}

  void write(const fs::path& rel, std::string_view text, bool timing = false) {
    fs::create_directories((dir_ / rel).parent_path());
    write_text_file(dir_ / rel, text);
    record_.artifacts.push_back(rel);
    if (timing) record_.timing.push_back(rel);
  }

  template <class Writer>
  void write_csv(const fs::path& rel, Writer&& writer, bool timing = false) {
    std::ostringstream ss;
    writer(ss);
    write(rel, ss.str(), timing);
  }

 private:
  fs::path dir_;
  RunRecord& record_;
};

fs::path input_path(const Invocation& inv, const std::string& key, RunRecord& rec) {
  fs::path p = inv.get(key);
  if (!fs::exists(p)) throw Error(ErrorCode::kFileMissing, "no such file: " + p.string());
  rec.inputs.push_back(p);
  return p;
}

Dataset load_table(const Invocation& inv, const std::string& key, RunRecord& rec) {
  return load_csv(input_path(inv, key, rec), inv.config.schema());
}

// A fitted codebook or binning scheme, whichever the file holds.
struct Quantizer {
  std::variant<VqQuantizer, BinnedQuantizer> q;

  std::size_t alphabet_size() const {
    return std::visit([](const auto& x) { return x.alphabet_size(); }, q);
  }
  std::vector<Token> encode(const SessionSeries& s) const {
    return std::visit([&](const auto& x) { return x.encode(s); }, q);
  }
};

Quantizer load_quantizer(const fs::path& path) {
  const std::string text = read_text_file(path);
  const std::string type = model_type_of(text);
  if (type == "codebook") {
    auto doc = codebook_from_json(text);
    return {VqQuantizer{doc.standardizer, doc.codebook}};
  }
  if (type == "binning") {
    auto doc = binning_from_json(text);
    return {BinnedQuantizer{doc.standardizer, doc.scheme}};
  }
  throw Error(ErrorCode::kSchemaMismatch,
              path.string() + " holds a '" + type + "', expected a codebook or binning scheme");
}

HmmDocument load_hmm(const Invocation& inv, RunRecord& rec) {
  return hmm_from_json(read_text_file(input_path(inv, "model", rec)));
}

// The codebook a model was fitted against: --codebook, else the model's own
// reference resolved next to the model file.
Quantizer model_quantizer(const Invocation& inv, const HmmDocument& model, RunRecord& rec) {
  fs::path path;
  if (inv.has("codebook")) {
    path = input_path(inv, "codebook", rec);
  } else if (!model.codebook_ref.empty()) {
    path = fs::path(inv.get("model")).parent_path() / model.codebook_ref;
    if (!fs::exists(path)) throw Error(ErrorCode::kFileMissing, "no such codebook: " + path.string());
    rec.inputs.push_back(path);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "model names no codebook; pass --codebook");
  }
  Quantizer q = load_quantizer(path);
  if (q.alphabet_size() != model.params.alphabet_size()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "model alphabet V=" + std::to_string(model.params.alphabet_size()) +
                    " does not match codebook size K=" + std::to_string(q.alphabet_size()));
  }
  return q;
}

std::size_t size_option(const Invocation& inv, const std::string& key, std::size_t fallback) {
  if (!inv.has(key)) return fallback;
  const std::string& v = inv.get(key);
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out == 0) {
    throw Error(ErrorCode::kInvalidArgument, "--" + key + " must be a positive integer");
  }
  return out;
}

// Default generator: well separated diagonal Gaussians drifting with the
// state index, sticky transitions.
GeneratorSpec builtin_spec(int states) {
  constexpr std::size_t kDim = 6;
  GeneratorSpec g;
  g.num_states = states;
  g.means = Matrix(states, kDim);
  g.variances = Matrix(states, kDim, 0.6);
  g.transition = Matrix(states, states, states > 1 ? 0.1 / (states - 1) : 0.0);
  for (int i = 0; i < states; ++i) {
    g.transition(i, i) = states > 1 ? 0.9 : 1.0;
    for (std::size_t d = 0; d < kDim; ++d) {
      g.means(i, d) = static_cast<double>(i) * (1.0 + 0.25 * static_cast<double>(d));
    }
  }
  g.sessions = 40;
  g.length = 200;
  for (std::size_t d = 0; d < kDim; ++d) g.feature_names.push_back("f" + std::to_string(d));
  return g;
}

void run_ingest(const Invocation& inv, Output& out, RunRecord& rec) {
  if (inv.config.input_csv) rec.inputs.push_back(*inv.config.input_csv);
  const Dataset data = load_dataset(inv.config);
  auto [train, test] = split_sessions(data, inv.config.test_fraction, inv.config.seed);
  out.write_csv("train.csv", [&](std::ostream& o) { write_csv(o, train); });
  out.write_csv("test.csv", [&](std::ostream& o) { write_csv(o, test); });
}

void run_fit_vq(const Invocation& inv, Output& out, RunRecord& rec) {
  const Dataset train = load_table(inv, "train", rec);
  const std::string method = inv.has("method") ? inv.get("method") : "vq";
  if (method == "vq") {
    const auto& c = inv.config;
    VqQuantizer q = fit_vq_quantizer(
        train, {.k = c.codebook_size, .seed = c.seed, .max_iters = c.kmeans_max_iters, .tol = c.kmeans_tol});
    out.write("codebook.json", to_json(CodebookDocument{q.codebook, q.standardizer}));
  } else if (method == "binned") {
    BinnedQuantizer q = fit_binned_quantizer(train, inv.config.bins);
    out.write("binning.json", to_json(BinningDocument{q.scheme, q.standardizer}));
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--method must be vq or binned");
  }
}

void run_encode(const Invocation& inv, Output& out, RunRecord& rec) {
  const Dataset data = load_table(inv, "data", rec);
  const Quantizer q = load_quantizer(input_path(inv, "codebook", rec));
  std::vector<std::vector<Token>> tokens;
  bool labeled = true;
  for (const auto& s : data.sessions) {
    tokens.push_back(q.encode(s));
    labeled = labeled && s.labeled();
  }
  out.write_csv("tokens.csv", [&](std::ostream& o) { write_tokens_csv(o, data, tokens, labeled); });
}

TokenTable load_tokens(const Invocation& inv, RunRecord& rec) {
  std::istringstream in(read_text_file(input_path(inv, "tokens", rec)));
  return read_tokens_csv(in);
}

void run_fit_hmm(const Invocation& inv, Output& out, RunRecord& rec) {
  const TokenTable table = load_tokens(inv, rec);
  const std::string codebook_ref =
      fs::relative(inv.get("codebook"), inv.config.out).generic_string();
  const Quantizer q = load_quantizer(input_path(inv, "codebook", rec));
  for (std::size_t k = 0; k < table.sequences.size(); ++k) {
    if (table.sequences[k].states.empty()) {
      throw Error(ErrorCode::kMissingLabel, "session '" + table.session_ids[k] + "' has no states");
    }
  }
  HmmParams params = fit_supervised(table.sequences, static_cast<std::size_t>(inv.config.states),
                                    q.alphabet_size(), inv.config.alpha);
  out.write("hmm.json", to_json(HmmDocument{std::move(params), codebook_ref}));
}

void run_decode(const Invocation& inv, Output& out, RunRecord& rec) {
  const HmmDocument model = load_hmm(inv, rec);
  const LogModel log_model(model.params);
  std::ostringstream o;
  o << "session_id,t,state\n";
  auto emit = [&](const std::string& id, std::span<const Token> tokens) {
    const auto d = viterbi_decode(log_model, tokens);
    if (d.zero_probability) throw Error(ErrorCode::kZeroProbabilitySequence, "session '" + id + "'");
    for (std::size_t t = 0; t < d.states.size(); ++t) o << id << ',' << t << ',' << d.states[t] << '\n';
  };
  if (inv.has("tokens")) {
    model_quantizer(inv, model, rec);
    const TokenTable table = load_tokens(inv, rec);
    for (std::size_t k = 0; k < table.sequences.size(); ++k) emit(table.session_ids[k], table.sequences[k].tokens);
  } else {
    const Quantizer q = model_quantizer(inv, model, rec);
    const Dataset data = load_table(inv, "data", rec);
    for (const auto& s : data.sessions) emit(s.session_id, q.encode(s));
  }
  out.write("decoded.csv", o.str());
}

void run_evaluate(const Invocation& inv, Output& out, RunRecord& rec) {
  const HmmDocument model = load_hmm(inv, rec);
  const Quantizer q = model_quantizer(inv, model, rec);
  const Dataset test = load_table(inv, "data", rec);
  const LogModel log_model(model.params);
  const std::string name = inv.has("name") ? inv.get("name") : "hmm";
  const std::vector<ModelDescriptor> models = {{
      name,
      [&](const SessionSeries& s) { return viterbi_decode(log_model, q.encode(s)).states; },
      [&](const SessionSeries& s) { return posterior_marginals(model.params, q.encode(s)); },
  }};
  const ComparisonReport report =
      compare_models(test, models, {inv.config.reps, inv.config.warmup, steady_clock_seconds});
  out.write_csv("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, report.models); });
  out.write_csv("class_metrics.csv", [&](std::ostream& o) { write_class_metrics_csv(o, report.models); });
  out.write_csv("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, report.rows); }, true);
  for (const auto& trace : report.models[0].traces) {
    out.write_csv(fs::path("traces") / name / (trace.session_id + ".csv"),
                  [&](std::ostream& o) { write_trace_csv(o, trace); });
  }
}

void run_generate(const Invocation& inv, Output& out, RunRecord& rec) {
  const auto& c = inv.config;
  if (inv.has("model")) {
    const HmmDocument model = load_hmm(inv, rec);
    const std::size_t n = size_option(inv, "sessions", 1);
    const std::size_t length = size_option(inv, "length", kDefaultBenchLength);
    std::vector<LabeledSequence> samples;
    for (std::size_t k = 0; k < n; ++k) samples.push_back(sample_sequence(model.params, length, c.seed + k));
    out.write_csv("samples.csv", [&](std::ostream& o) { write_samples_csv(o, samples); });
    return;
  }
  GeneratorSpec spec;
  if (inv.has("spec")) {
    spec = generator_spec_from_json(read_text_file(input_path(inv, "spec", rec)));
  } else if (c.synth) {
    spec = *c.synth;
  } else {
    spec = builtin_spec(c.states);
  }
  spec.sessions = size_option(inv, "sessions", spec.sessions);
  spec.length = size_option(inv, "length", spec.length);
  const Dataset data = synthesize_dataset(spec, c.seed);
  out.write_csv("generated.csv", [&](std::ostream& o) { write_csv(o, data); });
}

HmmParams random_hmm(std::size_t s, std::size_t v, std::uint64_t seed) {
  Rng rng(seed);
  auto row = [&](std::size_t n) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& x : p) sum += (x = 0.05 + rng.uniform());
    for (auto& x : p) x /= sum;
    return p;
  };
  HmmParams p;
  p.pi = row(s);
  std::vector<std::vector<double>> a, b;
  for (std::size_t i = 0; i < s; ++i) {
    a.push_back(row(s));
    b.push_back(row(v));
  }
  p.A = Matrix::from_rows(a);
  p.B = Matrix::from_rows(b);
  return p;
}

void run_bench(const Invocation& inv, Output& out, RunRecord& rec) {
  const auto& c = inv.config;
  const HmmParams params = inv.has("model")
                               ? load_hmm(inv, rec).params
                               : random_hmm(static_cast<std::size_t>(c.states), c.codebook_size, c.seed);
  const std::size_t length = size_option(inv, "length", kDefaultBenchLength);
  const auto tokens = sample_sequence(params, length, c.seed).tokens;
  const LogModel model(params);
  const LatencyReport r = measure_latency(
      [&](std::span<const Token> obs) { return viterbi_decode(model, obs).states; }, tokens, c.reps,
      c.warmup);
  std::ostringstream o;
  o << "states,alphabet,length,repetitions,warmup,median_s,p95_s,min_s,max_s\n"
    << params.num_states() << ',' << params.alphabet_size() << ',' << length << ',' << r.repetitions
    << ',' << r.warmup << ',' << format_double(r.median) << ',' << format_double(r.p95) << ','
    << format_double(r.min) << ',' << format_double(r.max) << '\n';
  out.write("bench.csv", o.str(), true);
  std::cout << "viterbi S=" << params.num_states() << " V=" << params.alphabet_size() << " T=" << length
            << ": median " << r.median * 1e3 << " ms, p95 " << r.p95 * 1e3 << " ms over "
            << r.repetitions << " runs\n";
}

void run_pipeline_command(const Invocation& inv, Output& out, RunRecord& rec) {
  if (inv.config.input_csv) rec.inputs.push_back(*inv.config.input_csv);
  const PipelineOutputs po = run_pipeline(inv.config);
  for (const auto& f : po.files) rec.artifacts.push_back(f);
  for (const auto& f : po.timing_files) rec.timing.push_back(f);
  (void)out;
  for (const auto& m : po.result.report.models) {
    std::cout << m.name << ": accuracy " << format_double(m.metrics.accuracy) << ", macro-F1 "
              << format_double(m.metrics.macro_f1) << '\n';
  }
}

using Handler = void (*)(const Invocation&, Output&, RunRecord&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"ingest", run_ingest},     {"fit-vq", run_fit_vq},     {"encode", run_encode},
      {"fit-hmm", run_fit_hmm},   {"decode", run_decode},     {"evaluate", run_evaluate},
      {"generate", run_generate}, {"bench", run_bench},       {"pipeline", run_pipeline_command},
  };
  return table;
}

json manifest_json(const Invocation& inv, const RunRecord& rec) {
  json m;
  m["version"] = kManifestVersion;
  m["command"] = inv.command;
  m["seed"] = inv.config.seed;
  m["config"] = json::parse(config_to_json(inv.config));
  m["options"] = inv.options;
  json inputs = json::object();
  for (const auto& p : rec.inputs) inputs[p.string()] = file_hash(p);
  m["inputs"] = inputs;
  json artifacts = json::object();
  for (const auto& rel : rec.artifacts) artifacts[rel.generic_string()] = file_hash(inv.config.out / rel);
  m["artifacts"] = artifacts;
  json timing = json::array();
  for (const auto& rel : rec.timing) timing.push_back(rel.generic_string());
  m["timing_artifacts"] = timing;
  return m;
}

RunRecord execute(const Invocation& inv) {
  inv.config.validate();
  fs::create_directories(inv.config.out);
  RunRecord rec;
  Output out(inv.config.out, rec);
  handlers().at(inv.command)(inv, out, rec);
  write_text_file(inv.config.out / kManifestFile, manifest_json(inv, rec).dump(2) + "\n");
  return rec;
}

json parse_manifest(const fs::path& path) {
  try {
    json m = json::parse(read_text_file(path));
    if (m.value("version", 0) != kManifestVersion) {
      throw Error(ErrorCode::kSchemaMismatch, "unsupported manifest version");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

// Re-executes a recorded run and checks every reproducible artifact hash.
void replay(const fs::path& manifest_path, const std::optional<fs::path>& out_override) {
  const json m = parse_manifest(manifest_path);
  Invocation inv;
  try {
    inv.command = m.at("command").get<std::string>();
    inv.config = config_from_json(m.at("config").dump());
    inv.options = m.at("options").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
  if (!handlers().count(inv.command)) {
    throw Error(ErrorCode::kSchemaMismatch, "manifest names unknown command '" + inv.command + "'");
  }
  for (const auto& [path, hash] : m.at("inputs").items()) {
    if (!fs::exists(path)) throw Error(ErrorCode::kFileMissing, "recorded input missing: " + path);
    if (file_hash(path) != hash.get<std::string>()) {
      throw Error(ErrorCode::kReplayMismatch, "recorded input changed: " + path);
    }
  }
  if (out_override) inv.config.out = *out_override;
  const RunRecord rec = execute(inv);

  std::vector<std::string> timing = m.at("timing_artifacts").get<std::vector<std::string>>();
  std::size_t checked = 0;
  std::string differing;
  for (const auto& [rel, hash] : m.at("artifacts").items()) {
    if (std::find(timing.begin(), timing.end(), rel) != timing.end()) continue;
    const fs::path p = inv.config.out / rel;
    if (!fs::exists(p) || file_hash(p) != hash.get<std::string>()) differing += " " + rel;
    ++checked;
  }
  if (!differing.empty()) throw Error(ErrorCode::kReplayMismatch, "artifacts differ:" + differing);
  std::cout << "replay reproduced " << checked << " artifacts in " << inv.config.out.string() << '\n';
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> states;
  std::optional<std::size_t> codebook_size;
  std::optional<std::size_t> bins;
  std::optional<double> alpha;
  std::optional<std::string> out;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> warmup;
  std::optional<std::string> input;
  std::optional<double> test_fraction;
};

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kConfigInvalid, source + " is not an unsigned 64-bit seed: '" + text + "'");
  }
  return v;
}

// Precedence: flags, then the config file, then QOESEQ_SEED, then defaults.
PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig c;
  bool config_has_seed = false;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw Error(ErrorCode::kFileMissing, "no such config: " + f.config);
    const std::string text = read_text_file(f.config);
    c = config_from_json(text, fs::absolute(f.config).parent_path());
    config_has_seed = json::parse(text).contains("seed");
  }
  if (f.seed) {
    c.seed = *f.seed;
  } else if (!config_has_seed) {
    if (const char* env = std::getenv("QOESEQ_SEED"); env != nullptr && *env != '\0') {
      c.seed = parse_seed(env, "QOESEQ_SEED");
    }
  }
  if (f.states) c.states = *f.states;
  if (f.codebook_size) c.codebook_size = *f.codebook_size;
  if (f.bins) c.bins = *f.bins;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.out) c.out = *f.out;
  if (f.reps) c.reps = *f.reps;
  if (f.warmup) c.warmup = *f.warmup;
  if (f.test_fraction) c.test_fraction = *f.test_fraction;
  if (f.input) {
    c.input_csv = fs::path(*f.input);
    c.synth.reset();
  }
  if (c.input_csv) c.input_csv = fs::absolute(*c.input_csv);
  if (c.synth && f.states) c.synth->num_states = *f.states;
  c.out = fs::absolute(c.out);
  c.validate();
  return c;
}

int fail(ErrorCode code, const std::string& message) {
  std::cerr << "error: " << error_code_name(code) << ": " << message << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qoeseq: QoE state inference from network telemetry"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--config", flags.config, "JSON pipeline config");
  app.add_option("--seed", flags.seed, "Random seed (overrides config and QOESEQ_SEED)");
  app.add_option("--states", flags.states, "Number of QoE states S");
  app.add_option("--codebook-size", flags.codebook_size, "Codebook size K");
  app.add_option("--bins", flags.bins, "Bins per feature B for the binned baseline");
  app.add_option("--alpha", flags.alpha, "Additive smoothing");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--reps", flags.reps, "Timed repetitions for latency");
  app.add_option("--warmup", flags.warmup, "Untimed warmup calls for latency");

  std::map<std::string, std::string> options;
  auto path_opt = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    return sub->add_option_function<std::string>(
        "--" + name, [&options, name](const std::string& v) { options[name] = fs::absolute(v).string(); },
        help);
  };
  auto text_opt = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    return sub->add_option_function<std::string>(
        "--" + name, [&options, name](const std::string& v) { options[name] = v; }, help);
  };

  auto* ingest = app.add_subcommand("ingest", "Load telemetry CSV (or synthesize) and split train/test");
  ingest->add_option("--input", flags.input, "Telemetry CSV");
  ingest->add_option("--test-fraction", flags.test_fraction, "Fraction of sessions held out");

  auto* fit_vq = app.add_subcommand("fit-vq", "Fit a k-means codebook (or binning scheme)");
  path_opt(fit_vq, "train", "Training CSV")->required();
  text_opt(fit_vq, "method", "vq (default) or binned");

  auto* encode = app.add_subcommand("encode", "Map feature vectors to tokens");
  path_opt(encode, "data", "Telemetry CSV")->required();
  path_opt(encode, "codebook", "codebook.json or binning.json")->required();

  auto* fit_hmm = app.add_subcommand("fit-hmm", "Fit an HMM from labeled tokens");
  path_opt(fit_hmm, "tokens", "tokens.csv with a state column")->required();
  path_opt(fit_hmm, "codebook", "Codebook the tokens came from")->required();

  auto* decode = app.add_subcommand("decode", "Viterbi-decode QoE states; no labels needed");
  path_opt(decode, "model", "hmm.json")->required();
  auto* decode_tokens = path_opt(decode, "tokens", "tokens.csv");
  path_opt(decode, "data", "Telemetry CSV, encoded with the model's codebook")->excludes(decode_tokens);
  path_opt(decode, "codebook", "Codebook (defaults to the one named in the model)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labeled CSV");
  path_opt(evaluate, "model", "hmm.json")->required();
  path_opt(evaluate, "data", "Labeled telemetry CSV")->required();
  path_opt(evaluate, "codebook", "Codebook (defaults to the one named in the model)");
  text_opt(evaluate, "name", "Model name in reports (default hmm)");

  auto* generate = app.add_subcommand("generate", "Synthesize telemetry, or sample from an HMM");
  path_opt(generate, "spec", "Generator spec JSON");
  path_opt(generate, "model", "Sample token sequences from this hmm.json instead");
  text_opt(generate, "sessions", "Number of sessions or sequences");
  text_opt(generate, "length", "Steps per session");

  auto* bench = app.add_subcommand("bench", "Time Viterbi decoding");
  path_opt(bench, "model", "hmm.json (default: random model with --states and --codebook-size)");
  text_opt(bench, "length", "Sequence length (default 300)");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end and compare models");
  pipeline->add_option("--input", flags.input, "Telemetry CSV (instead of the config's synth spec)");
  pipeline->add_option("--test-fraction", flags.test_fraction, "Fraction of sessions held out");

  auto* replay_cmd = app.add_subcommand("replay", "Re-run from a manifest and verify its artifacts");
  std::string manifest;
  replay_cmd->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::kInvalidArgument, e.what());
  }

  try {
    if (replay_cmd->parsed()) {
      std::optional<fs::path> out;
      if (flags.out) out = fs::absolute(*flags.out);
      replay(manifest, out);
      return 0;
    }
    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.config = resolve_config(flags);
    inv.options = options;
    const RunRecord rec = execute(inv);
    std::cout << "wrote " << rec.artifacts.size() << " artifacts to " << inv.config.out.string() << '\n';
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail(ErrorCode::kParseError, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::kIoError, e.what());
  }
  return 0;
}
