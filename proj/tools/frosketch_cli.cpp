// frosketch command-line driver: data synthesis, FD/FFD sketch benchmarks,
// hash training, distributed training and retrieval evaluation.
//
// Everything numerical goes through the C API in frosketch.h.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frosketch/frosketch.h"

using nlohmann::json;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitArgument = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct CliError {
  int code;
  std::string message;
};

int exit_code(fsk_status s) {
  switch (s) {
  case FSK_E_ARGUMENT: return kExitArgument;
  case FSK_E_IO:
  case FSK_E_FORMAT:
  case FSK_E_STREAM_LENGTH: return kExitIo;
  case FSK_E_NUMERICAL: return kExitNumerical;
  default: return kExitInternal;
  }
}

void check(fsk_status s) {
  if (s != FSK_OK) throw CliError{exit_code(s), std::string(fsk_status_name(s)) + ": " + fsk_last_error()};
}

[[noreturn]] void bad_argument(const std::string& message) { throw CliError{kExitArgument, message}; }

struct Free {
  void operator()(fsk_matrix* p) const { fsk_matrix_free(p); }
  void operator()(fsk_reader* p) const { fsk_reader_free(p); }
  void operator()(fsk_gram* p) const { fsk_gram_free(p); }
  void operator()(fsk_sketcher* p) const { fsk_sketcher_free(p); }
  void operator()(fsk_trainer* p) const { fsk_trainer_free(p); }
  void operator()(fsk_model* p) const { fsk_model_free(p); }
  void operator()(fsk_summary* p) const { fsk_summary_free(p); }
  void operator()(fsk_task* p) const { fsk_task_free(p); }
};
template <typename T>
using Own = std::unique_ptr<T, Free>;

// Calls an fsk_* constructor of the form f(args..., T** out).
template <typename T, typename F, typename... Args>
Own<T> make(F f, Args... args) {
  T* out = nullptr;
  check(f(args..., &out));
  return Own<T>(out);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// --seed wins, then FROSKETCH_SEED, then 0.
struct SeedOption {
  std::optional<std::uint64_t> flag;

  std::uint64_t resolve() const {
    if (flag) return *flag;
    const char* env = std::getenv("FROSKETCH_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used, 0);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      bad_argument(std::string("FROSKETCH_SEED is not an unsigned integer: ") + env);
    }
  }

  std::string source() const {
    if (flag) return "flag";
    const char* env = std::getenv("FROSKETCH_SEED");
    return env != nullptr && *env != '\0' ? "env" : "default";
  }
};

void add_seed(CLI::App* cmd, SeedOption& seed) {
  cmd->add_option("--seed", seed.flag, "Master seed (falls back to FROSKETCH_SEED, then 0)");
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CliError{kExitIo, "cannot open " + path + " for writing"};
  out << j.dump(2) << '\n';
  if (!out) throw CliError{kExitIo, "write failed for " + path};
}

// Every output file gets <path>.manifest.json describing how it was made.
struct Manifest {
  json doc;

  explicit Manifest(std::string command) {
    doc = {{"command", std::move(command)},
           {"version", fsk_version()},
           {"params", json::object()},
           {"seeds", json::object()},
           {"timings_ms", json::object()},
           {"probe", json::object()}};
  }

  void write_next_to(const std::string& output) const { write_json_file(output + ".manifest.json", doc); }
};

// Row source over FSK1 (streamed) or CSV (loaded whole).
class RowSource {
public:
  explicit RowSource(const std::string& path) {
    if (std::filesystem::path(path).extension() == ".csv") {
      whole_ = make<fsk_matrix>(fsk_matrix_load, path.c_str(), FSK_FORMAT_CSV);
    } else {
      reader_ = make<fsk_reader>(fsk_reader_open, path.c_str());
    }
  }

  std::size_t rows() const { return reader_ ? fsk_reader_rows(reader_.get()) : fsk_matrix_rows(whole_.get()); }
  std::size_t cols() const { return reader_ ? fsk_reader_cols(reader_.get()) : fsk_matrix_cols(whole_.get()); }

  // Empty (0-row) matrix once exhausted.
  Own<fsk_matrix> next(std::size_t max_rows) {
    if (reader_) return make<fsk_matrix>(fsk_reader_next, reader_.get(), max_rows);
    const std::size_t end = std::min(rows(), pos_ + max_rows);
    auto out = make<fsk_matrix>(fsk_matrix_slice_rows, static_cast<const fsk_matrix*>(whole_.get()), pos_, end);
    pos_ = end;
    return out;
  }

  void rewind() {
    if (reader_) check(fsk_reader_rewind(reader_.get()));
    pos_ = 0;
  }

private:
  Own<fsk_reader> reader_;
  Own<fsk_matrix> whole_;
  std::size_t pos_ = 0;
};

Own<fsk_matrix> load(const std::string& path) { return make<fsk_matrix>(fsk_matrix_load, path.c_str(), FSK_FORMAT_AUTO); }

Own<fsk_matrix> slice(const fsk_matrix* m, std::size_t begin, std::size_t end) {
  return make<fsk_matrix>(fsk_matrix_slice_rows, m, begin, end);
}

// Contiguous equal parts, remainder to the last one.
std::vector<Own<fsk_matrix>> split_even(const fsk_matrix* m, std::size_t parts) {
  const std::size_t n = fsk_matrix_rows(m);
  if (parts == 0 || n < parts) bad_argument("cannot split " + std::to_string(n) + " rows into " + std::to_string(parts) + " parts");
  const std::size_t base = n / parts;
  std::vector<Own<fsk_matrix>> out;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t begin = i * base;
    out.push_back(slice(m, begin, i + 1 == parts ? n : begin + base));
  }
  return out;
}

// ---- training options shared by train / dfrosh / worker / eval ------------

struct TrainOptions {
  std::size_t bits = 32;
  std::size_t ell = 0;
  std::size_t m = 0;
  std::size_t chunk = 0;
};

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--bits", t.bits, "Code length r")->capture_default_str();
  cmd->add_option("--ell", t.ell, "Sketch size (default 2*bits)");
  cmd->add_option("--m", t.m, "SRHT buffer rows, a power of two (default: 4d rounded up)");
  cmd->add_option("--chunk", t.chunk, "Rows per streamed chunk (default m)");
}

fsk_train_config resolve_config(const TrainOptions& t, fsk_method method, std::uint64_t seed, std::size_t d) {
  fsk_train_config cfg;
  fsk_train_config_init(&cfg);
  cfg.sketcher = method;
  cfg.bits = t.bits;
  cfg.ell = t.ell;
  cfg.m = t.m;
  cfg.chunk_rows = t.chunk;
  cfg.seed = seed;
  check(fsk_train_config_resolve(&cfg, d));
  return cfg;
}

json config_json(const fsk_train_config& cfg) {
  return {{"sketcher", cfg.sketcher == FSK_METHOD_FD ? "fd" : "ffd"},
          {"bits", cfg.bits},
          {"ell", cfg.ell},
          {"m", cfg.m},
          {"chunk_rows", cfg.chunk_rows}};
}

constexpr std::size_t kNoIntermediateModels = std::numeric_limits<std::size_t>::max();

Own<fsk_model> model_from_summaries(const std::vector<Own<fsk_summary>>& summaries, std::size_t ell, std::size_t bits,
                                    std::uint64_t* tau_out = nullptr) {
  std::vector<const fsk_summary*> raw;
  for (const auto& s : summaries) raw.push_back(s.get());
  fsk_matrix* b = nullptr;
  fsk_matrix* phi = nullptr;
  std::uint64_t tau = 0;
  check(fsk_merge(raw.data(), raw.size(), ell, &b, &phi, &tau));
  Own<fsk_matrix> b_own(b);
  Own<fsk_matrix> phi_own(phi);
  if (tau_out) *tau_out = tau;
  return make<fsk_model>(fsk_model_from_sketch, static_cast<const fsk_matrix*>(b), fsk_matrix_data(phi), bits);
}

// Runs fn(i) for i < count, on separate threads when threads > 1. Each task
// reports its own failure since fsk_last_error is per thread.
template <typename F>
void for_workers(std::size_t count, std::size_t threads, F fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t i = 0; i < count; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  for (auto& j : jobs) j.get();
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "lowrank";
  std::size_t n = 1000;
  std::size_t d = 64;
  std::size_t k = 10;
  double gamma = 10.0;
  std::size_t clusters = 10;
  std::size_t latent = 32;
  double center_scale = 0.5;
  double spread = 1.0;
  double noise = 0.3;
  SeedOption seed;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  Manifest man("synth");
  Own<fsk_matrix> m;
  const auto start = Clock::now();
  if (a.kind == "lowrank") {
    m = make<fsk_matrix>(fsk_synth_lowrank, a.n, a.d, a.k, a.gamma, seed);
    man.doc["params"] = {{"kind", a.kind}, {"n", a.n}, {"d", a.d}, {"k", a.k}, {"gamma", a.gamma}};
  } else {
    m = make<fsk_matrix>(fsk_synth_clusters, a.n, a.d, a.clusters, a.latent, a.center_scale, a.spread, a.noise,
                         seed);
    man.doc["params"] = {{"kind", a.kind},
                         {"n", a.n},
                         {"d", a.d},
                         {"clusters", a.clusters},
                         {"latent", a.latent},
                         {"center_scale", a.center_scale},
                         {"spread", a.spread},
                         {"noise", a.noise}};
  }
  man.doc["timings_ms"]["generate"] = ms_since(start);
  man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}};
  check(fsk_matrix_save(m.get(), a.out.c_str(), FSK_FORMAT_AUTO));
  man.doc["outputs"] = {a.out};
  man.write_next_to(a.out);
  return 0;
}

// ---- sketch ----------------------------------------------------------------

struct SketchArgs {
  std::string in;
  std::string method = "ffd";
  std::size_t ell = 64;
  std::size_t m = 0;
  SeedOption seed;
  std::string out;
  std::string report = "none";
  std::string checkpoint;
  std::string resume;
};

int run_sketch(const SketchArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  if (a.report == "exact" && !a.resume.empty()) {
    bad_argument("--report exact needs the whole stream and cannot be combined with --resume");
  }
  RowSource src(a.in);
  const std::size_t d = src.cols();
  if (d == 0) bad_argument("input has no columns");

  Own<fsk_sketcher> sk;
  std::size_t m = a.m;
  if (a.resume.empty()) {
    if (m == 0) {
      m = 1;
      while (m < 4 * d) m <<= 1;
    }
    sk = make<fsk_sketcher>(fsk_sketcher_create, a.method == "fd" ? FSK_METHOD_FD : FSK_METHOD_FFD, a.ell, m, d, seed);
  } else {
    sk = make<fsk_sketcher>(fsk_sketcher_load, a.resume.c_str());
    if (m == 0) {
      m = 1;
      while (m < 4 * d) m <<= 1;
    }
  }
  const bool ffd = fsk_sketcher_method(sk.get()) == FSK_METHOD_FFD;

  Own<fsk_gram> gram;
  if (a.report == "exact") gram = make<fsk_gram>(fsk_gram_create, d);

  double sketch_ms = 0.0;
  std::size_t n = 0;
  for (;;) {
    auto chunk = src.next(m);
    if (fsk_matrix_rows(chunk.get()) == 0) break;
    n += fsk_matrix_rows(chunk.get());
    const auto t0 = Clock::now();
    check(fsk_sketcher_insert(sk.get(), chunk.get()));
    sketch_ms += ms_since(t0);
  }
  if (!a.checkpoint.empty()) check(fsk_sketcher_save(sk.get(), a.checkpoint.c_str()));
  const auto t0 = Clock::now();
  auto b = make<fsk_matrix>(fsk_sketcher_finalize, sk.get());
  sketch_ms += ms_since(t0);
  const std::size_t ell = fsk_matrix_rows(b.get());

  Manifest man("sketch");
  json report = {{"method", ffd ? "ffd" : "fd"},
                 {"ell", ell},
                 {"m", m},
                 {"n", n},
                 {"d", d},
                 {"relative_error", nullptr},
                 {"time_ms", sketch_ms}};
  if (gram) {
    // Second pass over the input for the exact Gram.
    const auto g0 = Clock::now();
    src.rewind();
    for (;;) {
      auto chunk = src.next(m);
      if (fsk_matrix_rows(chunk.get()) == 0) break;
      check(fsk_gram_add(gram.get(), chunk.get()));
    }
    double err = 0.0;
    check(fsk_gram_relative_error(gram.get(), b.get(), &err));
    report["relative_error"] = err;
    man.doc["timings_ms"]["exact_report"] = ms_since(g0);
  }
  check(fsk_matrix_save(b.get(), a.out.c_str(), FSK_FORMAT_AUTO));

  man.doc["params"] = {{"in", a.in}, {"method", ffd ? "ffd" : "fd"}, {"ell", ell}, {"m", m},
                       {"report", a.report}, {"resume", a.resume}, {"checkpoint", a.checkpoint}};
  man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}};
  man.doc["timings_ms"]["sketch"] = sketch_ms;
  man.doc["probe"] = {{"transform_workspace_rows", fsk_sketcher_workspace_rows(sk.get())},
                      {"compressions", fsk_sketcher_trials(sk.get())},
                      {"max_in_core_rows", m}};
  man.doc["report"] = report;
  man.doc["outputs"] = {a.out};
  man.write_next_to(a.out);
  std::cout << report.dump() << '\n';
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string in;
  std::string method = "frosh";
  TrainOptions t;
  std::size_t eta = 0;
  SeedOption seed;
  std::string model_out;
};

int run_train(const TrainArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  RowSource src(a.in);
  const std::size_t d = src.cols();
  Manifest man("train");
  man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}};
  json outputs = json::array();

  if (a.method == "lsh") {
    const auto t0 = Clock::now();
    auto model = make<fsk_model>(fsk_model_lsh, d, a.t.bits, seed);
    man.doc["timings_ms"]["generate"] = ms_since(t0);
    man.doc["timings_ms"]["sketch"] = 0.0;
    man.doc["params"] = {{"in", a.in}, {"method", a.method}, {"bits", a.t.bits}, {"passes", 0}};
    check(fsk_model_save(model.get(), a.model_out.c_str()));
  } else {
    fsk_train_config cfg = resolve_config(a.t, a.method == "osh" ? FSK_METHOD_FD : FSK_METHOD_FFD, seed, d);
    cfg.eta = a.eta == 0 ? kNoIntermediateModels : a.eta;
    auto trainer = make<fsk_trainer>(fsk_trainer_create, static_cast<const fsk_train_config*>(&cfg), d);
    double train_ms = 0.0;
    std::size_t emitted = 0;
    for (;;) {
      auto chunk = src.next(cfg.chunk_rows);
      if (fsk_matrix_rows(chunk.get()) == 0) break;
      fsk_model* raw = nullptr;
      const auto t0 = Clock::now();
      check(fsk_trainer_feed(trainer.get(), chunk.get(), &raw));
      train_ms += ms_since(t0);
      Own<fsk_model> model(raw);
      if (model) {
        const std::string path = a.model_out + "." + std::to_string(++emitted);
        check(fsk_model_save(model.get(), path.c_str()));
        outputs.push_back(path);
      }
    }
    const auto t0 = Clock::now();
    auto model = make<fsk_model>(fsk_trainer_model, static_cast<const fsk_trainer*>(trainer.get()));
    train_ms += ms_since(t0);
    check(fsk_model_save(model.get(), a.model_out.c_str()));
    json params = config_json(cfg);
    params["in"] = a.in;
    params["method"] = a.method;
    params["eta"] = a.eta == 0 ? json(nullptr) : json(a.eta);
    man.doc["params"] = params;
    man.doc["timings_ms"]["sketch"] = train_ms;
  }
  outputs.push_back(a.model_out);
  man.doc["outputs"] = outputs;
  man.write_next_to(a.model_out);
  return 0;
}

// ---- dfrosh / worker / merge -------------------------------------------------

struct DfroshArgs {
  std::string in;
  std::size_t workers = 5;
  TrainOptions t;
  SeedOption seed;
  std::size_t threads = 1;
  std::string model_out;
  std::string summaries_dir;
};

std::string summary_name(std::size_t id) { return "worker-" + std::to_string(id) + ".summary"; }

int run_dfrosh(const DfroshArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  auto data = load(a.in);
  const std::size_t d = fsk_matrix_cols(data.get());
  const fsk_train_config cfg = resolve_config(a.t, FSK_METHOD_FFD, seed, d);
  auto parts = split_even(data.get(), a.workers);

  std::vector<Own<fsk_summary>> summaries(a.workers);
  std::vector<CliError> failures(a.workers, CliError{0, {}});
  json seeds = json::array();
  for (std::size_t i = 0; i < a.workers; ++i) seeds.push_back(fsk_worker_seed(seed, static_cast<uint32_t>(i)));

  const auto t0 = Clock::now();
  for_workers(a.workers, a.threads, [&](std::size_t i) {
    try {
      fsk_train_config local = cfg;
      local.seed = fsk_worker_seed(seed, static_cast<uint32_t>(i));
      summaries[i] = make<fsk_summary>(fsk_worker_sketch, static_cast<const fsk_matrix*>(parts[i].get()),
                                       static_cast<const fsk_train_config*>(&local), static_cast<uint32_t>(i));
    } catch (const CliError& e) {
      failures[i] = e;
    }
  });
  const double workers_ms = ms_since(t0);
  for (const auto& f : failures) {
    if (f.code != 0) throw f;
  }

  json outputs = json::array();
  if (!a.summaries_dir.empty()) {
    std::filesystem::create_directories(a.summaries_dir);
    for (std::size_t i = 0; i < a.workers; ++i) {
      const std::string path = (std::filesystem::path(a.summaries_dir) / summary_name(i)).string();
      check(fsk_summary_save(summaries[i].get(), path.c_str()));
      outputs.push_back(path);
    }
  }

  const auto t1 = Clock::now();
  std::uint64_t tau = 0;
  auto model = model_from_summaries(summaries, cfg.ell, cfg.bits, &tau);
  const double merge_ms = ms_since(t1);
  check(fsk_model_save(model.get(), a.model_out.c_str()));
  outputs.push_back(a.model_out);

  Manifest man("dfrosh");
  json params = config_json(cfg);
  params["in"] = a.in;
  params["workers"] = a.workers;
  params["threads"] = a.threads;
  params["tau"] = tau;
  man.doc["params"] = params;
  man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}, {"workers", seeds}};
  man.doc["timings_ms"] = {{"workers", workers_ms}, {"merge", merge_ms}};
  man.doc["outputs"] = outputs;
  man.write_next_to(a.model_out);
  return 0;
}

struct WorkerArgs {
  std::string in;
  std::size_t workers = 5;
  std::size_t id = 0;
  TrainOptions t;
  SeedOption seed;
  std::string out;
};

int run_worker(const WorkerArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  if (a.id >= a.workers) bad_argument("--id must be below --workers");
  auto data = load(a.in);
  const std::size_t d = fsk_matrix_cols(data.get());
  fsk_train_config cfg = resolve_config(a.t, FSK_METHOD_FFD, seed, d);
  auto parts = split_even(data.get(), a.workers);
  cfg.seed = fsk_worker_seed(seed, static_cast<uint32_t>(a.id));
  const auto t0 = Clock::now();
  auto summary = make<fsk_summary>(fsk_worker_sketch, static_cast<const fsk_matrix*>(parts[a.id].get()),
                                   static_cast<const fsk_train_config*>(&cfg), static_cast<uint32_t>(a.id));
  const double ms = ms_since(t0);
  check(fsk_summary_save(summary.get(), a.out.c_str()));

  Manifest man("worker");
  json params = config_json(cfg);
  params["in"] = a.in;
  params["workers"] = a.workers;
  params["id"] = a.id;
  params["rows"] = fsk_summary_n(summary.get());
  man.doc["params"] = params;
  man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}, {"worker", cfg.seed}};
  man.doc["timings_ms"]["sketch"] = ms;
  man.doc["outputs"] = {a.out};
  man.write_next_to(a.out);
  return 0;
}

struct MergeArgs {
  std::vector<std::string> summaries;
  std::size_t bits = 32;
  std::string out;
};

int run_merge(const MergeArgs& a) {
  std::vector<Own<fsk_summary>> summaries;
  json ids = json::array();
  for (const auto& p : a.summaries) {
    summaries.push_back(make<fsk_summary>(fsk_summary_load, p.c_str()));
    ids.push_back(fsk_summary_worker_id(summaries.back().get()));
  }
  const std::size_t ell = fsk_summary_ell(summaries.front().get());
  const auto t0 = Clock::now();
  std::uint64_t tau = 0;
  auto model = model_from_summaries(summaries, ell, a.bits, &tau);
  const double ms = ms_since(t0);
  check(fsk_model_save(model.get(), a.out.c_str()));

  Manifest man("merge");
  man.doc["params"] = {{"summaries", a.summaries}, {"worker_ids", ids}, {"bits", a.bits}, {"ell", ell}, {"tau", tau}};
  man.doc["timings_ms"]["merge"] = ms;
  man.doc["outputs"] = {a.out};
  man.write_next_to(a.out);
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string db;
  std::string queries;
  double holdout = 0.01;
  double fraction = 0.02;
  std::string model;
  std::string method = "frosh";
  std::size_t rounds = 10;
  TrainOptions t;
  std::size_t workers = 5;
  std::size_t threads = 1;
  std::size_t pr_points = 20;
  SeedOption seed;
  std::string out;
};

// Incrementally trained model for one method, advanced a round at a time.
class RoundTrainer {
public:
  RoundTrainer(const EvalArgs& a, std::uint64_t seed, std::size_t d) : a_(a), seed_(seed), d_(d) {
    if (a.method == "lsh") return;
    cfg_ = resolve_config(a.t, a.method == "osh" ? FSK_METHOD_FD : FSK_METHOD_FFD, seed, d);
    cfg_.eta = kNoIntermediateModels;
    const std::size_t count = a.method == "dfrosh" ? a.workers : 1;
    if (count == 0) bad_argument("--workers must be >= 1");
    for (std::size_t i = 0; i < count; ++i) {
      fsk_train_config local = cfg_;
      if (a.method == "dfrosh") local.seed = fsk_worker_seed(seed, static_cast<uint32_t>(i));
      trainers_.push_back(make<fsk_trainer>(fsk_trainer_create, static_cast<const fsk_train_config*>(&local), d));
    }
  }

  json config() const {
    if (a_.method == "lsh") return {{"bits", a_.t.bits}};
    json c = config_json(cfg_);
    if (a_.method == "dfrosh") c["workers"] = a_.workers;
    return c;
  }

  // Trains on part and returns the model for everything seen so far.
  Own<fsk_model> advance(const fsk_matrix* part) {
    if (a_.method == "lsh") return make<fsk_model>(fsk_model_lsh, d_, a_.t.bits, seed_);
    if (a_.method != "dfrosh") {
      feed(trainers_[0].get(), part);
      return make<fsk_model>(fsk_trainer_model, static_cast<const fsk_trainer*>(trainers_[0].get()));
    }
    const std::size_t n = fsk_matrix_rows(part);
    const std::size_t w = trainers_.size();
    const std::size_t base = n / w;
    std::vector<CliError> failures(w, CliError{0, {}});
    for_workers(w, a_.threads, [&](std::size_t i) {
      try {
        const std::size_t begin = i * base;
        const std::size_t end = i + 1 == w ? n : begin + base;
        if (end > begin) feed(trainers_[i].get(), slice(part, begin, end).get());
      } catch (const CliError& e) {
        failures[i] = e;
      }
    });
    for (const auto& f : failures) {
      if (f.code != 0) throw f;
    }
    std::vector<Own<fsk_summary>> summaries;
    for (std::size_t i = 0; i < w; ++i) {
      fsk_summary* s = nullptr;
      // A worker that has seen no rows yet has nothing to contribute.
      if (fsk_trainer_summary(trainers_[i].get(), static_cast<uint32_t>(i), &s) == FSK_OK) summaries.emplace_back(s);
    }
    if (summaries.empty()) bad_argument("no worker received any rows");
    return model_from_summaries(summaries, cfg_.ell, cfg_.bits);
  }

private:
  void feed(fsk_trainer* t, const fsk_matrix* rows) const {
    const std::size_t n = fsk_matrix_rows(rows);
    for (std::size_t begin = 0; begin < n; begin += cfg_.chunk_rows) {
      auto chunk = slice(rows, begin, std::min(n, begin + cfg_.chunk_rows));
      check(fsk_trainer_feed(t, chunk.get(), nullptr));
    }
  }

  const EvalArgs& a_;
  std::uint64_t seed_;
  std::size_t d_;
  fsk_train_config cfg_{};
  std::vector<Own<fsk_trainer>> trainers_;
};

json pr_curve_json(const fsk_task* task, const fsk_model* model, std::size_t n, std::size_t points,
                   const std::string& method) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i <= points; ++i) {
    const std::size_t c = std::max<std::size_t>(1, (n * i + points / 2) / points);
    if (cuts.empty() || cuts.back() != c) cuts.push_back(c);
  }
  std::vector<double> recall(cuts.size());
  std::vector<double> precision(cuts.size());
  check(fsk_task_pr_curve(task, model, cuts.data(), cuts.size(), recall.data(), precision.data()));
  return {{"pr_curve", {{"method", method}, {"bits", fsk_model_r(model)}, {"returned", cuts},
                        {"recall", recall}, {"precision", precision}}}};
}

int run_eval(const EvalArgs& a) {
  const std::uint64_t seed = a.seed.resolve();
  if (a.pr_points == 0) bad_argument("--pr-points must be >= 1");
  Manifest man("eval");

  auto db_all = load(a.db);
  Own<fsk_matrix> database;
  Own<fsk_matrix> queries;
  if (!a.queries.empty()) {
    queries = load(a.queries);
    database = std::move(db_all);
  } else {
    if (!(a.holdout > 0.0 && a.holdout < 1.0)) bad_argument("--holdout must be in (0, 1)");
    const std::size_t n = fsk_matrix_rows(db_all.get());
    const double raw = a.holdout * static_cast<double>(n);
    const auto nq = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw))));
    if (nq >= n) bad_argument("holdout leaves no database rows");
    database = slice(db_all.get(), 0, n - nq);
    queries = slice(db_all.get(), n - nq, n);
  }
  const std::size_t n = fsk_matrix_rows(database.get());
  const std::size_t d = fsk_matrix_cols(database.get());

  const auto g0 = Clock::now();
  auto task = make<fsk_task>(fsk_task_create, static_cast<const fsk_matrix*>(database.get()),
                             static_cast<const fsk_matrix*>(queries.get()), a.fraction);
  man.doc["timings_ms"]["ground_truth"] = ms_since(g0);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw CliError{kExitIo, "cannot open " + a.out + " for writing"};
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  json params = {{"db", a.db},
                 {"queries", a.queries.empty() ? json(nullptr) : json(a.queries)},
                 {"holdout", a.queries.empty() ? json(a.holdout) : json(nullptr)},
                 {"n", n},
                 {"d", d},
                 {"query_count", fsk_task_queries(task.get())},
                 {"fraction", a.fraction},
                 {"truth_size", fsk_task_truth_size(task.get())}};
  json rounds = json::array();

  if (!a.model.empty()) {
    auto model = make<fsk_model>(fsk_model_load, a.model.c_str());
    double map = 0.0;
    check(fsk_task_map(task.get(), model.get(), &map));
    json row = {{"round", 1}, {"bits", fsk_model_r(model.get())}, {"method", "model"}, {"map", map}, {"time_ms", 0.0}};
    out << row.dump() << '\n';
    out << pr_curve_json(task.get(), model.get(), n, a.pr_points, "model").dump() << '\n';
    params["model"] = a.model;
    rounds.push_back(row);
  } else {
    if (a.method != "lsh" && a.method != "osh" && a.method != "frosh" && a.method != "dfrosh") {
      bad_argument("unknown --method " + a.method);
    }
    if (a.rounds == 0 || a.rounds > n) bad_argument("--rounds must be in [1, n]");
    RoundTrainer trainer(a, seed, d);
    auto parts = split_even(database.get(), a.rounds);
    Own<fsk_model> model;
    double train_ms = 0.0;
    for (std::size_t r = 0; r < a.rounds; ++r) {
      const auto t0 = Clock::now();
      model = trainer.advance(parts[r].get());
      const double ms = ms_since(t0);
      train_ms += ms;
      double map = 0.0;
      check(fsk_task_map(task.get(), model.get(), &map));
      json row = {{"round", r + 1}, {"bits", fsk_model_r(model.get())}, {"method", a.method}, {"map", map},
                  {"time_ms", ms}};
      out << row.dump() << '\n';
      out.flush();
      rounds.push_back(row);
    }
    out << pr_curve_json(task.get(), model.get(), n, a.pr_points, a.method).dump() << '\n';
    params["method"] = a.method;
    params["rounds"] = a.rounds;
    params["threads"] = a.threads;
    params["train"] = trainer.config();
    man.doc["timings_ms"]["train"] = train_ms;
  }
  if (!out) throw CliError{kExitIo, "write failed for " + (a.out.empty() ? std::string("stdout") : a.out)};

  if (!a.out.empty()) {
    man.doc["params"] = params;
    man.doc["seeds"] = {{"master", seed}, {"source", a.seed.source()}};
    man.doc["rounds"] = rounds;
    man.doc["outputs"] = {a.out};
    man.write_next_to(a.out);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming matrix sketches (FD, FFD) and online hashing (FROSH, DFROSH)"};
  app.set_version_flag("--version", std::string(fsk_version()));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic matrix");
  c_synth->add_option("--kind", synth.kind)->check(CLI::IsMember({"lowrank", "clusters"}))->capture_default_str();
  c_synth->add_option("--n", synth.n)->capture_default_str();
  c_synth->add_option("--d", synth.d)->capture_default_str();
  c_synth->add_option("--k", synth.k, "Rank of the signal (lowrank)")->capture_default_str();
  c_synth->add_option("--gamma", synth.gamma, "Noise divisor (lowrank)")->capture_default_str();
  c_synth->add_option("--clusters", synth.clusters)->capture_default_str();
  c_synth->add_option("--latent", synth.latent, "Latent dimension of the clusters")->capture_default_str();
  c_synth->add_option("--center-scale", synth.center_scale)->capture_default_str();
  c_synth->add_option("--spread", synth.spread, "Within-cluster standard deviation")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Ambient noise standard deviation")->capture_default_str();
  add_seed(c_synth, synth.seed);
  c_synth->add_option("--out", synth.out, "Output matrix (.csv or FSK1)")->required();

  SketchArgs sketch;
  auto* c_sketch = app.add_subcommand("sketch", "Sketch a matrix with FD or FFD");
  c_sketch->add_option("--in", sketch.in)->required();
  c_sketch->add_option("--method", sketch.method)->check(CLI::IsMember({"fd", "ffd"}))->capture_default_str();
  c_sketch->add_option("--ell", sketch.ell)->capture_default_str();
  c_sketch->add_option("--m", sketch.m, "Chunk/buffer rows (default: 4d rounded up to a power of two)");
  add_seed(c_sketch, sketch.seed);
  c_sketch->add_option("--out", sketch.out)->required();
  c_sketch->add_option("--report", sketch.report, "exact computes the relative error with a second pass")
      ->check(CLI::IsMember({"none", "exact"}))
      ->capture_default_str();
  c_sketch->add_option("--checkpoint", sketch.checkpoint, "Save sketcher state after the input is consumed");
  c_sketch->add_option("--resume", sketch.resume, "Continue from a saved checkpoint");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a hash model on a stream");
  c_train->add_option("--in", train.in)->required();
  c_train->add_option("--method", train.method)->check(CLI::IsMember({"lsh", "osh", "frosh"}))->capture_default_str();
  add_train_options(c_train, train.t);
  c_train->add_option("--eta", train.eta, "Also save a model every eta chunks");
  add_seed(c_train, train.seed);
  c_train->add_option("--model-out", train.model_out)->required();

  DfroshArgs dfrosh;
  auto* c_dfrosh = app.add_subcommand("dfrosh", "Distributed training over equal contiguous splits");
  c_dfrosh->add_option("--in", dfrosh.in)->required();
  c_dfrosh->add_option("--workers", dfrosh.workers)->check(CLI::PositiveNumber)->capture_default_str();
  add_train_options(c_dfrosh, dfrosh.t);
  add_seed(c_dfrosh, dfrosh.seed);
  c_dfrosh->add_option("--threads", dfrosh.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  c_dfrosh->add_option("--model-out", dfrosh.model_out)->required();
  c_dfrosh->add_option("--summaries-dir", dfrosh.summaries_dir, "Also save every worker summary here");

  WorkerArgs worker;
  auto* c_worker = app.add_subcommand("worker", "Sketch one worker's split and save its summary");
  c_worker->add_option("--in", worker.in)->required();
  c_worker->add_option("--workers", worker.workers)->check(CLI::PositiveNumber)->capture_default_str();
  c_worker->add_option("--id", worker.id)->required();
  add_train_options(c_worker, worker.t);
  add_seed(c_worker, worker.seed);
  c_worker->add_option("--out", worker.out)->required();

  MergeArgs merge;
  auto* c_merge = app.add_subcommand("merge", "Merge worker summaries into a model");
  c_merge->add_option("summaries", merge.summaries)->required();
  c_merge->add_option("--bits", merge.bits)->capture_default_str();
  c_merge->add_option("--out", merge.out)->required();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Retrieval MAP by rounds, or for a saved model");
  c_eval->add_option("--db", eval.db)->required();
  c_eval->add_option("--queries", eval.queries, "Query matrix (default: hold out the last rows of --db)");
  c_eval->add_option("--holdout", eval.holdout, "Fraction of --db held out as queries")->capture_default_str();
  c_eval->add_option("--fraction", eval.fraction, "Ground-truth neighbor fraction")->capture_default_str();
  c_eval->add_option("--model", eval.model, "Evaluate this model once instead of training");
  c_eval->add_option("--method", eval.method)
      ->check(CLI::IsMember({"lsh", "osh", "frosh", "dfrosh"}))
      ->capture_default_str();
  c_eval->add_option("--rounds", eval.rounds)->capture_default_str();
  add_train_options(c_eval, eval.t);
  c_eval->add_option("--workers", eval.workers)->check(CLI::PositiveNumber)->capture_default_str();
  c_eval->add_option("--threads", eval.threads)->check(CLI::PositiveNumber)->capture_default_str();
  c_eval->add_option("--pr-points", eval.pr_points)->capture_default_str();
  add_seed(c_eval, eval.seed);
  c_eval->add_option("--out", eval.out, "JSON-lines output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitArgument;
  }

  try {
    if (*c_synth) return run_synth(synth);
    if (*c_sketch) return run_sketch(sketch);
    if (*c_train) return run_train(train);
    if (*c_dfrosh) return run_dfrosh(dfrosh);
    if (*c_worker) return run_worker(worker);
    if (*c_merge) return run_merge(merge);
    if (*c_eval) return run_eval(eval);
  } catch (const CliError& e) {
    std::cerr << "frosketch: " << e.message << '\n';
    return e.code;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "frosketch: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "frosketch: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
