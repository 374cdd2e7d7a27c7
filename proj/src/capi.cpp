#include "frosketch/frosketch.h"

#include <memory>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "frosketch/datagen.hpp"
#include "frosketch/dfrosh.hpp"
#include "frosketch/error.hpp"
#include "frosketch/eval.hpp"
#include "frosketch/fd_sketch.hpp"
#include "frosketch/ffd_sketch.hpp"
#include "frosketch/frosh.hpp"
#include "frosketch/matrix_io.hpp"
#include "frosketch/serialize.hpp"
#include "frosketch/version.hpp"

namespace fs = frosketch;

struct fsk_matrix {
  fs::DenseMatrix m;
};
struct fsk_reader {
  fs::Fsk1Reader r;
};
struct fsk_gram {
  fs::DenseMatrix g;
  double frobenius_sq = 0.0;
};
struct fsk_sketcher {
  std::variant<fs::FdSketch, fs::FfdSketcher> s;
};
struct fsk_trainer {
  fs::FroshTrainer t;
};
struct fsk_model {
  fs::HashModel m;
};
struct fsk_codes {
  fs::BinaryCodes c;
};
struct fsk_summary {
  fs::WorkerSummary s;
};
struct fsk_task {
  fs::RetrievalTask t;
};

namespace {

std::string& last_error() {
  thread_local std::string message;
  return message;
}

fsk_status fail(fsk_status status, const char* what) {
  last_error() = what;
  return status;
}

fsk_status status_of(fs::ErrorKind kind) {
  switch (kind) {
  case fs::ErrorKind::argument: return FSK_E_ARGUMENT;
  case fs::ErrorKind::io: return FSK_E_IO;
  case fs::ErrorKind::format: return FSK_E_FORMAT;
  case fs::ErrorKind::numerical: return FSK_E_NUMERICAL;
  case fs::ErrorKind::stream_length: return FSK_E_STREAM_LENGTH;
  }
  return FSK_E_INTERNAL;
}

// Runs body, translating exceptions into status codes.
template <typename F>
fsk_status guarded(F&& body) {
  try {
    body();
    return FSK_OK;
  } catch (const fs::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FSK_E_NOMEM, "out of memory");
  } catch (const std::exception& e) {
    return fail(FSK_E_INTERNAL, e.what());
  } catch (...) {
    return fail(FSK_E_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) throw fs::ArgumentError(std::string(name) + " must not be NULL");
}

fs::MatrixFormat resolve_format(const char* path, fsk_format format) {
  switch (format) {
  case FSK_FORMAT_FSK1: return fs::MatrixFormat::fsk1;
  case FSK_FORMAT_CSV: return fs::MatrixFormat::csv;
  case FSK_FORMAT_AUTO: return fs::format_from_path(path);
  }
  throw fs::ArgumentError("unknown matrix format");
}

fs::TrainConfig to_cpp(const fsk_train_config& c) {
  fs::TrainConfig out;
  out.sketcher = c.sketcher == FSK_METHOD_FD ? fs::SketchMethod::fd : fs::SketchMethod::ffd;
  out.bits = c.bits;
  out.ell = c.ell;
  out.m = c.m;
  out.eta = c.eta;
  out.chunk_rows = c.chunk_rows;
  out.seed = c.seed;
  return out;
}

fsk_train_config to_c(const fs::TrainConfig& c) {
  fsk_train_config out;
  out.sketcher = c.sketcher == fs::SketchMethod::fd ? FSK_METHOD_FD : FSK_METHOD_FFD;
  out.bits = c.bits;
  out.ell = c.ell;
  out.m = c.m;
  out.eta = c.eta;
  out.chunk_rows = c.chunk_rows;
  out.seed = c.seed;
  return out;
}

template <typename T, typename... Args>
void emit(T** out, Args&&... args) {
  need(out, "out");
  *out = new T{std::forward<Args>(args)...};
}

} // namespace

extern "C" {

const char* fsk_version(void) { return fs::kVersion; }

const char* fsk_last_error(void) { return last_error().c_str(); }

const char* fsk_status_name(fsk_status status) {
  switch (status) {
  case FSK_OK: return "ok";
  case FSK_E_ARGUMENT: return "argument error";
  case FSK_E_IO: return "io error";
  case FSK_E_FORMAT: return "format error";
  case FSK_E_NUMERICAL: return "numerical failure";
  case FSK_E_STREAM_LENGTH: return "stream length error";
  case FSK_E_NOMEM: return "out of memory";
  case FSK_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- matrices ------------------------------------------------------------

fsk_status fsk_matrix_create(size_t rows, size_t cols, const double* data, fsk_matrix** out) {
  return guarded([&] {
    if (data == nullptr) {
      emit(out, fs::DenseMatrix(rows, cols));
    } else {
      emit(out, fs::DenseMatrix(rows, cols, std::vector<double>(data, data + rows * cols)));
    }
  });
}

void fsk_matrix_free(fsk_matrix* m) { delete m; }
size_t fsk_matrix_rows(const fsk_matrix* m) { return m ? m->m.rows() : 0; }
size_t fsk_matrix_cols(const fsk_matrix* m) { return m ? m->m.cols() : 0; }
const double* fsk_matrix_data(const fsk_matrix* m) { return m ? m->m.data().data() : nullptr; }

fsk_status fsk_matrix_slice_rows(const fsk_matrix* m, size_t begin, size_t end, fsk_matrix** out) {
  return guarded([&] {
    need(m, "matrix");
    emit(out, m->m.slice_rows(begin, end));
  });
}

fsk_status fsk_matrix_load(const char* path, fsk_format format, fsk_matrix** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fs::load_matrix(path, resolve_format(path, format)));
  });
}

fsk_status fsk_matrix_save(const fsk_matrix* m, const char* path, fsk_format format) {
  return guarded([&] {
    need(m, "matrix");
    need(path, "path");
    fs::save_matrix(m->m, path, resolve_format(path, format));
  });
}

fsk_status fsk_reader_open(const char* path, fsk_reader** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fs::Fsk1Reader(path));
  });
}

void fsk_reader_free(fsk_reader* r) { delete r; }
size_t fsk_reader_rows(const fsk_reader* r) { return r ? r->r.rows() : 0; }
size_t fsk_reader_cols(const fsk_reader* r) { return r ? r->r.cols() : 0; }

fsk_status fsk_reader_next(fsk_reader* r, size_t max_rows, fsk_matrix** out) {
  return guarded([&] {
    need(r, "reader");
    emit(out, r->r.next(max_rows));
  });
}

fsk_status fsk_reader_rewind(fsk_reader* r) {
  return guarded([&] {
    need(r, "reader");
    r->r.rewind();
  });
}

// ---- data generation and metrics -------------------------------------------

fsk_status fsk_synth_lowrank(size_t n, size_t d, size_t k, double gamma, uint64_t seed, fsk_matrix** out) {
  return guarded([&] { emit(out, fs::synth_lowrank({n, d, k, gamma, seed})); });
}

fsk_status fsk_synth_clusters(size_t n, size_t d, size_t clusters, size_t latent, double center_scale,
                              double spread, double noise, uint64_t seed, fsk_matrix** out) {
  return guarded(
      [&] { emit(out, fs::synth_clusters({n, d, clusters, latent, center_scale, spread, noise, seed})); });
}

fsk_status fsk_relative_error(const fsk_matrix* a, const fsk_matrix* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = fs::relative_error(a->m, b->m);
  });
}

fsk_status fsk_gram_create(size_t d, fsk_gram** out) {
  return guarded([&] {
    fs::require(d >= 1, "gram needs d >= 1");
    emit(out, fs::DenseMatrix(d, d), 0.0);
  });
}

void fsk_gram_free(fsk_gram* g) { delete g; }

fsk_status fsk_gram_add(fsk_gram* g, const fsk_matrix* rows) {
  return guarded([&] {
    need(g, "gram");
    need(rows, "rows");
    fs::require(rows->m.cols() == g->g.cols(), "gram: column mismatch");
    g->g.map() += fs::gram(rows->m).map();
    g->frobenius_sq += rows->m.frobenius_norm_squared();
  });
}

fsk_status fsk_gram_relative_error(const fsk_gram* g, const fsk_matrix* sketch, double* out) {
  return guarded([&] {
    need(g, "gram");
    need(sketch, "sketch");
    need(out, "out");
    *out = fs::relative_error_from_gram(g->g, g->frobenius_sq, sketch->m);
  });
}

// ---- sketchers -----------------------------------------------------------

fsk_status fsk_sketcher_create(fsk_method method, size_t ell, size_t m, size_t d, uint64_t seed,
                               fsk_sketcher** out) {
  return guarded([&] {
    if (method == FSK_METHOD_FD) {
      emit(out, fs::FdSketch(ell, d));
    } else if (method == FSK_METHOD_FFD) {
      emit(out, fs::FfdSketcher(ell, m, d, seed));
    } else {
      throw fs::ArgumentError("unknown sketch method");
    }
  });
}

void fsk_sketcher_free(fsk_sketcher* s) { delete s; }

fsk_method fsk_sketcher_method(const fsk_sketcher* s) {
  return s && std::holds_alternative<fs::FfdSketcher>(s->s) ? FSK_METHOD_FFD : FSK_METHOD_FD;
}

fsk_status fsk_sketcher_insert(fsk_sketcher* s, const fsk_matrix* rows) {
  return guarded([&] {
    need(s, "sketcher");
    need(rows, "rows");
    std::visit([&](auto& impl) { impl.insert(rows->m); }, s->s);
  });
}

fsk_status fsk_sketcher_finalize(fsk_sketcher* s, fsk_matrix** out) {
  return guarded([&] {
    need(s, "sketcher");
    if (auto* fd = std::get_if<fs::FdSketch>(&s->s)) {
      emit(out, fd->matrix());
    } else {
      emit(out, std::get<fs::FfdSketcher>(s->s).finalize());
    }
  });
}

uint64_t fsk_sketcher_trials(const fsk_sketcher* s) {
  if (s == nullptr) return 0;
  const auto* ffd = std::get_if<fs::FfdSketcher>(&s->s);
  return ffd ? ffd->trial() : 0;
}

size_t fsk_sketcher_workspace_rows(const fsk_sketcher* s) {
  if (s == nullptr) return 0;
  const auto* ffd = std::get_if<fs::FfdSketcher>(&s->s);
  return ffd ? ffd->workspace().peak_rows : 0;
}

fsk_status fsk_sketcher_save(const fsk_sketcher* s, const char* path) {
  return guarded([&] {
    need(s, "sketcher");
    need(path, "path");
    std::visit([&](const auto& impl) { fs::save_checkpoint(impl, path); }, s->s);
  });
}

fsk_status fsk_sketcher_load(const char* path, fsk_sketcher** out) {
  return guarded([&] {
    need(path, "path");
    // The sidecar kind decides which loader applies; try FFD first since
    // the FD loader rejects an "ffd" sidecar and vice versa.
    try {
      emit(out, fs::load_ffd_checkpoint(path));
    } catch (const fs::FormatError&) {
      emit(out, fs::load_fd_checkpoint(path));
    }
  });
}

// ---- online hashing ------------------------------------------------------

void fsk_train_config_init(fsk_train_config* cfg) {
  if (cfg) *cfg = to_c(fs::TrainConfig{});
}

fsk_status fsk_train_config_resolve(fsk_train_config* cfg, size_t d) {
  return guarded([&] {
    need(cfg, "config");
    *cfg = to_c(to_cpp(*cfg).resolved(d));
  });
}

fsk_status fsk_trainer_create(const fsk_train_config* cfg, size_t d, fsk_trainer** out) {
  return guarded([&] {
    need(cfg, "config");
    emit(out, fs::FroshTrainer(to_cpp(*cfg), d));
  });
}

void fsk_trainer_free(fsk_trainer* t) { delete t; }

fsk_status fsk_trainer_feed(fsk_trainer* t, const fsk_matrix* chunk, fsk_model** emitted) {
  return guarded([&] {
    need(t, "trainer");
    need(chunk, "chunk");
    auto model = t->t.feed(chunk->m);
    if (emitted == nullptr) return;
    *emitted = model ? new fsk_model{std::move(*model)} : nullptr;
  });
}

fsk_status fsk_trainer_model(const fsk_trainer* t, fsk_model** out) {
  return guarded([&] {
    need(t, "trainer");
    emit(out, t->t.current_model());
  });
}

fsk_status fsk_model_lsh(size_t d, size_t r, uint64_t seed, fsk_model** out) {
  return guarded([&] { emit(out, fs::lsh_model(d, r, seed)); });
}

fsk_status fsk_model_from_sketch(const fsk_matrix* b, const double* mu, size_t r, fsk_model** out) {
  return guarded([&] {
    need(b, "sketch");
    need(mu, "mu");
    emit(out, fs::model_from_sketch(b->m, std::span<const double>(mu, b->m.cols()), r));
  });
}

void fsk_model_free(fsk_model* m) { delete m; }
size_t fsk_model_d(const fsk_model* m) { return m ? m->m.d() : 0; }
size_t fsk_model_r(const fsk_model* m) { return m ? m->m.r() : 0; }

fsk_status fsk_model_w(const fsk_model* m, fsk_matrix** out) {
  return guarded([&] {
    need(m, "model");
    emit(out, m->m.w);
  });
}

const double* fsk_model_mu(const fsk_model* m) { return m ? m->m.mu.data() : nullptr; }

int fsk_model_equal(const fsk_model* a, const fsk_model* b) { return a && b && a->m == b->m ? 1 : 0; }

fsk_status fsk_model_save(const fsk_model* m, const char* path) {
  return guarded([&] {
    need(m, "model");
    need(path, "path");
    fs::save_model(m->m, path);
  });
}

fsk_status fsk_model_load(const char* path, fsk_model** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fs::load_model(path));
  });
}

fsk_status fsk_hash(const fsk_model* model, const fsk_matrix* rows, fsk_codes** out) {
  return guarded([&] {
    need(model, "model");
    need(rows, "rows");
    emit(out, fs::hash(model->m, rows->m));
  });
}

void fsk_codes_free(fsk_codes* c) { delete c; }
size_t fsk_codes_n(const fsk_codes* c) { return c ? c->c.n() : 0; }
size_t fsk_codes_r(const fsk_codes* c) { return c ? c->c.r() : 0; }

int fsk_codes_bit(const fsk_codes* c, size_t i, size_t k) {
  if (c == nullptr || i >= c->c.n() || k >= c->c.r()) return -1;
  return c->c.bit(i, k) ? 1 : 0;
}

fsk_status fsk_codes_save(const fsk_codes* c, const char* path) {
  return guarded([&] {
    need(c, "codes");
    need(path, "path");
    fs::save_codes(c->c, path);
  });
}

fsk_status fsk_codes_load(const char* path, fsk_codes** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fs::load_codes(path));
  });
}

// ---- distributed ---------------------------------------------------------

uint64_t fsk_worker_seed(uint64_t seed, uint32_t worker_id) { return fs::worker_seed(seed, worker_id); }

fsk_status fsk_worker_sketch(const fsk_matrix* part, const fsk_train_config* cfg, uint32_t worker_id,
                             fsk_summary** out) {
  return guarded([&] {
    need(part, "part");
    need(cfg, "config");
    emit(out, fs::worker_sketch(part->m, to_cpp(*cfg), worker_id));
  });
}

fsk_status fsk_trainer_summary(const fsk_trainer* t, uint32_t worker_id, fsk_summary** out) {
  return guarded([&] {
    need(t, "trainer");
    emit(out, fs::summarize(t->t, worker_id));
  });
}

void fsk_summary_free(fsk_summary* s) { delete s; }
uint64_t fsk_summary_n(const fsk_summary* s) { return s ? s->s.n : 0; }
uint32_t fsk_summary_worker_id(const fsk_summary* s) { return s ? s->s.worker_id : 0; }
size_t fsk_summary_ell(const fsk_summary* s) { return s ? s->s.b.rows() : 0; }

fsk_status fsk_summary_save(const fsk_summary* s, const char* path) {
  return guarded([&] {
    need(s, "summary");
    need(path, "path");
    fs::save_summary(s->s, path);
  });
}

fsk_status fsk_summary_load(const char* path, fsk_summary** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fs::load_summary(path));
  });
}

fsk_status fsk_merge(const fsk_summary* const* summaries, size_t count, size_t ell, fsk_matrix** b_out,
                     fsk_matrix** phi_out, uint64_t* tau_out) {
  return guarded([&] {
    need(summaries, "summaries");
    need(b_out, "b_out");
    need(phi_out, "phi_out");
    need(tau_out, "tau_out");
    std::vector<fs::WorkerSummary> all;
    for (size_t i = 0; i < count; ++i) {
      need(summaries[i], "summary");
      all.push_back(summaries[i]->s);
    }
    fs::MergedSketch merged = fs::merge(all, ell);
    auto b = std::make_unique<fsk_matrix>(fsk_matrix{std::move(merged.b)});
    auto phi = std::make_unique<fsk_matrix>(fsk_matrix{fs::DenseMatrix(1, merged.phi.size(), merged.phi)});
    *b_out = b.release();
    *phi_out = phi.release();
    *tau_out = merged.tau;
  });
}

fsk_status fsk_train_distributed(const fsk_matrix* const* parts, size_t count, const fsk_train_config* cfg,
                                 int concurrent, fsk_model** out) {
  return guarded([&] {
    need(parts, "parts");
    need(cfg, "config");
    std::vector<fs::DenseMatrix> all;
    for (size_t i = 0; i < count; ++i) {
      need(parts[i], "part");
      all.push_back(parts[i]->m);
    }
    emit(out, fs::train_distributed(all, to_cpp(*cfg), {concurrent != 0}));
  });
}

// ---- evaluation ------------------------------------------------------------

fsk_status fsk_task_create(const fsk_matrix* database, const fsk_matrix* queries, double fraction, fsk_task** out) {
  return guarded([&] {
    need(database, "database");
    need(queries, "queries");
    emit(out, fs::make_task(database->m, queries->m, fraction));
  });
}

void fsk_task_free(fsk_task* t) { delete t; }

size_t fsk_task_truth_size(const fsk_task* t) {
  return t && !t->t.truth.empty() ? t->t.truth.front().size() : 0;
}

size_t fsk_task_queries(const fsk_task* t) { return t ? t->t.queries.rows() : 0; }

fsk_status fsk_task_map(const fsk_task* t, const fsk_model* model, double* out) {
  return guarded([&] {
    need(t, "task");
    need(model, "model");
    need(out, "out");
    *out = fs::evaluate_map(model->m, t->t);
  });
}

fsk_status fsk_task_pr_curve(const fsk_task* t, const fsk_model* model, const size_t* cuts, size_t ncuts,
                             double* recall, double* precision) {
  return guarded([&] {
    need(t, "task");
    need(model, "model");
    need(cuts, "cuts");
    need(recall, "recall");
    need(precision, "precision");
    const auto rankings = fs::rank_queries(model->m, t->t);
    const auto curve = fs::pr_curve(rankings, t->t.truth, std::span<const size_t>(cuts, ncuts));
    for (size_t i = 0; i < ncuts; ++i) {
      recall[i] = curve[i].recall;
      precision[i] = curve[i].precision;
    }
  });
}

} // extern "C"
