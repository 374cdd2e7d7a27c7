/*
 * frosketch C API.
 *
 * Every object is an opaque handle created by a fsk_*_create / load call and
 * released with the matching fsk_*_free (free functions accept NULL).
 * Functions returning fsk_status leave their out-parameters untouched on
 * failure; fsk_last_error() then describes the failure for the calling
 * thread until its next failing call.
 */
#ifndef FROSKETCH_FROSKETCH_H
#define FROSKETCH_FROSKETCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FSK_API __declspec(dllexport)
#else
#  define FSK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fsk_status {
  FSK_OK = 0,
  FSK_E_ARGUMENT = 1,
  FSK_E_IO = 2,
  FSK_E_FORMAT = 3,
  FSK_E_NUMERICAL = 4,
  FSK_E_STREAM_LENGTH = 5,
  FSK_E_NOMEM = 6,
  FSK_E_INTERNAL = 7
} fsk_status;

typedef enum fsk_format { FSK_FORMAT_AUTO = 0, FSK_FORMAT_FSK1 = 1, FSK_FORMAT_CSV = 2 } fsk_format;

typedef enum fsk_method { FSK_METHOD_FD = 0, FSK_METHOD_FFD = 1 } fsk_method;

typedef struct fsk_matrix fsk_matrix;
typedef struct fsk_reader fsk_reader;
typedef struct fsk_gram fsk_gram;
typedef struct fsk_sketcher fsk_sketcher;
typedef struct fsk_trainer fsk_trainer;
typedef struct fsk_model fsk_model;
typedef struct fsk_codes fsk_codes;
typedef struct fsk_summary fsk_summary;
typedef struct fsk_task fsk_task;

FSK_API const char* fsk_version(void);
FSK_API const char* fsk_last_error(void);
FSK_API const char* fsk_status_name(fsk_status status);

/* ---- matrices ---------------------------------------------------------- */

/* data may be NULL for a zero matrix; otherwise rows*cols row-major values. */
FSK_API fsk_status fsk_matrix_create(size_t rows, size_t cols, const double* data, fsk_matrix** out);
FSK_API void fsk_matrix_free(fsk_matrix* m);
FSK_API size_t fsk_matrix_rows(const fsk_matrix* m);
FSK_API size_t fsk_matrix_cols(const fsk_matrix* m);
FSK_API const double* fsk_matrix_data(const fsk_matrix* m);
FSK_API fsk_status fsk_matrix_slice_rows(const fsk_matrix* m, size_t begin, size_t end, fsk_matrix** out);
FSK_API fsk_status fsk_matrix_load(const char* path, fsk_format format, fsk_matrix** out);
FSK_API fsk_status fsk_matrix_save(const fsk_matrix* m, const char* path, fsk_format format);

/* Chunked FSK1 reading. next() yields an empty (0-row) matrix when done. */
FSK_API fsk_status fsk_reader_open(const char* path, fsk_reader** out);
FSK_API void fsk_reader_free(fsk_reader* r);
FSK_API size_t fsk_reader_rows(const fsk_reader* r);
FSK_API size_t fsk_reader_cols(const fsk_reader* r);
FSK_API fsk_status fsk_reader_next(fsk_reader* r, size_t max_rows, fsk_matrix** out);
FSK_API fsk_status fsk_reader_rewind(fsk_reader* r);

/* ---- data generation and sketch metrics -------------------------------- */

FSK_API fsk_status fsk_synth_lowrank(size_t n, size_t d, size_t k, double gamma, uint64_t seed, fsk_matrix** out);
/* Gaussian clusters in a random latent subspace plus isotropic noise. */
FSK_API fsk_status fsk_synth_clusters(size_t n, size_t d, size_t clusters, size_t latent, double center_scale,
                                      double spread, double noise, uint64_t seed, fsk_matrix** out);

/* ||AᵀA - BᵀB||₂ / ||A||_F² */
FSK_API fsk_status fsk_relative_error(const fsk_matrix* a, const fsk_matrix* b, double* out);

/* Streaming accumulation of AᵀA and ||A||_F² for the same metric. */
FSK_API fsk_status fsk_gram_create(size_t d, fsk_gram** out);
FSK_API void fsk_gram_free(fsk_gram* g);
FSK_API fsk_status fsk_gram_add(fsk_gram* g, const fsk_matrix* rows);
FSK_API fsk_status fsk_gram_relative_error(const fsk_gram* g, const fsk_matrix* sketch, double* out);

/* ---- sketchers --------------------------------------------------------- */

/* m is ignored for FSK_METHOD_FD. */
FSK_API fsk_status fsk_sketcher_create(fsk_method method, size_t ell, size_t m, size_t d, uint64_t seed,
                                       fsk_sketcher** out);
FSK_API void fsk_sketcher_free(fsk_sketcher* s);
FSK_API fsk_method fsk_sketcher_method(const fsk_sketcher* s);
FSK_API fsk_status fsk_sketcher_insert(fsk_sketcher* s, const fsk_matrix* rows);
/* Flushes pending rows (FFD) and returns a copy of B. */
FSK_API fsk_status fsk_sketcher_finalize(fsk_sketcher* s, fsk_matrix** out);
/* SRHT compressions so far (0 for FD). */
FSK_API uint64_t fsk_sketcher_trials(const fsk_sketcher* s);
/* Peak transform workspace, in rows of width d (0 for FD). */
FSK_API size_t fsk_sketcher_workspace_rows(const fsk_sketcher* s);
FSK_API fsk_status fsk_sketcher_save(const fsk_sketcher* s, const char* path);
FSK_API fsk_status fsk_sketcher_load(const char* path, fsk_sketcher** out);

/* ---- online hashing ---------------------------------------------------- */

/* Zero sizes mean defaults: ell = 2*bits, m = next power of two >= 4d,
 * chunk_rows = m. */
typedef struct fsk_train_config {
  fsk_method sketcher;
  size_t bits;
  size_t ell;
  size_t m;
  size_t eta;
  size_t chunk_rows;
  uint64_t seed;
} fsk_train_config;

FSK_API void fsk_train_config_init(fsk_train_config* cfg);
/* Fills defaults for dimension d and validates. */
FSK_API fsk_status fsk_train_config_resolve(fsk_train_config* cfg, size_t d);

FSK_API fsk_status fsk_trainer_create(const fsk_train_config* cfg, size_t d, fsk_trainer** out);
FSK_API void fsk_trainer_free(fsk_trainer* t);
/* *emitted receives a new model when this chunk completes eta chunks, NULL
 * otherwise. emitted may itself be NULL to discard. */
FSK_API fsk_status fsk_trainer_feed(fsk_trainer* t, const fsk_matrix* chunk, fsk_model** emitted);
FSK_API fsk_status fsk_trainer_model(const fsk_trainer* t, fsk_model** out);

FSK_API fsk_status fsk_model_lsh(size_t d, size_t r, uint64_t seed, fsk_model** out);
FSK_API fsk_status fsk_model_from_sketch(const fsk_matrix* b, const double* mu, size_t r, fsk_model** out);
FSK_API void fsk_model_free(fsk_model* m);
FSK_API size_t fsk_model_d(const fsk_model* m);
FSK_API size_t fsk_model_r(const fsk_model* m);
/* Copy of w (d x r). */
FSK_API fsk_status fsk_model_w(const fsk_model* m, fsk_matrix** out);
/* d values. */
FSK_API const double* fsk_model_mu(const fsk_model* m);
FSK_API int fsk_model_equal(const fsk_model* a, const fsk_model* b);
FSK_API fsk_status fsk_model_save(const fsk_model* m, const char* path);
FSK_API fsk_status fsk_model_load(const char* path, fsk_model** out);

FSK_API fsk_status fsk_hash(const fsk_model* model, const fsk_matrix* rows, fsk_codes** out);
FSK_API void fsk_codes_free(fsk_codes* c);
FSK_API size_t fsk_codes_n(const fsk_codes* c);
FSK_API size_t fsk_codes_r(const fsk_codes* c);
FSK_API int fsk_codes_bit(const fsk_codes* c, size_t i, size_t k);
FSK_API fsk_status fsk_codes_save(const fsk_codes* c, const char* path);
FSK_API fsk_status fsk_codes_load(const char* path, fsk_codes** out);

/* ---- distributed training ---------------------------------------------- */

FSK_API uint64_t fsk_worker_seed(uint64_t seed, uint32_t worker_id);
/* cfg->seed is used as given; pass fsk_worker_seed(master, id) to match
 * fsk_train_distributed. */
FSK_API fsk_status fsk_worker_sketch(const fsk_matrix* part, const fsk_train_config* cfg, uint32_t worker_id,
                                     fsk_summary** out);
/* Summary of a live trainer (pending rows flushed on a copy). */
FSK_API fsk_status fsk_trainer_summary(const fsk_trainer* t, uint32_t worker_id, fsk_summary** out);
FSK_API void fsk_summary_free(fsk_summary* s);
FSK_API uint64_t fsk_summary_n(const fsk_summary* s);
FSK_API uint32_t fsk_summary_worker_id(const fsk_summary* s);
FSK_API size_t fsk_summary_ell(const fsk_summary* s);
FSK_API fsk_status fsk_summary_save(const fsk_summary* s, const char* path);
FSK_API fsk_status fsk_summary_load(const char* path, fsk_summary** out);

/* Merges in ascending worker_id order. phi_out receives a 1 x d matrix. */
FSK_API fsk_status fsk_merge(const fsk_summary* const* summaries, size_t count, size_t ell, fsk_matrix** b_out,
                             fsk_matrix** phi_out, uint64_t* tau_out);
FSK_API fsk_status fsk_train_distributed(const fsk_matrix* const* parts, size_t count, const fsk_train_config* cfg,
                                         int concurrent, fsk_model** out);

/* ---- retrieval evaluation ---------------------------------------------- */

/* Copies database and queries; truth is the top ceil(fraction*n) rows. */
FSK_API fsk_status fsk_task_create(const fsk_matrix* database, const fsk_matrix* queries, double fraction,
                                   fsk_task** out);
FSK_API void fsk_task_free(fsk_task* t);
FSK_API size_t fsk_task_truth_size(const fsk_task* t);
FSK_API size_t fsk_task_queries(const fsk_task* t);
FSK_API fsk_status fsk_task_map(const fsk_task* t, const fsk_model* model, double* out);
/* recall and precision receive ncuts values each. */
FSK_API fsk_status fsk_task_pr_curve(const fsk_task* t, const fsk_model* model, const size_t* cuts, size_t ncuts,
                                     double* recall, double* precision);

#ifdef __cplusplus
}
#endif

#endif /* FROSKETCH_FROSKETCH_H */
