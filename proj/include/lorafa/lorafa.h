/* SPDX-License-Identifier: Apache-2.0
 * Copyright 2026 The lorafa Authors
 *
 * C interface to the lorafa engine. Every object is an opaque handle owned
 * by the caller and released with its matching *_destroy function. Every
 * call returns an lfa_status; on failure lfa_last_error() describes it
 * (per thread, valid until the next failing call on that thread).
 * JSON inputs and outputs are UTF-8 text.
 */
#ifndef LORAFA_LORAFA_H
#define LORAFA_LORAFA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LFA_API __declspec(dllexport)
#else
#define LFA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lfa_status {
  LFA_OK = 0,
  LFA_ERR_INTERNAL = 1,
  LFA_ERR_CONFIG = 2,
  LFA_ERR_DIVERGENCE = 3,
  LFA_ERR_RECONCILIATION = 4,
  LFA_ERR_CHECK_FAILED = 5, /* a verification ran and did not pass */
  LFA_ERR_DIMENSION = 6,
  LFA_ERR_PARAMETER = 7,
  LFA_ERR_RETENTION = 8,
  LFA_ERR_MODE = 9,
  LFA_ERR_DATA = 10,
  LFA_ERR_STATE = 11,
  LFA_ERR_IO = 12,
  LFA_ERR_INVALID_ARGUMENT = 13 /* null handle or pointer */
} lfa_status;

typedef struct lfa_config lfa_config;
typedef struct lfa_report lfa_report;
typedef struct lfa_model lfa_model;
typedef struct lfa_buffer lfa_buffer;

LFA_API const char* lfa_version(void);
LFA_API const char* lfa_status_name(lfa_status status);
LFA_API const char* lfa_last_error(void);

/* Byte buffers returned by the library (JSON, CSV). */
LFA_API const char* lfa_buffer_data(const lfa_buffer* buf);
LFA_API size_t lfa_buffer_size(const lfa_buffer* buf);
LFA_API void lfa_buffer_destroy(lfa_buffer* buf);

/* Run configuration. `lfa_config_set` takes a JSON fragment that is overlaid
 * on the current values, e.g. {"rank": 4, "optimizer": {"lr": 0.01}}. */
LFA_API lfa_status lfa_config_create(lfa_config** out);
LFA_API lfa_status lfa_config_from_json(const char* json, lfa_config** out);
LFA_API lfa_status lfa_config_set(lfa_config* cfg, const char* json_fragment);
LFA_API lfa_status lfa_config_validate(const lfa_config* cfg);
LFA_API lfa_status lfa_config_to_json(const lfa_config* cfg, lfa_buffer** out);
LFA_API void lfa_config_destroy(lfa_config* cfg);

/* Training. A run that diverges still produces a report and returns
 * LFA_ERR_DIVERGENCE. */
LFA_API lfa_status lfa_train(const lfa_config* cfg, lfa_report** out);
LFA_API lfa_status lfa_report_to_json(const lfa_report* rep, lfa_buffer** out);
LFA_API lfa_status lfa_report_from_json(const char* json, lfa_report** out);
LFA_API lfa_status lfa_report_final_loss(const lfa_report* rep, double* out);
LFA_API lfa_status lfa_report_step_count(const lfa_report* rep, size_t* out);
LFA_API void lfa_report_destroy(lfa_report* rep);

/* Grid over ranks x learning rates; either output may be NULL. */
LFA_API lfa_status lfa_sweep(const lfa_config* cfg, const size_t* ranks, size_t n_ranks,
                             const double* lrs, size_t n_lrs, lfa_buffer** grid_json,
                             lfa_buffer** grid_csv);

/* Memory report for the config's model geometry and rank. `probe_mode` is
 * NULL or a mode name ("ft", "lora", "lora-fa") to measure one forward. */
LFA_API lfa_status lfa_memreport(const lfa_config* cfg, int weight_bits, size_t num_shards,
                                 int full_recompute, const char* probe_mode, lfa_buffer** out);

/* Verification suites. Both write a JSON verdict and return
 * LFA_ERR_CHECK_FAILED when any check fails. */
LFA_API lfa_status lfa_equiv(uint64_t seed, size_t num_samples, lfa_buffer** out);
LFA_API lfa_status lfa_gradcheck(const char* mode, size_t rank, uint64_t seed, lfa_buffer** out);

/* Models. */
LFA_API lfa_status lfa_model_create(const lfa_config* cfg, lfa_model** out);
LFA_API lfa_status lfa_model_load(const char* path, lfa_model** out);
LFA_API lfa_status lfa_model_save(const lfa_model* model, const char* path);
/* Loss on `batch` examples of the config's task (seeded by `seed`). */
LFA_API lfa_status lfa_model_loss(const lfa_model* model, const lfa_config* cfg, uint64_t seed,
                                  double* out);
LFA_API lfa_status lfa_model_trainable_count(const lfa_model* model, size_t* linear_only,
                                             size_t* full);
/* Folds adapters into the base weights; the result is a frozen model. */
LFA_API lfa_status lfa_model_merge(const lfa_model* model, lfa_model** out);
LFA_API void lfa_model_destroy(lfa_model* model);

#ifdef __cplusplus
}
#endif

#endif /* LORAFA_LORAFA_H */
