// Copyright 2026 The NMN-CL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the neural module network library.
 *
 * Conventions:
 *  - Every function returns an nmn_status; NMN_OK is zero. On failure the
 *    thread-local message from nmn_last_error() describes the problem.
 *  - Objects are opaque handles released with their destroy function.
 *  - Text outputs use a caller buffer: pass buf/len with *len the buffer
 *    size. On success *len is the string length without the terminator. When
 *    the buffer is too small (or buf is NULL) the call returns
 *    NMN_ERR_INSUFFICIENT_BUFFER and sets *len to the required size
 *    including the terminator.
 */
#ifndef NMN_NMN_H_
#define NMN_NMN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NMN_EXPORT __declspec(dllexport)
#elif defined(NMN_BUILDING_LIBRARY)
#define NMN_EXPORT __attribute__((visibility("default")))
#else
#define NMN_EXPORT
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nmn_status {
  NMN_OK = 0,
  NMN_ERR_NULL_POINTER = 1,
  NMN_ERR_INVALID_ARGUMENT = 2,
  NMN_ERR_CONFIG = 3,
  NMN_ERR_DATA = 4,
  NMN_ERR_NUMERICAL = 5,
  NMN_ERR_PARSE = 6,
  NMN_ERR_TYPE = 7,
  NMN_ERR_IO = 8,
  NMN_ERR_INSUFFICIENT_BUFFER = 9,
  NMN_ERR_STATE = 10,
  NMN_ERR_UNKNOWN = 11
} nmn_status;

typedef struct nmn_dataset nmn_dataset_t;
typedef struct nmn_model nmn_model_t;
typedef struct nmn_run nmn_run_t;

/* Called after every executed iteration. eval_accuracy is NaN when the
 * iteration was not evaluated. */
typedef void (*nmn_progress_fn)(void *user, int iteration, const char *difficulty_key,
                                size_t presentations, size_t distinct, double train_loss,
                                double eval_accuracy);

NMN_EXPORT const char *nmn_version(void);
NMN_EXPORT const char *nmn_status_name(int status);
NMN_EXPORT const char *nmn_last_error(void);

/* Run configuration (JSON, see docs/config_schema.md). Writes the fully
 * resolved configuration with defaults filled in. */
NMN_EXPORT int nmn_config_resolve(const char *config_json, char *buf, size_t *len);

/* Datasets. nmn_dataset_generate uses the "generator" section; test selects
 * test_level_counts and test_seed instead of level_counts and seed. */
NMN_EXPORT int nmn_dataset_generate(const char *config_json, int test, nmn_dataset_t **out);
NMN_EXPORT int nmn_dataset_load(const char *path, nmn_dataset_t **out);
NMN_EXPORT int nmn_dataset_save(const nmn_dataset_t *dataset, const char *path);
NMN_EXPORT int nmn_dataset_size(const nmn_dataset_t *dataset, size_t *out);
/* JSON object with per-kind and per-level example counts. */
NMN_EXPORT int nmn_dataset_census(const nmn_dataset_t *dataset, char *buf, size_t *len);
NMN_EXPORT void nmn_dataset_destroy(nmn_dataset_t *dataset);

/* Parses and type checks a program; writes its canonical text. */
NMN_EXPORT int nmn_program_check(const char *text, char *buf, size_t *len);

/* Iteration plan of the "plan" section as JSON. full_pass_size is the pool
 * size charged for full-pass (epoch) iterations. */
NMN_EXPORT int nmn_plan_describe(const char *config_json, size_t full_pass_size, char *buf,
                                 size_t *len);

/* Models. Dimensions come from the dataset, seed and sharing overrides from
 * the "model" section. */
NMN_EXPORT int nmn_model_create(const nmn_dataset_t *like, const char *config_json,
                                nmn_model_t **out);
NMN_EXPORT int nmn_model_load(const char *path, nmn_model_t **out);
NMN_EXPORT int nmn_model_save(const nmn_model_t *model, const char *path);
NMN_EXPORT int nmn_model_dims(const nmn_model_t *model, size_t *features, size_t *objects,
                              size_t *answers);
NMN_EXPORT int nmn_model_num_scalars(const nmn_model_t *model, size_t *out);
NMN_EXPORT void nmn_model_destroy(nmn_model_t *model);

/* Trains model in place following the "plan" and "train" sections. eval
 * may be NULL. The returned run holds the metrics and the peak checkpoint. */
NMN_EXPORT int nmn_train(nmn_model_t *model, const nmn_dataset_t *train,
                         const nmn_dataset_t *eval, const char *config_json,
                         nmn_progress_fn progress, void *user, nmn_run_t **out);
NMN_EXPORT int nmn_run_metrics_csv(const nmn_run_t *run, char *buf, size_t *len);
NMN_EXPORT int nmn_run_summary_json(const nmn_run_t *run, char *buf, size_t *len);
NMN_EXPORT int nmn_run_best_model(const nmn_run_t *run, nmn_model_t **out);
NMN_EXPORT void nmn_run_destroy(nmn_run_t *run);

NMN_EXPORT int nmn_evaluate(const nmn_model_t *model, const nmn_dataset_t *dataset,
                            size_t threads, double *accuracy);

/* Trace of example index as JSON. program may be NULL to run the
 * example's own program; otherwise it replaces it (its text arguments must
 * have embeddings in the example). */
NMN_EXPORT int nmn_execute(const nmn_model_t *model, const nmn_dataset_t *dataset, size_t index,
                           const char *program, char *buf, size_t *len);

/* Finite-difference suite over all module kinds and the representative
 * programs. *passed is 1 when every case passed. */
NMN_EXPORT int nmn_gradcheck(const uint64_t *seeds, size_t num_seeds, int *passed, char *buf,
                             size_t *len);

#ifdef __cplusplus
}
#endif

#endif /* NMN_NMN_H_ */
