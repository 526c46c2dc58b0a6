// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the metaloop meta-learning library.
 *
 * Every function that can fail returns an ml_status; on failure the message
 * is available from ml_last_error() on the calling thread until the next
 * call into the library from that thread. Handles are opaque, owned by the
 * caller, and released with the matching *_free function (NULL is ignored).
 * Returned strings stay valid for the lifetime of the handle they came from.
 */

#ifndef METALOOP_METALOOP_H
#define METALOOP_METALOOP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ML_API __declspec(dllexport)
#else
#define ML_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ml_status {
  ML_OK = 0,
  ML_ERR_INVALID_ARGUMENT = 1,
  ML_ERR_SHAPE = 2,
  ML_ERR_CONFIG = 3,
  ML_ERR_IO = 4,
  ML_ERR_DATA = 5,
  ML_ERR_NUMERIC = 6,
  ML_ERR_INTERNAL = 7
} ml_status;

typedef struct ml_config ml_config;
typedef struct ml_run ml_run;
typedef struct ml_paramset ml_paramset;
typedef struct ml_strings ml_strings;

/* Command-line style overrides applied while a config is validated. */
typedef struct ml_options {
  int has_seed;
  uint64_t seed;
  const char* output_dir; /* NULL keeps the config's output_dir */
  int skip_bad;
} ml_options;

ML_API const char* ml_version(void);
ML_API const char* ml_last_error(void);
ML_API const char* ml_status_name(ml_status status);

/* options may be NULL. */
ML_API ml_status ml_config_load(const char* path, const ml_options* options, ml_config** out);
ML_API ml_status ml_config_parse(const char* json_text, const char* base_dir, const ml_options* options,
                                 ml_config** out);
ML_API const char* ml_config_mode(const ml_config* config);
ML_API uint64_t ml_config_seed(const ml_config* config);
ML_API const char* ml_config_output_dir(const ml_config* config);
ML_API void ml_config_free(ml_config* config);

/* Verbs. Each checks that the config's mode belongs to the verb. */
ML_API ml_status ml_train(const ml_config* config, ml_run** out);
ML_API ml_status ml_adapt_sweep(const ml_config* config, ml_run** out);
ML_API ml_status ml_stock_train(const ml_config* config, ml_run** out);
ML_API ml_status ml_baseline(const ml_config* config, ml_run** out);
/* Summary lines: "cache <dir> built|reused", then "<symbol> <windows>". */
ML_API ml_status ml_stock_prep(const ml_config* config, ml_strings** summary);
/* runs: run directories, or run ids under runs_root. Out: written CSV paths. */
ML_API ml_status ml_report(const char* const* runs, size_t n_runs, const char* runs_root, const char* out_dir,
                           ml_strings** files);

ML_API const char* ml_run_id(const ml_run* run);
ML_API const char* ml_run_dir(const ml_run* run);
ML_API const char* ml_run_metrics_path(const ml_run* run);
ML_API const char* ml_run_status(const ml_run* run);
ML_API size_t ml_run_checkpoint_count(const ml_run* run);
ML_API const char* ml_run_checkpoint(const ml_run* run, size_t index);
ML_API void ml_run_free(ml_run* run);

ML_API size_t ml_strings_count(const ml_strings* strings);
ML_API const char* ml_strings_at(const ml_strings* strings, size_t index);
ML_API void ml_strings_free(ml_strings* strings);

/* Parameter checkpoints (MLPS1 files). */
ML_API ml_status ml_paramset_load(const char* path, ml_paramset** out);
ML_API size_t ml_paramset_size(const ml_paramset* params);
ML_API const char* ml_paramset_name(const ml_paramset* params, size_t index);
ML_API size_t ml_paramset_numel(const ml_paramset* params, size_t index);
/* Copies min(capacity, numel) values; ML_ERR_INVALID_ARGUMENT on a bad index. */
ML_API ml_status ml_paramset_values(const ml_paramset* params, size_t index, double* out, size_t capacity);
ML_API int ml_paramset_has_optimizer(const ml_paramset* params);
/* 1 when names, shapes and values are bit-identical. */
ML_API int ml_paramset_equal(const ml_paramset* a, const ml_paramset* b);
ML_API void ml_paramset_free(ml_paramset* params);

#ifdef __cplusplus
}
#endif

#endif /* METALOOP_METALOOP_H */
