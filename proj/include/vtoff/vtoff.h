/*
 * Copyright 2026 The vtoff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef VTOFF_VTOFF_H_
#define VTOFF_VTOFF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(VTOFF_BUILDING_LIBRARY)
#define VTOFF_API __attribute__((visibility("default")))
#else
#define VTOFF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vtoff_status {
  VTOFF_OK = 0,
  VTOFF_E_UNSUPPORTED_FORMAT,
  VTOFF_E_CORRUPT_FILE,
  VTOFF_E_NOT_THREE_CHANNEL,
  VTOFF_E_IO,
  VTOFF_E_INVALID_PARAMS,
  VTOFF_E_DIMENSION_MISMATCH,
  VTOFF_E_TOO_SMALL,
  VTOFF_E_NON_POWER_OF_TWO,
  VTOFF_E_BAD_HEADER,
  VTOFF_E_OFFSET_OVERLAP,
  VTOFF_E_TRUNCATED_PAYLOAD,
  VTOFF_E_DTYPE_UNSUPPORTED,
  VTOFF_E_MISSING_TENSOR,
  VTOFF_E_SHAPE_MISMATCH,
  VTOFF_E_TOO_FEW_SAMPLES,
  VTOFF_E_EIG_FAILURE,
  VTOFF_E_NON_FINITE,
  VTOFF_E_MASK_SIZE_MISMATCH,
  VTOFF_E_EMPTY_DIRECTORY,
  VTOFF_E_UNPAIRED_FILES,
  VTOFF_E_MISSING_WEIGHTS,
  VTOFF_E_EXTRACTOR_MISMATCH,
  VTOFF_E_INTERNAL,
} vtoff_status;

typedef struct vtoff_config vtoff_config;
typedef struct vtoff_report vtoff_report;
typedef struct vtoff_image vtoff_image;
typedef struct vtoff_weights vtoff_weights;

VTOFF_API const char* vtoff_version(void);
VTOFF_API const char* vtoff_status_name(vtoff_status status);
/* Message of the last failure on the calling thread; "" if none. */
VTOFF_API const char* vtoff_last_error(void);
/* 0 success, 2 input error, 3 missing assets, 4 numerical failure. */
VTOFF_API int vtoff_exit_code(vtoff_status status);

/* json may be NULL for defaults. Keys: metrics, weights, threads, resolution,
   dists_resize, ssim_auto_downsample, cwssim_levels, pairs, native_features,
   near_duplicates, materialize_dir, out_json, out_csv. */
VTOFF_API vtoff_status vtoff_config_create(const char* json, vtoff_config** out);
VTOFF_API vtoff_status vtoff_config_merge(vtoff_config* cfg, const char* json);
VTOFF_API void vtoff_config_destroy(vtoff_config* cfg);

VTOFF_API vtoff_status vtoff_score(const vtoff_config* cfg, const char* pred_dir, const char* gt_dir,
                                   vtoff_report** out);
VTOFF_API vtoff_status vtoff_dist(const vtoff_config* cfg, const char* pred, const char* gt, vtoff_report** out);
/* spec_path may be NULL for the default six cases. */
VTOFF_API vtoff_status vtoff_distort(const vtoff_config* cfg, const char* manifest, const char* spec_path,
                                     vtoff_report** out);
/* mask_dir may be NULL. The report JSON text is the JSONL manifest. */
VTOFF_API vtoff_status vtoff_dataset_manifest(const vtoff_config* cfg, const char* person_dir,
                                              const char* garment_dir, const char* split, const char* mask_dir,
                                              vtoff_report** out);
VTOFF_API vtoff_status vtoff_dataset_dedup(const vtoff_config* cfg, const char* manifest, vtoff_report** out);
VTOFF_API vtoff_status vtoff_dataset_leak(const vtoff_config* cfg, const char* train_manifest,
                                          const char* test_manifest, vtoff_report** out);
VTOFF_API vtoff_status vtoff_bench(const vtoff_config* cfg, const char* fixture_dir, vtoff_report** out);

VTOFF_API const char* vtoff_report_json(const vtoff_report* r);
/* "" when the command has no table form. */
VTOFF_API const char* vtoff_report_csv(const vtoff_report* r);
VTOFF_API const char* vtoff_report_summary(const vtoff_report* r);
VTOFF_API const char* vtoff_report_config_hash(const vtoff_report* r);
/* Unit-scale aggregate of a metric ("ssim", "dists", "kid", ...) in score and dist reports. */
VTOFF_API vtoff_status vtoff_report_aggregate(const vtoff_report* r, const char* metric, double* out);
/* Counts for dedup/leak reports; unused outputs may be NULL. */
VTOFF_API vtoff_status vtoff_report_counts(const vtoff_report* r, size_t* duplicate_pairs, size_t* leaked_pairs,
                                           size_t* clean_train, size_t* clean_test);
/* Either path may be NULL. */
VTOFF_API vtoff_status vtoff_report_write(const vtoff_report* r, const char* json_path, const char* csv_path);
VTOFF_API void vtoff_report_destroy(vtoff_report* r);

VTOFF_API vtoff_status vtoff_image_load(const char* path, vtoff_image** out);
VTOFF_API vtoff_status vtoff_image_from_rgb(const uint8_t* rgb, int width, int height, vtoff_image** out);
VTOFF_API int vtoff_image_width(const vtoff_image* img);
VTOFF_API int vtoff_image_height(const vtoff_image* img);
VTOFF_API void vtoff_image_destroy(vtoff_image* img);

VTOFF_API vtoff_status vtoff_weights_load(const char* path, vtoff_weights** out);
VTOFF_API void vtoff_weights_destroy(vtoff_weights* w);
VTOFF_API vtoff_status vtoff_write_synthetic_weights(const char* path, uint64_t seed);

/* One per-pair metric at unit scale. weights may be NULL for the SSIM family. */
VTOFF_API vtoff_status vtoff_pair_metric(const char* metric, const vtoff_image* reference,
                                         const vtoff_image* candidate, const vtoff_weights* weights, double* out);

#ifdef __cplusplus
}
#endif

#endif  // VTOFF_VTOFF_H_
