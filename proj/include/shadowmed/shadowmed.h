/*
  Copyright 2026 The shadowmed Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

#ifndef SHADOWMED_H
#define SHADOWMED_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(SHADOWMED_BUILDING)
#    define SM_API __declspec(dllexport)
#  else
#    define SM_API __declspec(dllimport)
#  endif
#else
#  define SM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_ARGUMENT = 1, /* null pointer or bad index */
  SM_ERR_CONFIG = 2,
  SM_ERR_DATA = 3,
  SM_ERR_SOLVER = 4,
  SM_ERR_INTERNAL = 5
} sm_status;

typedef struct sm_dataset sm_dataset;

/* A named set of text artifacts (JSON or CSV documents). */
typedef struct sm_report sm_report;

SM_API const char* sm_version(void);

/* Message for the last failing call on this thread; empty if none. */
SM_API const char* sm_last_error(void);

SM_API sm_status sm_dataset_load(const char* csv_path, const char* descriptor_path, sm_dataset** out);
SM_API sm_status sm_dataset_from_text(const char* csv_text, const char* descriptor_json, sm_dataset** out);
SM_API sm_status sm_dataset_save(const sm_dataset* dataset, const char* csv_path, const char* descriptor_path);
SM_API size_t sm_dataset_rows(const sm_dataset* dataset);
SM_API void sm_dataset_free(sm_dataset* dataset);

/* Draws one sample from the simulation design in config_json (simulate.n,
   simulate.dgp, seed). Either output may be NULL. */
SM_API sm_status sm_generate(const char* config_json, sm_dataset** observed, sm_dataset** full);

/* Parses, fills defaults and checks a run config. Artifact: "config.json". */
SM_API sm_status sm_config_resolve(const char* config_json, sm_report** out);

/* Artifact: "validation.json". */
SM_API sm_status sm_validate(const sm_dataset* dataset, sm_report** out);

/* Artifacts: "report.json", "estimates.csv". */
SM_API sm_status sm_estimate(const sm_dataset* dataset, const char* config_json, sm_report** out);

/* Artifacts: "table.csv", "summary.json", "replicates.csv", "truth.json". */
SM_API sm_status sm_simulate(const char* config_json, sm_report** out);

/* Artifact: "truth.json". */
SM_API sm_status sm_truth(const char* config_json, sm_report** out);

SM_API size_t sm_report_count(const sm_report* report);
SM_API const char* sm_report_name(const sm_report* report, size_t index);
SM_API const char* sm_report_text(const sm_report* report, size_t index);
/* NULL when no artifact has that name. */
SM_API const char* sm_report_get(const sm_report* report, const char* name);
SM_API void sm_report_free(sm_report* report);

#ifdef __cplusplus
}
#endif

#endif /* SHADOWMED_H */
