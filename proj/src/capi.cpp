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

#include "shadowmed/shadowmed.h"

#include "shadowmed/error.hpp"
#include "shadowmed/io.hpp"
#include "shadowmed/report.hpp"
#include "shadowmed/run_config.hpp"

#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

struct sm_dataset {
  shadowmed::Dataset data;
};

struct sm_report {
  std::vector<std::pair<std::string, std::string>> artifacts;
};

namespace {

thread_local std::string last_error;

sm_status fail(sm_status status, const std::string& message) {
  last_error = message;
  return status;
}

sm_status status_of(shadowmed::ErrorCategory category) {
  switch (category) {
    case shadowmed::ErrorCategory::Config: return SM_ERR_CONFIG;
    case shadowmed::ErrorCategory::Data: return SM_ERR_DATA;
    case shadowmed::ErrorCategory::Solver: return SM_ERR_SOLVER;
  }
  return SM_ERR_INTERNAL;
}

// Runs body, mapping exceptions onto status codes.
template <typename F>
sm_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SM_OK;
  } catch (const shadowmed::Error& e) {
    return fail(status_of(e.category()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SM_ERR_INTERNAL, e.what());
  }
}

shadowmed::RunConfig resolved(const char* config_json, shadowmed::Mode mode) {
  shadowmed::RunConfig config = shadowmed::parse_run_config(config_json ? config_json : "");
  config.mode = mode;
  return config;
}

}  // namespace

extern "C" {

SM_API const char* sm_version(void) { return "0.1.0"; }

SM_API const char* sm_last_error(void) { return last_error.c_str(); }

SM_API sm_status sm_dataset_load(const char* csv_path, const char* descriptor_path, sm_dataset** out) {
  if (!csv_path || !descriptor_path || !out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sm_dataset{shadowmed::read_dataset(csv_path, descriptor_path)}; });
}

SM_API sm_status sm_dataset_from_text(const char* csv_text, const char* descriptor_json, sm_dataset** out) {
  if (!csv_text || !descriptor_json || !out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sm_dataset{shadowmed::read_dataset_csv_text(csv_text, descriptor_json)}; });
}

SM_API sm_status sm_dataset_save(const sm_dataset* dataset, const char* csv_path, const char* descriptor_path) {
  if (!dataset || !csv_path || !descriptor_path) return fail(SM_ERR_ARGUMENT, "null argument");
  return guarded([&] { shadowmed::write_dataset(dataset->data, csv_path, descriptor_path); });
}

SM_API size_t sm_dataset_rows(const sm_dataset* dataset) { return dataset ? dataset->data.size() : 0; }

SM_API void sm_dataset_free(sm_dataset* dataset) { delete dataset; }

SM_API sm_status sm_generate(const char* config_json, sm_dataset** observed, sm_dataset** full) {
  if (observed) *observed = nullptr;
  if (full) *full = nullptr;
  return guarded([&] {
    const shadowmed::RunConfig config = resolved(config_json, shadowmed::Mode::Simulate);
    shadowmed::DgpConfig dgp = config.simulate.dgp;
    dgp.n = config.simulate.n;
    dgp.seed = config.seed;
    if (dgp.n < 1) throw shadowmed::Error(shadowmed::ErrorCode::ConfigError, "simulate.n must be >= 1");
    shadowmed::SimulatedSample sample = shadowmed::generate(dgp);
    if (observed) *observed = new sm_dataset{std::move(sample.observed)};
    if (full) *full = new sm_dataset{std::move(sample.full)};
  });
}

SM_API sm_status sm_config_resolve(const char* config_json, sm_report** out) {
  if (!out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const shadowmed::RunConfig config = shadowmed::parse_run_config(config_json ? config_json : "");
    shadowmed::check_run_config(config);
    *out = new sm_report{{{"config.json", shadowmed::run_config_json(config)}}};
  });
}

SM_API sm_status sm_validate(const sm_dataset* dataset, sm_report** out) {
  if (!dataset || !out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sm_report{{{"validation.json", shadowmed::validation_json(shadowmed::validate(dataset->data))}}};
  });
}

SM_API sm_status sm_estimate(const sm_dataset* dataset, const char* config_json, sm_report** out) {
  if (!dataset || !out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const shadowmed::RunConfig config = resolved(config_json, shadowmed::Mode::Estimate);
    shadowmed::check_run_config(config, &dataset->data.dims());
    const auto estimands = shadowmed::resolve_estimands(config, dataset->data.k());
    const shadowmed::AnalysisResult result = shadowmed::run_method(config, dataset->data, estimands);
    *out = new sm_report{{{"report.json", shadowmed::analysis_json(result)},
                          {"estimates.csv", shadowmed::analysis_csv(result)}}};
  });
}

SM_API sm_status sm_simulate(const char* config_json, sm_report** out) {
  if (!out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const shadowmed::RunConfig config = resolved(config_json, shadowmed::Mode::Simulate);
    shadowmed::check_run_config(config);
    const shadowmed::TruthTable truth = shadowmed::run_truth(config);
    const shadowmed::McResult mc = shadowmed::run_simulation(config, truth);
    *out = new sm_report{{{"table.csv", shadowmed::mc_table_csv(mc)},
                          {"summary.json", shadowmed::mc_summary_json(mc)},
                          {"replicates.csv", shadowmed::mc_replicates_csv(mc)},
                          {"truth.json", shadowmed::truth_json(truth)}}};
  });
}

SM_API sm_status sm_truth(const char* config_json, sm_report** out) {
  if (!out) return fail(SM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const shadowmed::RunConfig config = resolved(config_json, shadowmed::Mode::Truth);
    shadowmed::check_run_config(config);
    *out = new sm_report{{{"truth.json", shadowmed::truth_json(shadowmed::run_truth(config))}}};
  });
}

SM_API size_t sm_report_count(const sm_report* report) { return report ? report->artifacts.size() : 0; }

SM_API const char* sm_report_name(const sm_report* report, size_t index) {
  if (!report || index >= report->artifacts.size()) return nullptr;
  return report->artifacts[index].first.c_str();
}

SM_API const char* sm_report_text(const sm_report* report, size_t index) {
  if (!report || index >= report->artifacts.size()) return nullptr;
  return report->artifacts[index].second.c_str();
}

SM_API const char* sm_report_get(const sm_report* report, const char* name) {
  if (!report || !name) return nullptr;
  for (const auto& [key, text] : report->artifacts)
    if (key == name) return text.c_str();
  return nullptr;
}

SM_API void sm_report_free(sm_report* report) { delete report; }

}  // extern "C"
