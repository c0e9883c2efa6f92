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

#pragma once

#include "shadowmed/analysis.hpp"
#include "shadowmed/baselines.hpp"
#include "shadowmed/simulation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shadowmed {

enum class Mode { Estimate, Simulate, Truth, Validate };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct SimulateSettings {
  int n = 1000;
  int reps = 100;
  std::vector<Method> methods{Method::Oracle, Method::Sri, Method::Mi, Method::Cca};
  DgpConfig dgp;
};

struct TruthSettings {
  std::size_t big_n = 1000000;
  std::uint64_t seed = 20240601;
};

// Everything a run needs, after defaults are filled in. The JSON form of a
// resolved config is what run_manifest.json stores.
struct RunConfig {
  Mode mode = Mode::Estimate;
  std::string data;
  std::string descriptor;
  Method method = Method::Sri;
  std::vector<std::string> estimands{"all"};
  std::optional<std::string> profile_a;
  std::optional<std::string> profile_b;
  AnalysisSettings analysis;
  MiOptions mi;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  SimulateSettings simulate;
  TruthSettings truth;
};

// Parses a (possibly partial) JSON config; absent keys keep their defaults.
// Unknown keys and out-of-range values raise ConfigError.
RunConfig parse_run_config(const std::string& json_text);

// Checks cross-field invariants: referenced files exist for estimate and
// validate, level in (0, 1), sizes positive, and the conditioning basis is
// at least as large as the odds-function basis. Throws ConfigError. With
// dataset_dims given (data already in memory) file checks are skipped and
// the basis sizes are checked against those dimensions.
void check_run_config(const RunConfig& config, const Dims* dataset_dims = nullptr);

// Fully populated JSON, stable key order.
std::string run_config_json(const RunConfig& config);

// Estimands named by the config for a dataset with K mediators. Explicit
// profiles take precedence over named estimands.
std::vector<Estimand> resolve_estimands(const RunConfig& config, int k);

// Per-method entry points used by the CLI and the C API.
AnalysisResult run_method(const RunConfig& config, const Dataset& dataset,
                          const std::vector<Estimand>& estimands);
McResult run_simulation(const RunConfig& config, const TruthTable& truth);
TruthTable run_truth(const RunConfig& config);

}  // namespace shadowmed
