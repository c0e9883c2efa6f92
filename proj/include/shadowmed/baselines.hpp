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
#include "shadowmed/data_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shadowmed {

enum class Method { Sri, Oracle, Cca, Mi };

const char* to_string(Method method);
Method parse_method(const std::string& text);

struct MiOptions {
  int m = 20;
  std::uint64_t seed = 0;
  // Multiplies the residual SD of the imputation draws; 0 gives mean imputation.
  double noise_scale = 1.0;
};

// Every record must carry x_miss; r is reset to 1 and gamma fixed at zero.
AnalysisResult oracle_estimate(const Dataset& full, const std::vector<Estimand>& estimands,
                               const AnalysisSettings& settings = {});

// Complete cases only, gamma fixed at zero.
AnalysisResult cca_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                            const AnalysisSettings& settings = {});

// Linear-Gaussian imputation of x_miss from (z, x_obs, a, M, y), m completed
// datasets analyzed with gamma = 0, pooled by Rubin's rules.
AnalysisResult mi_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                           const AnalysisSettings& settings = {}, const MiOptions& options = {});

// The m completed datasets mi_estimate analyzes.
std::vector<Dataset> mi_impute(const Dataset& dataset, const MiOptions& options);

}  // namespace shadowmed
