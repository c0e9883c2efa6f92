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
#include "shadowmed/simulation.hpp"

#include <string>

namespace shadowmed {

// Each InferenceReport becomes {psi_hat, sigma2, se, ci_lo, ci_hi, level,
// n, diagnostics}; the result adds per-profile entries, odds-model fit
// details and warnings.
std::string analysis_json(const AnalysisResult& result);
// estimand,plus,minus,estimate,se,ci_lo,ci_hi
std::string analysis_csv(const AnalysisResult& result);

std::string validation_json(const ValidationReport& report);
std::string truth_json(const TruthTable& truth);
// Table cells with Monte-Carlo standard errors, failure counts and the truth used.
std::string mc_summary_json(const McResult& result);

}  // namespace shadowmed
