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

#include "shadowmed/data_model.hpp"
#include "shadowmed/estimator.hpp"
#include "shadowmed/gamma_solver.hpp"
#include "shadowmed/inference.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shadowmed {

struct AnalysisSettings {
  BasisConfig mu_basis;  // u_1..u_{K+1}, also used for the omegas
  // Odds-function sieve over (x, a, m, y). Log-linear with pairwise products:
  // a cubic sieve here has as many terms as the conditioning basis, which
  // leaves the minimum-distance problem exactly identified and unstable.
  BasisConfig q_basis{BasisKind::Power, 1, true};
  BasisConfig p_basis;   // conditioning basis over (z, x_obs, a, m, y)
  GammaOptions gamma;
  double level = 0.95;
};

struct ProfileResult {
  TreatmentProfile profile;
  InferenceReport report;
};

struct EstimandResult {
  Estimand estimand;
  InferenceReport report;
};

struct AnalysisResult {
  std::string method;
  std::size_t n_used = 0;
  bool gamma_zero = true;
  GammaFitReport gamma_report;
  std::vector<ProfileResult> profiles;
  std::vector<EstimandResult> estimands;
  std::vector<std::string> warnings;

  const EstimandResult* find(const std::string& name) const;
  const ProfileResult* find(const TreatmentProfile& profile) const;
};

// Steps 2-4 plus inference for every profile the estimands touch, with a
// fixed odds model. The q/p bases are needed only when gamma is nonzero.
AnalysisResult analyze_with_gamma(const Dataset& dataset, const GammaModel& gamma,
                                  const std::vector<Estimand>& estimands,
                                  const AnalysisSettings& settings,
                                  const std::optional<std::pair<BasisSpec, BasisSpec>>& qp_bases = std::nullopt);

// The full shadow-variable estimator: fit gamma, then analyze.
AnalysisResult sri_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                            const AnalysisSettings& settings = {});

}  // namespace shadowmed
