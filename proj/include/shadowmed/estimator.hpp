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
#include "shadowmed/gamma_solver.hpp"
#include "shadowmed/series_regression.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shadowmed {

// Inputs of mu_k: (x, M_1..M_{k-1}) for k = 1..K+1.
Eigen::VectorXd mu_point(const ObservedRecord& record, int k);
// Complete-case rows of mu_point, in dataset order.
Eigen::MatrixXd mu_inputs(const Dataset& dataset, int k);
// Bases u_1..u_{K+1}, standardized on the complete cases.
std::vector<BasisSpec> default_mu_bases(const Dataset& dataset, const BasisConfig& config = {});

// mu[k-1] holds mu_k for k = 1..K+1.
struct NuisanceFits {
  TreatmentProfile profile;
  GammaModel gamma;
  std::vector<SeriesRegressor> mu;
  std::vector<BasisSpec> mu_specs;
  // Normal-equation residual of each fit (same index as mu).
  std::vector<double> orthogonality;

  const SeriesRegressor& mu_k(int k) const { return mu.at(static_cast<std::size_t>(k - 1)); }
};

struct PsiEstimate {
  TreatmentProfile profile;
  double psi_hat = 0.0;
  // R_i (1 + gamma_i) mu_1(X_i); zero for r = 0.
  Eigen::VectorXd per_unit_plugin;
};

// Weights I(A = a_k) R (1 + gamma) over the complete cases, in dataset order.
Eigen::VectorXd arm_weights(const Dataset& dataset, const Eigen::VectorXd& gamma_values, int arm);

// Backward chain: mu_{K+1} regresses Y on u_{K+1}(X, M_1..M_K) with weights
// I(A = a_{K+1}) R (1 + gamma); then mu_k regresses mu_{k+1}(X, M_1..M_k) on
// u_k(X, M_1..M_{k-1}) with weights I(A = a_k) R (1 + gamma), k = K..1.
NuisanceFits fit_mu_chain(const Dataset& dataset, const GammaModel& gamma,
                          const TreatmentProfile& profile, const std::vector<BasisSpec>& mu_specs);

PsiEstimate estimate_psi(const Dataset& dataset, const NuisanceFits& fits);

// A named difference psi(plus) - psi(minus), or a single psi when minus is empty.
struct Estimand {
  std::string name;
  TreatmentProfile plus;
  std::optional<TreatmentProfile> minus;
};

Estimand nde_estimand(int k);
Estimand nie_estimand(int k, int j);
Estimand te_estimand(int k);
// psi(1,1,1) - psi(1,0,1); defined for K = 2.
Estimand pse_m2_estimand(int k);
Estimand psi_estimand(const TreatmentProfile& profile);
// "nde", "nie<j>" / "nie_<j>", "te", "pse_m2", or "all" (NDE, NIE_1..NIE_K, TE).
std::vector<Estimand> parse_estimands(const std::string& name, int k);

struct ContrastEstimate {
  double value = 0.0;
  PsiEstimate a;
  PsiEstimate b;
};

ContrastEstimate estimate_contrast(const Dataset& dataset, const GammaModel& gamma,
                                   const TreatmentProfile& a, const TreatmentProfile& b,
                                   const std::vector<BasisSpec>& mu_specs);

// psi-hat values cached per profile so every contrast comes from one shared set.
class PsiTable {
 public:
  PsiTable(const Dataset& dataset, GammaModel gamma, std::vector<BasisSpec> mu_specs);

  const PsiEstimate& psi(const TreatmentProfile& profile);
  const NuisanceFits& fits(const TreatmentProfile& profile);
  double contrast(const Estimand& estimand);

 private:
  struct Entry {
    NuisanceFits fits;
    PsiEstimate psi;
  };
  const Entry& entry(const TreatmentProfile& profile);

  const Dataset& dataset_;
  GammaModel gamma_;
  std::vector<BasisSpec> mu_specs_;
  std::map<TreatmentProfile, Entry> cache_;
};

}  // namespace shadowmed
