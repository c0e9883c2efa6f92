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
#include "shadowmed/series_regression.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace shadowmed {

inline constexpr double kOmegaFloor = 1e-3;

// Density-ratio weights omega_1..omega_{K+1} for one profile, plus the
// cumulative products prod_{j<=k} omega_j projected back onto u_k.
struct OmegaFits {
  TreatmentProfile profile;
  std::vector<SeriesRegressor> omega;    // omega[k-1]; unused where identically_one
  std::vector<bool> identically_one;     // k >= 2 with a_k == a_{k-1}
  std::vector<SeriesRegressor> products; // products[k-1] over u_k
  std::vector<double> moment_residual;   // normal-equation residual before flooring
  int floor_events = 0;

  // omega_k at a mu_k input point, floored at kOmegaFloor.
  double omega_k(int k, const Eigen::VectorXd& point) const;
  double product_k(int k, const Eigen::VectorXd& point) const;
};

// Solves the moment restrictions
//   E[(1 + gamma)(I(A = a_1) omega_1(X) - 1) | R = 1, X] = 0,
//   E[(1 + gamma)(I(A = a_k) omega_k - I(A = a_{k-1})) | R = 1, X, M_1..M_{k-1}] = 0,
// with omega_k in span(u_k) and the conditional expectation projected on the
// same basis, which makes each a linear system in the coefficients.
OmegaFits fit_omegas(const Dataset& dataset, const GammaModel& gamma, const TreatmentProfile& profile,
                     const std::vector<BasisSpec>& specs);

// phi(x,a,m,y) = mu_1 + sum_k I(a = a_k) P_k (mu_{k+1} - mu_k) + I(a = a_{K+1}) P_{K+1} (y - mu_{K+1})
// with P_k the projected cumulative omega product.
double compute_phi(const ObservedRecord& record, const NuisanceFits& fits, const OmegaFits& omegas);

// phi on every record, zero where r = 0.
Eigen::VectorXd phi_values(const Dataset& dataset, const NuisanceFits& fits, const OmegaFits& omegas);

// Riesz representer over the linear span of the q-basis:
//   min_theta (1/2n) ||H D theta||^2 - (1/n) theta' D' phi,   D = diag(r) Q.
struct RepresenterFit {
  Eigen::VectorXd theta;
  double criterion = 0.0;
  Eigen::VectorXd projected;  // E-hat{R rho | Z, A, M, Y} at each record
  SolveDiagnostics diagnostics;
};

RepresenterFit fit_representer(const Dataset& dataset, const GammaModel& gamma,
                               const Eigen::VectorXd& phi, const BasisSpec& spec_q,
                               const BasisSpec& spec_p);

// The representer criterion at an arbitrary theta (shared with tests).
double representer_criterion(const Dataset& dataset, const Eigen::VectorXd& phi,
                             const BasisSpec& spec_q, const BasisSpec& spec_p,
                             const Eigen::VectorXd& theta);

// IF_i = R_i (1 + gamma_i) phi_i - psi - rho_proj_i (R_i gamma_i - 1 + R_i).
Eigen::VectorXd influence_values(const Dataset& dataset, const GammaModel& gamma,
                                 const Eigen::VectorXd& phi, const Eigen::VectorXd& rho_projected,
                                 double psi_hat);

struct InferenceReport {
  double estimate = 0.0;
  Eigen::VectorXd if_values;
  std::size_t n = 0;
  double sigma2 = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  double if_mean = 0.0;
  std::map<std::string, double> diagnostics;

  bool covers(double truth) const { return ci_lo <= truth && truth <= ci_hi; }
};

// sigma2 = mean(IF^2); CI = estimate -/+ z * sqrt(sigma2 / n).
InferenceReport variance_and_ci(const Eigen::VectorXd& if_values, double estimate, double level = 0.95);

// Unit-aligned influence vectors of two functionals; sigma2 = mean((IF_A - IF_B)^2).
InferenceReport contrast_variance(const Eigen::VectorXd& if_a, const Eigen::VectorXd& if_b,
                                  double contrast_hat, double level = 0.95);

}  // namespace shadowmed
