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
#include "shadowmed/data_model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace shadowmed {

// Structural coefficients of the two-mediator design. Defaults reproduce the
// reference simulation; every A-dependent term can be zeroed for null checks.
struct DgpConfig {
  double alpha = 0.6;  // corr(Phi^{-1}(X1), Phi^{-1}(Z))

  // A ~ Bernoulli(expit(a0 + a_x1 X1 + a_x2 X2 + a_x3 X3))
  double a0 = -0.1, a_x1 = 1.0, a_x2 = -1.0, a_x3 = 0.2;

  // M1 = m1_0 + m1_a A + m1_sin_x1 sin(X1) + m1_x1sq X1^2 + m1_x2 X2 + m1_x3 X3 + e3
  double m1_0 = -1.0, m1_a = 0.5, m1_sin_x1 = -2.0, m1_x1sq = 3.0, m1_x2 = -2.0, m1_x3 = 1.0;

  // M2 = m2_0 + m2_a A + m2_x1 X1 + m2_x2sq X2^2 + m2_x3 X3 + m2_am1 A M1 + e4
  double m2_0 = 1.0, m2_a = -0.5, m2_x1 = 1.0, m2_x2sq = 1.0, m2_x3 = -1.0, m2_am1 = -0.5;

  // Y = y0 + y_a A + y_m1 M1 + y_m2 M2 + y_x1 X1 + y_x1sq X1^2 + y_sin_x2 sin(X2)
  //     + y_x2sq X2^2 + y_x3 X3 + y_am1 A M1 + y_am2 A M2 + e5
  double y0 = -1.0, y_a = 0.5, y_m1 = -1.5, y_m2 = 1.5, y_x1 = 3.0, y_x1sq = 3.0, y_sin_x2 = -3.0,
         y_x2sq = 1.0, y_x3 = -1.0, y_am1 = 0.5, y_am2 = 0.5;

  // R ~ Bernoulli(expit(r0 + r_x1 X1 + r_x2 X2 + r_x3 X3 + r_ae3 A e3 + r_ae4 A e4 + r_e5 e5))
  double r0 = 0.1, r_x1 = -2.0, r_x2 = 1.5, r_x3 = 1.0, r_ae3 = 0.5, r_ae4 = -0.5, r_e5 = -0.1;

  int n = 1000;
  std::uint64_t seed = 1;

  // Zeroes every coefficient through which A acts on M1, M2 or Y.
  DgpConfig without_treatment_effects() const;
};

struct SimulatedSample {
  Dataset full;      // true X for every unit, r = 1 throughout
  Dataset observed;  // X1 masked where R = 0
  std::vector<int> r;
};

// Layout: z = [Z], x_miss = [X1], x_obs = [X2, X3], m = [[M1], [M2]].
SimulatedSample generate(const DgpConfig& config);

// The true odds f(R=0 | X,A,M,Y) / f(R=1 | X,A,M,Y) at a record carrying X.
double true_odds(const DgpConfig& config, const ObservedRecord& record);
// The same odds as a GammaModel over the q layout (x1, x2, x3, a, m1, m2, y).
GammaModel true_gamma_model(const DgpConfig& config);

struct TruthTable {
  std::map<TreatmentProfile, double> psi;
  std::map<TreatmentProfile, double> psi_mcse;
  std::map<std::string, double> effects;  // NDE, NIE1, NIE2, TE
  std::map<std::string, double> effects_mcse;
  double te_direct = 0.0;  // psi(1,1,1) - psi(0,0,0) from its own draws
  double te_direct_mcse = 0.0;
  std::size_t draws = 0;
};

// Structural Monte Carlo over all 2^3 profiles with shared draws per unit.
TruthTable true_effects(const DgpConfig& config, std::size_t big_n, std::uint64_t seed = 20240601);

struct McOptions {
  int reps = 100;
  int n = 1000;
  std::vector<Method> methods{Method::Oracle, Method::Sri, Method::Mi, Method::Cca};
  std::uint64_t master_seed = 1;
  int threads = 1;
  AnalysisSettings settings;
  MiOptions mi;
};

struct McCell {
  double bias = 0.0;
  double se = 0.0;  // empirical SD of the estimates
  double cp = 0.0;
  double mean_estimate = 0.0;
  double mean_se_hat = 0.0;
  double mcse_bias = 0.0;
  double mcse_cp = 0.0;
  int n_ok = 0;
  bool se_defined = false;
};

struct McReplicate {
  int rep = 0;
  std::string method;
  std::string estimand;
  double estimate = 0.0;
  double se_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ok = false;
  std::string failure;
};

struct McResult {
  int reps = 0;
  int n = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::string> methods;
  std::vector<std::string> estimands;
  std::map<std::string, double> truth;
  std::map<std::string, std::map<std::string, McCell>> cells;  // method -> estimand -> cell
  std::map<std::string, int> failures;                          // method -> failed replications
  std::vector<McReplicate> replicates;
};

// Estimands are NDE, NIE1, NIE2, TE; truth maps those names to true values.
McResult run_monte_carlo(const DgpConfig& config, const McOptions& options,
                         const std::map<std::string, double>& truth);

std::string mc_table_csv(const McResult& result);
std::string mc_replicates_csv(const McResult& result);

}  // namespace shadowmed
