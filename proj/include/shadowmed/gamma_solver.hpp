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
#include "shadowmed/series_regression.hpp"
#include "shadowmed/sieve_basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace shadowmed {

// Smooth saturation of the linear index: identity on |eta| <= cap - 1, then
// approaches +/-cap exponentially with a continuous first derivative.
double soft_clamp(double eta, double cap);
double soft_clamp_derivative(double eta, double cap);

// The odds function f(R=0 | X,A,M,Y) / f(R=1 | X,A,M,Y) on an exp link:
// gamma(x,a,m,y) = exp(soft_clamp(q(x,a,m,y)' pi)).
class GammaModel {
 public:
  GammaModel() = default;
  GammaModel(BasisSpec spec_q, Eigen::VectorXd pi, double linear_cap);

  static GammaModel zero();
  // A known odds function of the q-layout point, for simulation checks with
  // the true nuisance. It has no coefficients and no q basis.
  static GammaModel fixed(std::function<double(const Eigen::VectorXd&)> odds);

  bool is_zero() const { return is_zero_; }
  const BasisSpec& spec_q() const { return spec_q_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  double linear_cap() const { return linear_cap_; }

  // Point in the q-basis layout (x_miss, x_obs, a, M_1..M_K, y).
  double eval(const Eigen::VectorXd& point) const;
  double eval(const ObservedRecord& record) const;
  // One value per record; r = 0 records get 0 since they only enter through R * gamma.
  Eigen::VectorXd values_on(const Dataset& dataset) const;

 private:
  BasisSpec spec_q_;
  Eigen::VectorXd pi_;
  double linear_cap_ = 10.0;
  bool is_zero_ = true;
  std::function<double(const Eigen::VectorXd&)> fixed_;
};

struct GammaOptions {
  int max_iter = 500;
  double grad_tol = 1e-5;
  double linear_cap = 10.0;
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct GammaFitReport {
  double q_n_value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = true;
  int best_start = 0;
  std::vector<double> start_q_n;  // criterion at each initial point
  double projection_ridge = 0.0;
  int clamp_events = 0;  // complete cases whose index sits in the saturated zone
  std::optional<double> weak_norm_sq_vs;
};

// Rows of the basis inputs.
// q: (x_miss, x_obs, a, M_1..M_K, y), complete cases only (r = 0 rows are zero).
// p: (z, x_obs, a, M_1..M_K, y), every record.
Eigen::VectorXd gamma_q_point(const ObservedRecord& record);
Eigen::VectorXd gamma_p_point(const ObservedRecord& record);
Eigen::MatrixXd gamma_q_inputs(const Dataset& dataset);
Eigen::MatrixXd gamma_p_inputs(const Dataset& dataset);

// Default q and p bases fitted to the sample (q over complete cases).
std::pair<BasisSpec, BasisSpec> default_gamma_bases(const Dataset& dataset,
                                                    const BasisConfig& q_config = {BasisKind::Power, 1, true},
                                                    const BasisConfig& p_config = {});

// The sample criterion Q_n(pi) = (1/n) || H (r gamma(pi) - (1 - r)) ||^2 with
// the analytic gradient (2/n) (H J)' H g, J = diag(r gamma clamp') Q.
class GammaCriterion {
 public:
  GammaCriterion(const Dataset& dataset, const BasisSpec& spec_q, const BasisSpec& spec_p,
                 double linear_cap);

  double value(const Eigen::VectorXd& pi) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& pi) const;
  // Projected moment vector H g(pi), length n.
  Eigen::VectorXd projected_moments(const Eigen::VectorXd& pi) const;
  // Jacobian of the projected moments, n x s.
  Eigen::MatrixXd projected_jacobian(const Eigen::VectorXd& pi) const;

  Eigen::VectorXd gamma_values(const Eigen::VectorXd& pi) const;
  int num_params() const { return static_cast<int>(q_.cols()); }
  Eigen::Index n() const { return r_.size(); }
  const HatProjection& projection() const { return hat_; }
  const Eigen::MatrixXd& q_matrix() const { return q_; }
  const Eigen::VectorXd& r() const { return r_; }
  double linear_cap() const { return cap_; }

 private:
  Eigen::MatrixXd q_;  // n x s, zero rows where r = 0
  Eigen::VectorXd r_;
  HatProjection hat_;
  double cap_;
};

double criterion_qn(const Eigen::VectorXd& pi, const Dataset& dataset, const BasisSpec& spec_q,
                    const BasisSpec& spec_p, double linear_cap = 10.0);

// Multi-start damped Gauss-Newton (Levenberg-Marquardt) minimization of Q_n.
// Returns the zero model immediately when nothing is missing.
std::pair<GammaModel, GammaFitReport> fit_gamma(const Dataset& dataset, const BasisSpec& spec_q,
                                                const BasisSpec& spec_p,
                                                const GammaOptions& options = {});

// (1/n) || H (r (g1 - g2)) ||^2 on the sample.
double weak_norm_sq(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2, const Dataset& dataset,
                    const BasisSpec& spec_p);

}  // namespace shadowmed
