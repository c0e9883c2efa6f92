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

#include "shadowmed/sieve_basis.hpp"

#include <Eigen/Dense>

#include <optional>

namespace shadowmed {

struct SolveDiagnostics {
  double ridge = 0.0;               // 0 when the unridged solve succeeded
  double condition_estimate = 1.0;  // of the weighted design (R factor)
  int effective_rank = 0;
};

// Result of a (weighted) least-squares solve on an explicit design matrix.
struct LeastSquaresFit {
  Eigen::VectorXd coef;
  SolveDiagnostics diagnostics;
};

// Minimizes sum_i w_i (v_i - B_i c)^2. Zero-weight rows are dropped. If the
// weighted design is numerically rank deficient a ridge eps*I is added to the
// normalized Gram matrix, eps escalating x10 from 1e-10 up to 1e-2.
LeastSquaresFit weighted_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& responses,
                                       const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// Solves a symmetric positive semidefinite system G c = b with the same ridge
// escalation policy (ridge relative to the mean diagonal of G).
LeastSquaresFit solve_psd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs);

class SeriesRegressor {
 public:
  SeriesRegressor() = default;
  SeriesRegressor(BasisSpec spec, Eigen::VectorXd coef, SolveDiagnostics diagnostics = {});

  const BasisSpec& spec() const { return spec_; }
  const Eigen::VectorXd& coef() const { return coef_; }
  const SolveDiagnostics& diagnostics() const { return diagnostics_; }

  double predict(const Eigen::VectorXd& point) const;
  Eigen::VectorXd predict_many(const Eigen::MatrixXd& points) const;

 private:
  BasisSpec spec_;
  Eigen::VectorXd coef_;
  SolveDiagnostics diagnostics_;
};

SeriesRegressor fit_series(const BasisSpec& spec, const Eigen::MatrixXd& inputs,
                           const Eigen::VectorXd& responses,
                           const std::optional<Eigen::VectorXd>& weights = std::nullopt);

double predict(const SeriesRegressor& reg, const Eigen::VectorXd& point);

// max_j |sum_i w_i (v_i - fitted_i) B_ij| / n: the residual of the normal equations.
double project_residual_orthogonality(const SeriesRegressor& reg, const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& responses,
                                      const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// The series estimator of E(V | W) evaluated at the sample points: the hat
// matrix H = P (P'P)^{-1} P' of a basis matrix P, stored as H = U U'.
class HatProjection {
 public:
  HatProjection() = default;
  explicit HatProjection(const Eigen::MatrixXd& basis_matrix);

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return u_ * (u_.transpose() * v); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const { return u_ * (u_.transpose() * m); }
  const Eigen::MatrixXd& factor() const { return u_; }
  Eigen::Index rows() const { return u_.rows(); }
  double ridge() const { return ridge_; }

 private:
  Eigen::MatrixXd u_;
  double ridge_ = 0.0;
};

}  // namespace shadowmed
