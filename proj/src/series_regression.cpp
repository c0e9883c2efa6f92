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

#include "shadowmed/series_regression.hpp"

#include "shadowmed/error.hpp"

#include <cmath>
#include <vector>

namespace shadowmed {

namespace {

constexpr double kRidgeStart = 1e-10;
constexpr double kRidgeMax = 1e-2;
// Above this the R factor of the weighted design counts as singular.
constexpr double kMaxCondition = 1e10;
constexpr double kMinRcond = 1e-13;

LeastSquaresFit ridge_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                            double base_condition, int rank) {
  const Eigen::Index p = gram.rows();
  const double scale = std::max(gram.diagonal().mean(), 1e-300);
  for (double eps = kRidgeStart; eps <= kRidgeMax * 1.0001; eps *= 10.0) {
    Eigen::MatrixXd g = gram / scale;
    g.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) continue;
    LeastSquaresFit fit;
    fit.coef = llt.solve(rhs / scale);
    if (!fit.coef.allFinite()) continue;
    fit.diagnostics.ridge = eps;
    fit.diagnostics.condition_estimate = base_condition;
    fit.diagnostics.effective_rank = rank;
    return fit;
  }
  throw Error(ErrorCode::UnsolvableSystem,
              "ridge escalation exceeded 1e-2 for a " + std::to_string(p) + "-column system");
}

}  // namespace

LeastSquaresFit weighted_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& responses,
                                       const std::optional<Eigen::VectorXd>& weights) {
  const Eigen::Index n = design.rows();
  if (responses.size() != n || (weights && weights->size() != n))
    throw Error(ErrorCode::LengthMismatch, "design, responses and weights differ in length");
  if (!design.allFinite() || !responses.allFinite() || (weights && !weights->allFinite()))
    throw Error(ErrorCode::NonFiniteInput, "least-squares input");

  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights ? (*weights)(i) : 1.0;
    if (w < 0.0) throw Error(ErrorCode::NonFiniteInput, "negative regression weight");
    if (w > 0.0) {
      rows.push_back(i);
      total += w;
    }
  }
  if (rows.empty() || !(total > 0.0)) throw Error(ErrorCode::AllZeroWeights, "no positive weights");

  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = design.cols();
  Eigen::MatrixXd wb(m, p);
  Eigen::VectorXd wv(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = rows[static_cast<std::size_t>(r)];
    const double sw = std::sqrt(weights ? (*weights)(i) : 1.0);
    wb.row(r) = sw * design.row(i);
    wv(r) = sw * responses(i);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wb);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const Eigen::Index kdiag = std::min(m, p);
  double condition = std::numeric_limits<double>::infinity();
  if (kdiag == p && diag(kdiag - 1) > 0.0) condition = diag(0) / diag(kdiag - 1);
  const int rank = static_cast<int>(qr.rank());

  if (m >= p && rank == p && condition < kMaxCondition) {
    LeastSquaresFit fit;
    fit.coef = qr.solve(wv);
    fit.diagnostics.condition_estimate = condition;
    fit.diagnostics.effective_rank = rank;
    return fit;
  }
  const Eigen::MatrixXd gram = wb.transpose() * wb / total;
  const Eigen::VectorXd rhs = wb.transpose() * wv / total;
  return ridge_solve(gram, rhs, condition, rank);
}

LeastSquaresFit solve_psd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs) {
  if (gram.rows() != gram.cols() || gram.rows() != rhs.size())
    throw Error(ErrorCode::LengthMismatch, "system shape");
  if (!gram.allFinite() || !rhs.allFinite()) throw Error(ErrorCode::NonFiniteInput, "system input");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && rcond > 1e-12) {
    LeastSquaresFit fit;
    fit.coef = ldlt.solve(rhs);
    fit.diagnostics.condition_estimate = 1.0 / rcond;
    fit.diagnostics.effective_rank = static_cast<int>(gram.rows());
    return fit;
  }
  return ridge_solve(gram, rhs, rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity(),
                     static_cast<int>(gram.rows()));
}

SeriesRegressor::SeriesRegressor(BasisSpec spec, Eigen::VectorXd coef, SolveDiagnostics diagnostics)
    : spec_(std::move(spec)), coef_(std::move(coef)), diagnostics_(diagnostics) {
  if (coef_.size() != spec_.output_dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient length differs from basis dimension");
}

double SeriesRegressor::predict(const Eigen::VectorXd& point) const {
  return coef_.dot(eval_basis(spec_, point));
}

Eigen::VectorXd SeriesRegressor::predict_many(const Eigen::MatrixXd& points) const {
  return design_matrix(spec_, points) * coef_;
}

SeriesRegressor fit_series(const BasisSpec& spec, const Eigen::MatrixXd& inputs,
                           const Eigen::VectorXd& responses,
                           const std::optional<Eigen::VectorXd>& weights) {
  if (inputs.rows() != responses.size())
    throw Error(ErrorCode::LengthMismatch, "inputs and responses differ in length");
  auto fit = weighted_least_squares(design_matrix(spec, inputs), responses, weights);
  return SeriesRegressor(spec, std::move(fit.coef), fit.diagnostics);
}

double predict(const SeriesRegressor& reg, const Eigen::VectorXd& point) { return reg.predict(point); }

double project_residual_orthogonality(const SeriesRegressor& reg, const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& responses,
                                      const std::optional<Eigen::VectorXd>& weights) {
  const Eigen::MatrixXd b = design_matrix(reg.spec(), inputs);
  Eigen::VectorXd resid = responses - b * reg.coef();
  if (weights) resid.array() *= weights->array();
  return (b.transpose() * resid).cwiseAbs().maxCoeff() / static_cast<double>(inputs.rows());
}

HatProjection::HatProjection(const Eigen::MatrixXd& basis_matrix) {
  const Eigen::Index n = basis_matrix.rows();
  const Eigen::Index l = basis_matrix.cols();
  if (!basis_matrix.allFinite()) throw Error(ErrorCode::NonFiniteInput, "projection basis");
  if (n >= l) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_matrix);
    const auto diag = qr.matrixR().diagonal().cwiseAbs();
    if (qr.rank() == l && diag(l - 1) > 0.0 && diag(0) / diag(l - 1) < kMaxCondition) {
      u_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, l);
      return;
    }
  }
  const Eigen::MatrixXd gram = basis_matrix.transpose() * basis_matrix / static_cast<double>(n);
  const double scale = std::max(gram.diagonal().mean(), 1e-300);
  for (double eps = kRidgeStart; eps <= kRidgeMax * 1.0001; eps *= 10.0) {
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += eps * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) continue;
    // H = P (P'P + n eps I)^{-1} P' = U U' with U = P L^{-T} / sqrt(n).
    Eigen::MatrixXd ut = llt.matrixL().solve(basis_matrix.transpose());
    u_ = ut.transpose() / std::sqrt(static_cast<double>(n));
    ridge_ = eps;
    return;
  }
  throw Error(ErrorCode::SingularProjection, "conditioning basis is singular beyond ridge 1e-2");
}

}  // namespace shadowmed
