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

#include "shadowmed/gamma_solver.hpp"

#include "shadowmed/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace shadowmed {

namespace {

constexpr double kClampBand = 1.0;

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows, Eigen::Index width) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

}  // namespace

double soft_clamp(double eta, double cap) {
  const double knee = cap - kClampBand;
  const double mag = std::abs(eta);
  if (mag <= knee) return eta;
  const double t = mag - knee;
  return std::copysign(knee + kClampBand * (1.0 - std::exp(-t / kClampBand)), eta);
}

double soft_clamp_derivative(double eta, double cap) {
  const double knee = cap - kClampBand;
  const double mag = std::abs(eta);
  if (mag <= knee) return 1.0;
  return std::exp(-(mag - knee) / kClampBand);
}

GammaModel::GammaModel(BasisSpec spec_q, Eigen::VectorXd pi, double linear_cap)
    : spec_q_(std::move(spec_q)), pi_(std::move(pi)), linear_cap_(linear_cap), is_zero_(false) {
  if (pi_.size() != spec_q_.output_dim())
    throw Error(ErrorCode::DimensionMismatch, "gamma coefficients differ from q-basis dimension");
  if (!(linear_cap_ > kClampBand)) throw Error(ErrorCode::ConfigError, "gamma.linear_cap must exceed 1");
}

GammaModel GammaModel::zero() { return GammaModel(); }

GammaModel GammaModel::fixed(std::function<double(const Eigen::VectorXd&)> odds) {
  if (!odds) throw Error(ErrorCode::ConfigError, "fixed odds function is empty");
  GammaModel model;
  model.is_zero_ = false;
  model.fixed_ = std::move(odds);
  return model;
}

double GammaModel::eval(const Eigen::VectorXd& point) const {
  if (is_zero_) return 0.0;
  if (fixed_) return fixed_(point);
  return std::exp(soft_clamp(eval_basis(spec_q_, point).dot(pi_), linear_cap_));
}

double GammaModel::eval(const ObservedRecord& record) const {
  if (is_zero_) return 0.0;
  return eval(gamma_q_point(record));
}

Eigen::VectorXd GammaModel::values_on(const Dataset& dataset) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dataset.size()));
  if (is_zero_) return out;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].r == 1) out(static_cast<Eigen::Index>(i)) = eval(dataset[i]);
  return out;
}

Eigen::VectorXd gamma_q_point(const ObservedRecord& record) {
  const Eigen::VectorXd x = covariate_vector(record);
  const Eigen::VectorXd m = mediator_prefix(record, static_cast<int>(record.m.size()));
  Eigen::VectorXd out(x.size() + 1 + m.size() + 1);
  out << x, static_cast<double>(record.a), m, record.y;
  return out;
}

Eigen::VectorXd gamma_p_point(const ObservedRecord& record) {
  const Eigen::VectorXd m = mediator_prefix(record, static_cast<int>(record.m.size()));
  Eigen::VectorXd out(record.z.size() + record.x_obs.size() + 1 + m.size() + 1);
  out << record.z, record.x_obs, static_cast<double>(record.a), m, record.y;
  return out;
}

Eigen::MatrixXd gamma_q_inputs(const Dataset& dataset) {
  const Dims& d = dataset.dims();
  const Eigen::Index width = d.x() + 1 + d.mediators_through(d.k()) + 1;
  std::vector<Eigen::VectorXd> rows;
  for (const auto& rec : dataset.records())
    if (rec.r == 1) rows.push_back(gamma_q_point(rec));
  return stack_rows(rows, width);
}

Eigen::MatrixXd gamma_p_inputs(const Dataset& dataset) {
  const Dims& d = dataset.dims();
  const Eigen::Index width = d.z + d.x_obs + 1 + d.mediators_through(d.k()) + 1;
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(dataset.size());
  for (const auto& rec : dataset.records()) rows.push_back(gamma_p_point(rec));
  return stack_rows(rows, width);
}

std::pair<BasisSpec, BasisSpec> default_gamma_bases(const Dataset& dataset,
                                                    const BasisConfig& q_config,
                                                    const BasisConfig& p_config) {
  const Eigen::MatrixXd q_in = gamma_q_inputs(dataset);
  if (q_in.rows() < 2)
    throw Error(ErrorCode::InsufficientCompleteCases, "q-basis needs at least two complete cases");
  return {make_basis(q_config, q_in), make_basis(p_config, gamma_p_inputs(dataset))};
}

GammaCriterion::GammaCriterion(const Dataset& dataset, const BasisSpec& spec_q,
                               const BasisSpec& spec_p, double linear_cap)
    : cap_(linear_cap) {
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  r_.resize(n);
  q_ = Eigen::MatrixXd::Zero(n, spec_q.output_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = dataset[static_cast<std::size_t>(i)];
    r_(i) = rec.r;
    if (rec.r == 1) q_.row(i) = eval_basis(spec_q, gamma_q_point(rec)).transpose();
  }
  hat_ = HatProjection(design_matrix(spec_p, gamma_p_inputs(dataset)));
}

Eigen::VectorXd GammaCriterion::gamma_values(const Eigen::VectorXd& pi) const {
  const Eigen::VectorXd eta = q_ * pi;
  Eigen::VectorXd g(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    g(i) = r_(i) > 0.0 ? std::exp(soft_clamp(eta(i), cap_)) : 0.0;
  return g;
}

Eigen::VectorXd GammaCriterion::projected_moments(const Eigen::VectorXd& pi) const {
  // r * gamma - 1 + r; gamma_values is already zero where r = 0.
  const Eigen::VectorXd moment = gamma_values(pi).array() - 1.0 + r_.array();
  return hat_.apply(moment);
}

double GammaCriterion::value(const Eigen::VectorXd& pi) const {
  return projected_moments(pi).squaredNorm() / static_cast<double>(n());
}

Eigen::MatrixXd GammaCriterion::projected_jacobian(const Eigen::VectorXd& pi) const {
  const Eigen::VectorXd eta = q_ * pi;
  Eigen::VectorXd scale(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    scale(i) = r_(i) > 0.0
                   ? std::exp(soft_clamp(eta(i), cap_)) * soft_clamp_derivative(eta(i), cap_)
                   : 0.0;
  const Eigen::MatrixXd j = scale.asDiagonal() * q_;
  return hat_.apply(j);
}

Eigen::VectorXd GammaCriterion::gradient(const Eigen::VectorXd& pi) const {
  return 2.0 / static_cast<double>(n()) * projected_jacobian(pi).transpose() * projected_moments(pi);
}

double criterion_qn(const Eigen::VectorXd& pi, const Dataset& dataset, const BasisSpec& spec_q,
                    const BasisSpec& spec_p, double linear_cap) {
  return GammaCriterion(dataset, spec_q, spec_p, linear_cap).value(pi);
}

namespace {

struct LocalFit {
  Eigen::VectorXd pi;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

LocalFit levenberg_marquardt(const GammaCriterion& crit, Eigen::VectorXd pi,
                             const GammaOptions& options) {
  const double n = static_cast<double>(crit.n());
  Eigen::VectorXd res = crit.projected_moments(pi);
  double f = res.squaredNorm() / n;
  double lambda = 1e-3;
  LocalFit out;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const Eigen::MatrixXd jac = crit.projected_jacobian(pi);
    const Eigen::VectorXd jtr = jac.transpose() * res;
    const double gnorm = 2.0 / n * jtr.norm();
    out.grad_norm = gnorm;
    if (gnorm <= options.grad_tol) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * std::max(1.0, jtj.diagonal().maxCoeff()));
    bool stepped = false;
    while (lambda < 1e14) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      const Eigen::VectorXd step = ldlt.solve(-jtr);
      if (ldlt.info() == Eigen::Success && step.allFinite()) {
        const Eigen::VectorXd trial = pi + step;
        const Eigen::VectorXd trial_res = crit.projected_moments(trial);
        const double trial_f = trial_res.squaredNorm() / n;
        if (std::isfinite(trial_f) && trial_f < f) {
          pi = trial;
          res = trial_res;
          f = trial_f;
          lambda = std::max(lambda / 5.0, 1e-12);
          stepped = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!stepped) break;  // no descent direction left at machine precision
  }
  if (!out.converged) {
    out.grad_norm = crit.gradient(pi).norm();
    out.converged = out.grad_norm <= options.grad_tol;
  }
  out.pi = std::move(pi);
  out.value = f;
  out.iterations = iter;
  return out;
}

// Logistic regression of 1 - R on the q-basis with the missing block held at
// its centre, so every term involving x_miss vanishes and all rows are usable.
Eigen::VectorXd logistic_warm_start(const Dataset& dataset, const BasisSpec& spec_q,
                                    double linear_cap) {
  const Dims& d = dataset.dims();
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::VectorXd centre = spec_q.standardizer().center.head(d.x_miss);
  Eigen::MatrixXd design(n, spec_q.output_dim());
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = dataset[static_cast<std::size_t>(i)];
    ObservedRecord filled = rec;
    filled.r = 1;
    filled.x_miss = centre;
    design.row(i) = eval_basis(spec_q, gamma_q_point(filled)).transpose();
    target(i) = 1.0 - rec.r;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
  for (int iter = 0; iter < 30; ++iter) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::clamp(eta(i), -linear_cap, linear_cap);
      const double p = 1.0 / (1.0 + std::exp(-e));
      const double v = std::max(p * (1.0 - p), 1e-10);
      w(i) = v;
      z(i) = e + (target(i) - p) / v;
    }
    Eigen::VectorXd next;
    try {
      next = weighted_least_squares(design, z, w).coef;
    } catch (const Error&) {
      break;
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < 1e-8) break;
  }
  return beta;
}

bool better(const LocalFit& a, const LocalFit& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.grad_norm < b.grad_norm;
}

}  // namespace

std::pair<GammaModel, GammaFitReport> fit_gamma(const Dataset& dataset, const BasisSpec& spec_q,
                                                const BasisSpec& spec_p,
                                                const GammaOptions& options) {
  if (options.max_iter < 1 || !(options.grad_tol > 0.0) || options.restarts < 1)
    throw Error(ErrorCode::ConfigError, "gamma options: max_iter, grad_tol, restarts must be positive");
  const std::size_t n_complete = dataset.complete_count();
  GammaFitReport report;
  if (n_complete == dataset.size()) return {GammaModel::zero(), report};
  if (n_complete == 0) throw Error(ErrorCode::DegenerateTarget, "every record has r = 0");
  if (spec_p.output_dim() < spec_q.output_dim())
    throw Error(ErrorCode::ConfigError, "conditioning basis must be at least as large as the gamma basis");

  const GammaCriterion crit(dataset, spec_q, spec_p, options.linear_cap);
  report.projection_ridge = crit.projection().ridge();
  const int s = crit.num_params();

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(s));
  if (options.restarts >= 2 && spec_q.include_intercept()) {
    // Constant odds matching the observed missing fraction.
    Eigen::VectorXd mcar = Eigen::VectorXd::Zero(s);
    const double n0 = static_cast<double>(dataset.size() - n_complete);
    mcar(0) = std::log(n0 / static_cast<double>(n_complete));
    starts.push_back(mcar);
  }
  Eigen::VectorXd logistic;
  if (options.restarts >= 3) {
    logistic = logistic_warm_start(dataset, spec_q, options.linear_cap);
    starts.push_back(logistic);
  }
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> jitter(0.0, 0.1);
  while (static_cast<int>(starts.size()) < options.restarts) {
    Eigen::VectorXd start = logistic.size() ? logistic : Eigen::VectorXd(Eigen::VectorXd::Zero(s));
    for (Eigen::Index j = 0; j < s; ++j) start(j) += jitter(rng);
    starts.push_back(start);
  }

  LocalFit best;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    report.start_q_n.push_back(crit.value(starts[k]));
    LocalFit local = levenberg_marquardt(crit, starts[k], options);
    if (k == 0 || better(local, best)) {
      best = std::move(local);
      report.best_start = static_cast<int>(k);
    }
  }
  report.q_n_value = best.value;
  report.grad_norm = best.grad_norm;
  report.iterations = best.iterations;
  report.converged = best.converged;
  const Eigen::VectorXd eta = crit.q_matrix() * best.pi;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (crit.r()(i) > 0.0 && std::abs(eta(i)) > options.linear_cap - kClampBand) report.clamp_events++;
  return {GammaModel(spec_q, best.pi, options.linear_cap), report};
}

double weak_norm_sq(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2, const Dataset& dataset,
                    const BasisSpec& spec_p) {
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  if (g1.size() != n || g2.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "weak norm inputs must have one value per record");
  Eigen::VectorXd diff(n);
  for (Eigen::Index i = 0; i < n; ++i)
    diff(i) = dataset[static_cast<std::size_t>(i)].r == 1 ? g1(i) - g2(i) : 0.0;
  const HatProjection hat(design_matrix(spec_p, gamma_p_inputs(dataset)));
  return hat.apply(diff).squaredNorm() / static_cast<double>(n);
}

}  // namespace shadowmed
