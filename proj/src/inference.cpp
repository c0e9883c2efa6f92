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

#include "shadowmed/inference.hpp"

#include "shadowmed/error.hpp"
#include "shadowmed/stats.hpp"

#include <algorithm>
#include <cmath>

namespace shadowmed {

namespace {

Eigen::VectorXd complete_gamma(const Dataset& dataset, const Eigen::VectorXd& gamma_values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dataset.complete_count()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].r == 1) out(row++) = gamma_values(static_cast<Eigen::Index>(i));
  return out;
}

Eigen::VectorXd complete_indicator(const Dataset& dataset, int arm) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dataset.complete_count()));
  Eigen::Index row = 0;
  for (const auto& rec : dataset.records())
    if (rec.r == 1) out(row++) = rec.a == arm ? 1.0 : 0.0;
  return out;
}

}  // namespace

double OmegaFits::omega_k(int k, const Eigen::VectorXd& point) const {
  const auto idx = static_cast<std::size_t>(k - 1);
  if (identically_one.at(idx)) return 1.0;
  return std::max(omega.at(idx).predict(point), kOmegaFloor);
}

double OmegaFits::product_k(int k, const Eigen::VectorXd& point) const {
  return products.at(static_cast<std::size_t>(k - 1)).predict(point);
}

OmegaFits fit_omegas(const Dataset& dataset, const GammaModel& gamma, const TreatmentProfile& profile,
                     const std::vector<BasisSpec>& specs) {
  const int K = dataset.k();
  if (profile.k() != K) throw Error(ErrorCode::ConfigError, "profile length does not match K+1");
  if (static_cast<int>(specs.size()) != K + 1) throw Error(ErrorCode::ConfigError, "need K+1 bases");

  const double n = static_cast<double>(dataset.size());
  const Eigen::VectorXd g1 = complete_gamma(dataset, gamma.values_on(dataset)).array() + 1.0;
  const Eigen::Index nc = g1.size();

  OmegaFits out;
  out.profile = profile;
  out.omega.resize(static_cast<std::size_t>(K + 1));
  out.products.resize(static_cast<std::size_t>(K + 1));
  out.identically_one.assign(static_cast<std::size_t>(K + 1), false);
  out.moment_residual.assign(static_cast<std::size_t>(K + 1), 0.0);

  Eigen::VectorXd running = Eigen::VectorXd::Ones(nc);
  for (int k = 1; k <= K + 1; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const auto& spec = specs[idx];
    const Eigen::MatrixXd design = design_matrix(spec, mu_inputs(dataset, k));
    const Eigen::VectorXd in_arm = complete_indicator(dataset, profile.at(k));
    if (!(in_arm.array() > 0.0).any())
      throw Error(ErrorCode::EmptyArm, "no complete cases in the treatment arm for k = " + std::to_string(k));
    const Eigen::VectorXd w = g1.cwiseProduct(in_arm);

    if (k >= 2 && profile.at(k) == profile.at(k - 1)) {
      out.identically_one[idx] = true;
      out.omega[idx] = SeriesRegressor(spec, Eigen::VectorXd::Zero(spec.output_dim()));
    } else {
      const Eigen::VectorXd target =
          k == 1 ? g1 : Eigen::VectorXd(g1.cwiseProduct(complete_indicator(dataset, profile.at(k - 1))));
      const Eigen::MatrixXd gram = design.transpose() * w.asDiagonal() * design / n;
      const Eigen::VectorXd rhs = design.transpose() * target / n;
      LeastSquaresFit fit;
      try {
        fit = solve_psd(gram, rhs);
      } catch (const Error& e) {
        throw Error(ErrorCode::SingularProjection, std::string("omega fit: ") + e.what());
      }
      const Eigen::VectorXd fitted = design * fit.coef;
      out.moment_residual[idx] =
          (design.transpose() * (w.cwiseProduct(fitted) - target)).cwiseAbs().maxCoeff() / n;
      for (Eigen::Index i = 0; i < nc; ++i) {
        if (fitted(i) < kOmegaFloor) out.floor_events++;
        running(i) *= std::max(fitted(i), kOmegaFloor);
      }
      out.omega[idx] = SeriesRegressor(spec, fit.coef, fit.diagnostics);
    }
    auto proj = weighted_least_squares(design, running, w);
    out.products[idx] = SeriesRegressor(spec, proj.coef, proj.diagnostics);
  }
  return out;
}

double compute_phi(const ObservedRecord& record, const NuisanceFits& fits, const OmegaFits& omegas) {
  if (record.r != 1) throw Error(ErrorCode::MissingCovariate, "phi needs the covariates (r = 1)");
  const int K = static_cast<int>(fits.mu.size()) - 1;
  const auto& profile = fits.profile;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> mu;
  for (int k = 1; k <= K + 1; ++k) {
    points.push_back(mu_point(record, k));
    mu.push_back(fits.mu_k(k).predict(points.back()));
  }
  double phi = mu[0];
  for (int k = 1; k <= K; ++k)
    if (record.a == profile.at(k))
      phi += omegas.product_k(k, points[static_cast<std::size_t>(k - 1)]) *
             (mu[static_cast<std::size_t>(k)] - mu[static_cast<std::size_t>(k - 1)]);
  if (record.a == profile.at(K + 1))
    phi += omegas.product_k(K + 1, points[static_cast<std::size_t>(K)]) *
           (record.y - mu[static_cast<std::size_t>(K)]);
  return phi;
}

Eigen::VectorXd phi_values(const Dataset& dataset, const NuisanceFits& fits, const OmegaFits& omegas) {
  const int K = static_cast<int>(fits.mu.size()) - 1;
  const auto& profile = fits.profile;
  const Eigen::Index nc = static_cast<Eigen::Index>(dataset.complete_count());
  std::vector<Eigen::VectorXd> mu, prod;
  for (int k = 1; k <= K + 1; ++k) {
    const Eigen::MatrixXd design = design_matrix(fits.mu_specs[static_cast<std::size_t>(k - 1)],
                                                 mu_inputs(dataset, k));
    mu.push_back(design * fits.mu_k(k).coef());
    prod.push_back(design * omegas.products[static_cast<std::size_t>(k - 1)].coef());
  }
  Eigen::VectorXd y(nc), a(nc);
  {
    Eigen::Index row = 0;
    for (const auto& rec : dataset.records())
      if (rec.r == 1) {
        y(row) = rec.y;
        a(row++) = rec.a;
      }
  }
  Eigen::VectorXd phi_c = mu[0];
  for (Eigen::Index i = 0; i < nc; ++i) {
    for (int k = 1; k <= K; ++k) {
      const auto j = static_cast<std::size_t>(k - 1);
      if (static_cast<int>(a(i)) == profile.at(k)) phi_c(i) += prod[j](i) * (mu[j + 1](i) - mu[j](i));
    }
    const auto last = static_cast<std::size_t>(K);
    if (static_cast<int>(a(i)) == profile.at(K + 1)) phi_c(i) += prod[last](i) * (y(i) - mu[last](i));
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dataset.size()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].r == 1) phi(static_cast<Eigen::Index>(i)) = phi_c(row++);
  return phi;
}

namespace {

struct RepresenterSystem {
  Eigen::MatrixXd hd;  // H D, n x s
  Eigen::VectorXd rhs; // D' phi / n
};

RepresenterSystem representer_system(const Dataset& dataset, const Eigen::VectorXd& phi,
                                     const BasisSpec& spec_q, const BasisSpec& spec_p) {
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  if (phi.size() != n) throw Error(ErrorCode::LengthMismatch, "phi must have one value per record");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, spec_q.output_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = dataset[static_cast<std::size_t>(i)];
    if (rec.r == 1) d.row(i) = eval_basis(spec_q, gamma_q_point(rec)).transpose();
  }
  const HatProjection hat(design_matrix(spec_p, gamma_p_inputs(dataset)));
  RepresenterSystem sys;
  sys.hd = hat.apply(d);
  sys.rhs = d.transpose() * phi / static_cast<double>(n);
  return sys;
}

}  // namespace

RepresenterFit fit_representer(const Dataset& dataset, [[maybe_unused]] const GammaModel& gamma,
                               const Eigen::VectorXd& phi, const BasisSpec& spec_q,
                               const BasisSpec& spec_p) {
  const auto sys = representer_system(dataset, phi, spec_q, spec_p);
  const double n = static_cast<double>(dataset.size());
  const Eigen::MatrixXd gram = sys.hd.transpose() * sys.hd / n;
  LeastSquaresFit fit = solve_psd(gram, sys.rhs);
  RepresenterFit out;
  out.theta = fit.coef;
  out.diagnostics = fit.diagnostics;
  out.projected = sys.hd * out.theta;
  out.criterion = 0.5 * out.projected.squaredNorm() / n - out.theta.dot(sys.rhs);
  return out;
}

double representer_criterion(const Dataset& dataset, const Eigen::VectorXd& phi,
                             const BasisSpec& spec_q, const BasisSpec& spec_p,
                             const Eigen::VectorXd& theta) {
  const auto sys = representer_system(dataset, phi, spec_q, spec_p);
  const double n = static_cast<double>(dataset.size());
  return 0.5 * (sys.hd * theta).squaredNorm() / n - theta.dot(sys.rhs);
}

Eigen::VectorXd influence_values(const Dataset& dataset, const GammaModel& gamma,
                                 const Eigen::VectorXd& phi, const Eigen::VectorXd& rho_projected,
                                 double psi_hat) {
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  if (phi.size() != n || rho_projected.size() != n)
    throw Error(ErrorCode::LengthMismatch, "influence inputs must have one value per record");
  const Eigen::VectorXd g = gamma.values_on(dataset);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = dataset[static_cast<std::size_t>(i)].r;
    out(i) = r * (1.0 + g(i)) * phi(i) - psi_hat - rho_projected(i) * (r * g(i) - 1.0 + r);
  }
  return out;
}

InferenceReport variance_and_ci(const Eigen::VectorXd& if_values, double estimate, double level) {
  if (if_values.size() < 2) throw Error(ErrorCode::LengthMismatch, "variance needs n >= 2");
  InferenceReport rep;
  rep.estimate = estimate;
  rep.if_values = if_values;
  rep.n = static_cast<std::size_t>(if_values.size());
  rep.level = level;
  rep.sigma2 = if_values.squaredNorm() / static_cast<double>(rep.n);
  rep.se = std::sqrt(rep.sigma2 / static_cast<double>(rep.n));
  const double z = z_critical(level);
  rep.ci_lo = estimate - z * rep.se;
  rep.ci_hi = estimate + z * rep.se;
  rep.if_mean = if_values.mean();
  return rep;
}

InferenceReport contrast_variance(const Eigen::VectorXd& if_a, const Eigen::VectorXd& if_b,
                                  double contrast_hat, double level) {
  if (if_a.size() != if_b.size())
    throw Error(ErrorCode::LengthMismatch, "influence vectors are not unit-aligned");
  return variance_and_ci(if_a - if_b, contrast_hat, level);
}

}  // namespace shadowmed
