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

#include "shadowmed/analysis.hpp"

#include "shadowmed/error.hpp"

#include <algorithm>
#include <map>

namespace shadowmed {

const EstimandResult* AnalysisResult::find(const std::string& name) const {
  for (const auto& e : estimands)
    if (e.estimand.name == name) return &e;
  return nullptr;
}

const ProfileResult* AnalysisResult::find(const TreatmentProfile& profile) const {
  for (const auto& p : profiles)
    if (p.profile == profile) return &p;
  return nullptr;
}

AnalysisResult analyze_with_gamma(const Dataset& dataset, const GammaModel& gamma,
                                  const std::vector<Estimand>& estimands,
                                  const AnalysisSettings& settings,
                                  const std::optional<std::pair<BasisSpec, BasisSpec>>& qp_bases) {
  if (estimands.empty()) throw Error(ErrorCode::ConfigError, "no estimands requested");
  if (!gamma.is_zero() && !qp_bases)
    throw Error(ErrorCode::ConfigError, "nonzero odds model needs the q/p bases for inference");

  AnalysisResult result;
  result.n_used = dataset.size();
  result.gamma_zero = gamma.is_zero();

  const std::vector<BasisSpec> mu_specs = default_mu_bases(dataset, settings.mu_basis);
  PsiTable table(dataset, gamma, mu_specs);
  const Eigen::VectorXd gamma_values = gamma.values_on(dataset);

  std::map<TreatmentProfile, InferenceReport> by_profile;
  auto profile_report = [&](const TreatmentProfile& profile) -> const InferenceReport& {
    auto it = by_profile.find(profile);
    if (it != by_profile.end()) return it->second;
    const NuisanceFits& fits = table.fits(profile);
    const PsiEstimate& psi = table.psi(profile);
    const OmegaFits omegas = fit_omegas(dataset, gamma, profile, mu_specs);
    const Eigen::VectorXd phi = phi_values(dataset, fits, omegas);
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(phi.size());
    double rho_criterion = 0.0;
    if (!gamma.is_zero()) {
      const RepresenterFit rep = fit_representer(dataset, gamma, phi, qp_bases->first, qp_bases->second);
      rho = rep.projected;
      rho_criterion = rep.criterion;
    }
    InferenceReport report =
        variance_and_ci(influence_values(dataset, gamma, phi, rho, psi.psi_hat), psi.psi_hat, settings.level);

    double weighted_phi = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (dataset[i].r == 1) {
        const auto idx = static_cast<Eigen::Index>(i);
        weighted_phi += (1.0 + gamma_values(idx)) * phi(idx);
      }
    weighted_phi /= static_cast<double>(dataset.size());
    double mu_ridge = 0.0;
    for (const auto& m : fits.mu) mu_ridge = std::max(mu_ridge, m.diagnostics().ridge);
    report.diagnostics["mu_orthogonality_max"] =
        *std::max_element(fits.orthogonality.begin(), fits.orthogonality.end());
    report.diagnostics["mu_ridge_max"] = mu_ridge;
    report.diagnostics["omega_moment_residual_max"] =
        *std::max_element(omegas.moment_residual.begin(), omegas.moment_residual.end());
    report.diagnostics["omega_floor_events"] = omegas.floor_events;
    report.diagnostics["representer_criterion"] = rho_criterion;
    report.diagnostics["phi_self_consistency"] = weighted_phi - psi.psi_hat;
    return by_profile.emplace(profile, std::move(report)).first->second;
  };

  for (const auto& est : estimands) {
    const InferenceReport& plus = profile_report(est.plus);
    if (!est.minus) {
      result.estimands.push_back({est, plus});
      continue;
    }
    const InferenceReport& minus = profile_report(*est.minus);
    InferenceReport rep =
        contrast_variance(plus.if_values, minus.if_values, plus.estimate - minus.estimate, settings.level);
    result.estimands.push_back({est, std::move(rep)});
  }
  for (auto& [profile, report] : by_profile) result.profiles.push_back({profile, report});
  return result;
}

AnalysisResult sri_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                            const AnalysisSettings& settings) {
  validate(dataset);
  const std::size_t n_complete = dataset.complete_count();
  if (n_complete == dataset.size()) {
    AnalysisResult result = analyze_with_gamma(dataset, GammaModel::zero(), estimands, settings);
    result.method = "sri";
    return result;
  }
  auto bases = default_gamma_bases(dataset, settings.q_basis, settings.p_basis);
  auto [gamma, report] = fit_gamma(dataset, bases.first, bases.second, settings.gamma);
  AnalysisResult result = analyze_with_gamma(dataset, gamma, estimands, settings, bases);
  result.method = "sri";
  result.gamma_report = report;
  if (!report.converged) result.warnings.emplace_back("gamma solver did not reach grad_tol");
  if (report.projection_ridge > 0.0) result.warnings.emplace_back("conditioning basis needed a ridge");
  return result;
}

}  // namespace shadowmed
