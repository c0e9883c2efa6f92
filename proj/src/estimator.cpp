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

#include "shadowmed/estimator.hpp"

#include "shadowmed/error.hpp"

#include <algorithm>
#include <cctype>

namespace shadowmed {

Eigen::VectorXd mu_point(const ObservedRecord& record, int k) {
  const Eigen::VectorXd x = covariate_vector(record);
  const Eigen::VectorXd m = mediator_prefix(record, k - 1);
  Eigen::VectorXd out(x.size() + m.size());
  out << x, m;
  return out;
}

Eigen::MatrixXd mu_inputs(const Dataset& dataset, int k) {
  const Dims& d = dataset.dims();
  const Eigen::Index width = d.x() + d.mediators_through(k - 1);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dataset.complete_count()), width);
  Eigen::Index row = 0;
  for (const auto& rec : dataset.records())
    if (rec.r == 1) out.row(row++) = mu_point(rec, k).transpose();
  return out;
}

std::vector<BasisSpec> default_mu_bases(const Dataset& dataset, const BasisConfig& config) {
  std::vector<BasisSpec> specs;
  for (int k = 1; k <= dataset.k() + 1; ++k) {
    const Eigen::MatrixXd in = mu_inputs(dataset, k);
    if (in.rows() < 2)
      throw Error(ErrorCode::InsufficientCompleteCases, "outcome bases need at least two complete cases");
    specs.push_back(make_basis(config, in));
  }
  return specs;
}

Eigen::VectorXd arm_weights(const Dataset& dataset, const Eigen::VectorXd& gamma_values, int arm) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(dataset.complete_count()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& rec = dataset[i];
    if (rec.r != 1) continue;
    w(row++) = rec.a == arm ? 1.0 + gamma_values(static_cast<Eigen::Index>(i)) : 0.0;
  }
  return w;
}

namespace {

void require_arm(const Eigen::VectorXd& weights, int k) {
  if (!(weights.array() > 0.0).any())
    throw Error(ErrorCode::EmptyArm, "no complete cases in the treatment arm for k = " + std::to_string(k));
}

double orthogonality(const Eigen::MatrixXd& design, const Eigen::VectorXd& coef,
                     const Eigen::VectorXd& target, const Eigen::VectorXd& weights, double n) {
  const Eigen::VectorXd resid = (target - design * coef).cwiseProduct(weights);
  return (design.transpose() * resid).cwiseAbs().maxCoeff() / n;
}

}  // namespace

NuisanceFits fit_mu_chain(const Dataset& dataset, const GammaModel& gamma,
                          const TreatmentProfile& profile, const std::vector<BasisSpec>& mu_specs) {
  const int K = dataset.k();
  if (profile.k() != K)
    throw Error(ErrorCode::ConfigError, "profile length " + std::to_string(profile.size()) +
                                            " does not match K+1 = " + std::to_string(K + 1));
  if (static_cast<int>(mu_specs.size()) != K + 1)
    throw Error(ErrorCode::ConfigError, "need K+1 outcome bases");

  const Eigen::VectorXd gamma_values = gamma.values_on(dataset);
  const double n = static_cast<double>(dataset.size());

  NuisanceFits fits;
  fits.profile = profile;
  fits.gamma = gamma;
  fits.mu_specs = mu_specs;
  fits.mu.resize(static_cast<std::size_t>(K + 1));
  fits.orthogonality.resize(static_cast<std::size_t>(K + 1));

  Eigen::VectorXd target(static_cast<Eigen::Index>(dataset.complete_count()));
  {
    Eigen::Index row = 0;
    for (const auto& rec : dataset.records())
      if (rec.r == 1) target(row++) = rec.y;
  }
  for (int k = K + 1; k >= 1; --k) {
    const auto& spec = mu_specs[static_cast<std::size_t>(k - 1)];
    const Eigen::VectorXd w = arm_weights(dataset, gamma_values, profile.at(k));
    require_arm(w, k);
    const Eigen::MatrixXd design = design_matrix(spec, mu_inputs(dataset, k));
    auto ls = weighted_least_squares(design, target, w);
    fits.orthogonality[static_cast<std::size_t>(k - 1)] = orthogonality(design, ls.coef, target, w, n);
    fits.mu[static_cast<std::size_t>(k - 1)] = SeriesRegressor(spec, ls.coef, ls.diagnostics);
    // Next response: mu_k at every complete case's own (X, M_1..M_{k-1}).
    target = design * fits.mu[static_cast<std::size_t>(k - 1)].coef();
  }
  return fits;
}

PsiEstimate estimate_psi(const Dataset& dataset, const NuisanceFits& fits) {
  const Eigen::VectorXd gamma_values = fits.gamma.values_on(dataset);
  const Eigen::VectorXd mu1 = fits.mu_k(1).predict_many(mu_inputs(dataset, 1));
  PsiEstimate est;
  est.profile = fits.profile;
  est.per_unit_plugin = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dataset.size()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].r != 1) continue;
    const auto idx = static_cast<Eigen::Index>(i);
    est.per_unit_plugin(idx) = (1.0 + gamma_values(idx)) * mu1(row++);
  }
  est.psi_hat = est.per_unit_plugin.mean();
  return est;
}

Estimand nde_estimand(int k) {
  return {"NDE", TreatmentProfile::step(k, k), TreatmentProfile::constant(k, 0)};
}

Estimand nie_estimand(int k, int j) {
  if (j < 1 || j > k) throw Error(ErrorCode::ConfigError, "NIE index out of range");
  return {"NIE" + std::to_string(j), TreatmentProfile::step(k, j - 1), TreatmentProfile::step(k, j)};
}

Estimand te_estimand(int k) {
  return {"TE", TreatmentProfile::constant(k, 1), TreatmentProfile::constant(k, 0)};
}

Estimand pse_m2_estimand(int k) {
  if (k != 2) throw Error(ErrorCode::ConfigError, "pse_m2 is defined for K = 2");
  return {"PSE_M2", TreatmentProfile({1, 1, 1}), TreatmentProfile({1, 0, 1})};
}

Estimand psi_estimand(const TreatmentProfile& profile) {
  return {"psi(" + profile.label() + ")", profile, std::nullopt};
}

std::vector<Estimand> parse_estimands(const std::string& raw, int k) {
  std::string name;
  for (char c : raw) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (name == "all") {
    std::vector<Estimand> out{nde_estimand(k)};
    for (int j = 1; j <= k; ++j) out.push_back(nie_estimand(k, j));
    out.push_back(te_estimand(k));
    return out;
  }
  if (name == "nde") return {nde_estimand(k)};
  if (name == "te") return {te_estimand(k)};
  if (name == "pse_m2") return {pse_m2_estimand(k)};
  if (name.rfind("nie", 0) == 0) {
    std::string digits = name.substr(3);
    if (!digits.empty() && digits[0] == '_') digits = digits.substr(1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
      return {nie_estimand(k, std::stoi(digits))};
  }
  throw Error(ErrorCode::ConfigError, "unknown estimand '" + raw + "'");
}

ContrastEstimate estimate_contrast(const Dataset& dataset, const GammaModel& gamma,
                                   const TreatmentProfile& a, const TreatmentProfile& b,
                                   const std::vector<BasisSpec>& mu_specs) {
  PsiTable table(dataset, gamma, mu_specs);
  ContrastEstimate out;
  out.a = table.psi(a);
  out.b = table.psi(b);
  out.value = out.a.psi_hat - out.b.psi_hat;
  return out;
}

PsiTable::PsiTable(const Dataset& dataset, GammaModel gamma, std::vector<BasisSpec> mu_specs)
    : dataset_(dataset), gamma_(std::move(gamma)), mu_specs_(std::move(mu_specs)) {}

const PsiTable::Entry& PsiTable::entry(const TreatmentProfile& profile) {
  auto it = cache_.find(profile);
  if (it == cache_.end()) {
    Entry e;
    e.fits = fit_mu_chain(dataset_, gamma_, profile, mu_specs_);
    e.psi = estimate_psi(dataset_, e.fits);
    it = cache_.emplace(profile, std::move(e)).first;
  }
  return it->second;
}

const PsiEstimate& PsiTable::psi(const TreatmentProfile& profile) { return entry(profile).psi; }

const NuisanceFits& PsiTable::fits(const TreatmentProfile& profile) { return entry(profile).fits; }

double PsiTable::contrast(const Estimand& estimand) {
  const double plus = psi(estimand.plus).psi_hat;
  if (!estimand.minus) return plus;
  return plus - psi(*estimand.minus).psi_hat;
}

}  // namespace shadowmed
