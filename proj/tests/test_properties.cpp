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

#include "doctest.h"
#include "helpers.hpp"

#include "shadowmed/baselines.hpp"
#include "shadowmed/gamma_solver.hpp"
#include "shadowmed/inference.hpp"

#include <cmath>
#include <random>

using namespace shadowmed;

TEST_CASE("normal equations of outcome and weight fits hold on random instances") {
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    CAPTURE(seed);
    const int k = 1 + static_cast<int>(seed % 3);
    const Dataset d = testutil::random_instance(seed, 150 + static_cast<int>(seed % 7) * 20, k, 0.25);
    const auto specs = default_mu_bases(d, BasisConfig{BasisKind::Power, 2, true});
    const double shift = 0.1 * static_cast<double>(seed % 5);
    const GammaModel gamma =
        GammaModel::fixed([shift](const Eigen::VectorXd& x) { return 0.3 + shift * x(0) * x(0); });
    std::vector<int> levels(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j) levels[static_cast<std::size_t>(j)] = static_cast<int>((seed >> j) & 1u);
    const TreatmentProfile profile(levels);
    const NuisanceFits fits = fit_mu_chain(d, gamma, profile, specs);
    for (double o : fits.orthogonality) CHECK(o <= 1e-8);
    const OmegaFits om = fit_omegas(d, gamma, profile, specs);
    for (double res : om.moment_residual) CHECK(res <= 1e-8);
  }
}

TEST_CASE("full data: the shadow estimator coincides with the oracle") {
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d = testutil::random_instance(200 + trial, 200, 2, 0.0);
    const auto est = parse_estimands("all", 2);
    const AnalysisResult a = sri_estimate(d, est);
    const AnalysisResult b = oracle_estimate(d, est);
    for (std::size_t i = 0; i < est.size(); ++i) {
      CHECK(std::abs(a.estimands[i].report.estimate - b.estimands[i].report.estimate) <= 1e-10);
      CHECK(std::abs(a.estimands[i].report.se - b.estimands[i].report.se) <= 1e-10);
    }
  }
}

TEST_CASE("criterion gradient agrees with finite differences at random points") {
  const Dataset d = testutil::random_instance(300, 250, 2, 0.35);
  const auto [q, p] = default_gamma_bases(d);
  const GammaCriterion crit(d, q, p, 10.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nrm(0.0, 0.5);
  for (int point = 0; point < 20; ++point) {
    Eigen::VectorXd pi(crit.num_params());
    for (Eigen::Index j = 0; j < pi.size(); ++j) pi(j) = nrm(rng);
    const Eigen::VectorXd g = crit.gradient(pi);
    Eigen::VectorXd fd(pi.size());
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(pi(j)));
      Eigen::VectorXd up = pi, dn = pi;
      up(j) += h;
      dn(j) -= h;
      fd(j) = (crit.value(up) - crit.value(dn)) / (2 * h);
    }
    CHECK((g - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
  }
}
