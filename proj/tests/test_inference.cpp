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

#include "shadowmed/error.hpp"
#include "shadowmed/inference.hpp"
#include "shadowmed/stats.hpp"

#include <cmath>
#include <random>

using namespace shadowmed;
using testutil::record;
using testutil::vec;

namespace {

Dataset complete(const Dataset& d) {
  std::vector<ObservedRecord> recs;
  for (const auto& rec : d.records())
    if (rec.r == 1) recs.push_back(rec);
  return Dataset(std::move(recs), d.dims());
}

// K = 1 data with A independent of everything at probability one half.
Dataset coin_treatment(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ObservedRecord> recs;
  for (int i = 0; i < n; ++i) {
    const double x = nrm(rng), w = unif(rng);
    const int a = unif(rng) < 0.5;
    const double m = a + x + nrm(rng);
    recs.push_back(record(1, x + nrm(rng), x, {w}, a, {m}, x + m + nrm(rng)));
  }
  return Dataset(std::move(recs), testutil::dims(1, 1));
}

}  // namespace

TEST_CASE("repeated treatment levels make the omega identically one") {
  const Dataset d = complete(testutil::random_instance(3, 300, 2, 0.0));
  const auto specs = default_mu_bases(d);
  const OmegaFits om = fit_omegas(d, GammaModel::zero(), TreatmentProfile({1, 1, 0}), specs);
  CHECK_FALSE(om.identically_one[0]);
  CHECK(om.identically_one[1]);
  CHECK_FALSE(om.identically_one[2]);
  CHECK(om.omega_k(2, mu_point(d[0], 2)) == 1.0);
  for (double res : om.moment_residual) CHECK(res <= 1e-8);
}

TEST_CASE("a fair coin treatment gives inverse-probability weight two") {
  const Dataset d = coin_treatment(20000, 5);
  const auto specs = default_mu_bases(d);
  const OmegaFits om = fit_omegas(d, GammaModel::zero(), TreatmentProfile({1, 1}), specs);
  double mean = 0.0;
  for (const auto& rec : d.records()) mean += om.omega_k(1, mu_point(rec, 1));
  CHECK(mean / static_cast<double>(d.size()) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(om.floor_events == 0);
}

TEST_CASE("phi follows the arm indicators term by term") {
  const Dataset d = complete(testutil::random_instance(9, 200, 1, 0.0));
  const auto specs = default_mu_bases(d);
  const TreatmentProfile p({1, 0});
  const NuisanceFits fits = fit_mu_chain(d, GammaModel::zero(), p, specs);
  const OmegaFits om = fit_omegas(d, GammaModel::zero(), p, specs);
  const Eigen::VectorXd phi = phi_values(d, fits, om);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& rec = d[i];
    const Eigen::VectorXd u1 = mu_point(rec, 1), u2 = mu_point(rec, 2);
    const double mu1 = fits.mu_k(1).predict(u1), mu2 = fits.mu_k(2).predict(u2);
    // a = 1 activates only the first correction, a = 0 only the outcome residual.
    const double expect = rec.a == 1 ? mu1 + om.product_k(1, u1) * (mu2 - mu1)
                                     : mu1 + om.product_k(2, u2) * (rec.y - mu2);
    CHECK(phi(static_cast<Eigen::Index>(i)) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(compute_phi(rec, fits, om) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("with one mediator and a constant profile phi is the AIPW form") {
  const Dataset d = coin_treatment(400, 8);
  const auto specs = default_mu_bases(d);
  const TreatmentProfile p({1, 1});
  const NuisanceFits fits = fit_mu_chain(d, GammaModel::zero(), p, specs);
  const OmegaFits om = fit_omegas(d, GammaModel::zero(), p, specs);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& rec = d[i];
    const Eigen::VectorXd u1 = mu_point(rec, 1), u2 = mu_point(rec, 2);
    const double mu1 = fits.mu_k(1).predict(u1), mu2 = fits.mu_k(2).predict(u2);
    const double expect = rec.a == 1 ? mu1 + om.product_k(1, u1) * (mu2 - mu1) +
                                           om.product_k(2, u2) * (rec.y - mu2)
                                     : mu1;
    CHECK(compute_phi(rec, fits, om) == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK_THROWS_AS(compute_phi(record(0, 0.0, std::nullopt, {0.1}, 1, {0.0}, 0.0), fits, om), Error);
}

TEST_CASE("representer: zero phi gives zero and the fit minimizes the criterion") {
  const Dataset d = testutil::random_instance(12, 20, 1, 0.3);
  const BasisSpec q = BasisSpec::power(5, 1, Standardizer::identity(5), {}, false);
  const BasisSpec p = BasisSpec::power(5, 2, Standardizer::identity(5), {}, false);
  const GammaModel g = GammaModel::zero();

  const RepresenterFit zero = fit_representer(d, g, Eigen::VectorXd::Zero(20), q, p);
  CHECK(zero.projected.cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::VectorXd phi(20);
  for (int i = 0; i < 20; ++i) phi(i) = d[static_cast<std::size_t>(i)].r ? std::sin(1.0 + i) : 0.0;
  const RepresenterFit fit = fit_representer(d, g, phi, q, p);
  CHECK(fit.criterion <= 0.0);
  CHECK(representer_criterion(d, phi, q, p, fit.theta) == doctest::Approx(fit.criterion).epsilon(1e-12));

  // The criterion is an exact quadratic; recover it from evaluations and
  // minimize it with a full-pivot solve.
  const int s = q.output_dim();
  auto c = [&](const Eigen::VectorXd& t) { return representer_criterion(d, phi, q, p, t); };
  Eigen::MatrixXd hess(s, s);
  Eigen::VectorXd lin(s);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(s);
  for (int j = 0; j < s; ++j) {
    const Eigen::VectorXd ej = Eigen::VectorXd::Unit(s, j);
    lin(j) = -(c(ej) - c(-ej)) / 2.0;
    hess(j, j) = c(ej) + c(-ej) - 2.0 * c(z);
  }
  for (int j = 0; j < s; ++j)
    for (int k = j + 1; k < s; ++k) {
      const Eigen::VectorXd ej = Eigen::VectorXd::Unit(s, j), ek = Eigen::VectorXd::Unit(s, k);
      hess(j, k) = hess(k, j) = c(ej + ek) - c(ej) - c(ek) + c(z);
    }
  const Eigen::VectorXd theta = hess.completeOrthogonalDecomposition().solve(lin);
  CHECK(std::abs(c(theta) - fit.criterion) <= 1e-6);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nrm(0.0, 0.1);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd pert = fit.theta;
    for (int j = 0; j < s; ++j) pert(j) += nrm(rng);
    CHECK(c(pert) >= fit.criterion - 1e-12);
  }
}

TEST_CASE("influence values on complete data reduce to phi minus psi") {
  const Dataset d = complete(testutil::random_instance(14, 100, 1, 0.0));
  Eigen::VectorXd phi(100), rho(100);
  for (int i = 0; i < 100; ++i) {
    phi(i) = 0.01 * i;
    rho(i) = std::cos(i);
  }
  const Eigen::VectorXd inf = influence_values(d, GammaModel::zero(), phi, rho, 0.3);
  CHECK((inf - (phi.array() - 0.3).matrix()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(influence_values(d, GammaModel::zero(), phi.head(5), rho, 0.0), Error);
}

TEST_CASE("influence values with missing records carry the odds correction") {
  std::vector<ObservedRecord> recs{record(1, 0.0, 1.0, {0.0}, 1, {0.0}, 1.0),
                                   record(0, 0.0, std::nullopt, {0.0}, 0, {0.0}, 1.0)};
  const Dataset d(std::move(recs), testutil::dims(1, 1));
  const GammaModel g = GammaModel::fixed([](const Eigen::VectorXd&) { return 0.5; });
  const Eigen::VectorXd inf = influence_values(d, g, vec({2.0, 0.0}), vec({1.0, 3.0}), 1.0);
  // 1.5 * 2 - 1 - 1 * (0.5 - 1 + 1) and 0 - 1 - 3 * (0 - 1 + 0).
  CHECK(inf(0) == doctest::Approx(1.5));
  CHECK(inf(1) == doctest::Approx(2.0));
}

TEST_CASE("variance and confidence interval arithmetic") {
  const InferenceReport zero = variance_and_ci(Eigen::VectorXd::Zero(50), 1.25);
  CHECK(zero.se == 0.0);
  CHECK(zero.ci_lo == 1.25);
  CHECK(zero.ci_hi == 1.25);

  Eigen::VectorXd alt(400);
  for (int i = 0; i < 400; ++i) alt(i) = i % 2 ? 1.0 : -1.0;
  const InferenceReport rep = variance_and_ci(alt, 0.0);
  CHECK(rep.sigma2 == doctest::Approx(1.0));
  CHECK(rep.se == doctest::Approx(0.05));
  CHECK(rep.ci_lo == doctest::Approx(-1.959964 / 20.0).epsilon(1e-6));
  CHECK(rep.ci_hi == doctest::Approx(1.959964 / 20.0).epsilon(1e-6));
  CHECK(rep.covers(0.09));
  CHECK_FALSE(rep.covers(0.1));
  CHECK_THROWS_AS(variance_and_ci(Eigen::VectorXd::Zero(1), 0.0), Error);
}

TEST_CASE("contrast variance") {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 0.5, -1, 2, 0;
  CHECK(contrast_variance(a, a, 0.0).sigma2 == 0.0);
  const InferenceReport rep = contrast_variance(a, b, 0.2);
  CHECK(rep.sigma2 == doctest::Approx((0.25 + 9 + 1 + 16) / 4.0));
  const double bound = std::sqrt(a.squaredNorm() / 4.0) + std::sqrt(b.squaredNorm() / 4.0);
  CHECK(std::sqrt(rep.sigma2) <= bound);
  CHECK_THROWS_AS(contrast_variance(a, b.head(3), 0.0), Error);
}

TEST_CASE("normal critical values") {
  CHECK(z_critical(0.95) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(z_critical(0.90) == doctest::Approx(1.644853627).epsilon(1e-8));
  CHECK(normal_cdf(z_critical(0.99)) == doctest::Approx(0.995).epsilon(1e-10));
}
