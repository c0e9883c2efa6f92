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

#include "shadowmed/gamma_solver.hpp"
#include "shadowmed/simulation.hpp"

#include <cmath>
#include <random>

using namespace shadowmed;
using testutil::record;
using testutil::vec;

namespace {

// Intercept-only q and p bases for a dataset with one x_obs column and K = 1.
std::pair<BasisSpec, BasisSpec> intercept_bases() {
  return {BasisSpec::power(5, 0, Standardizer::identity(5)), BasisSpec::power(5, 0, Standardizer::identity(5))};
}

Dataset four_records() {
  std::vector<ObservedRecord> recs{record(1, 0.1, 0.3, {1.0}, 0, {0.2}, 1.0),
                                   record(1, -0.4, -1.0, {0.0}, 1, {0.5}, 2.0),
                                   record(1, 0.9, 0.7, {2.0}, 1, {-0.3}, 0.5),
                                   record(0, 0.2, std::nullopt, {1.5}, 0, {1.1}, -1.0)};
  return Dataset(std::move(recs), testutil::dims(1, 1));
}

Dataset mcar(int n, double p_obs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ObservedRecord> recs;
  for (int i = 0; i < n; ++i) {
    const double x = nrm(rng), w = nrm(rng);
    const int a = unif(rng) < 0.5;
    const double m = 0.5 * a + x + nrm(rng), y = x + m + nrm(rng);
    const int r = unif(rng) < p_obs;
    recs.push_back(record(r, 0.7 * x + nrm(rng), r ? std::optional<double>(x) : std::nullopt, {w}, a, {m}, y));
  }
  return Dataset(std::move(recs), testutil::dims(1, 1));
}

}  // namespace

TEST_CASE("soft clamp is the identity inside the knee and saturates outside") {
  CHECK(soft_clamp(3.0, 10.0) == 3.0);
  CHECK(soft_clamp(-8.5, 10.0) == -8.5);
  CHECK(soft_clamp(12.0, 10.0) < 10.0);
  CHECK(soft_clamp(12.0, 10.0) > 9.9);
  CHECK(soft_clamp(50.0, 10.0) <= 10.0);
  CHECK(soft_clamp(-50.0, 10.0) == doctest::Approx(-soft_clamp(50.0, 10.0)));
  for (double eta : {-12.0, -9.2, 0.3, 9.0, 9.5, 14.0}) {
    const double h = 1e-6;
    const double fd = (soft_clamp(eta + h, 10.0) - soft_clamp(eta - h, 10.0)) / (2 * h);
    CHECK(soft_clamp_derivative(eta, 10.0) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("intercept-only criterion equals the squared mean moment") {
  const Dataset d = four_records();
  const auto [q, p] = intercept_bases();
  // g = (1, 1, 1, -1) at pi = 0; H averages, so Q_n = mean(g)^2 = 0.25.
  CHECK(criterion_qn(vec({0.0}), d, q, p) == doctest::Approx(0.25));
  // 3 gamma - 1 = 0 at gamma = 1/3.
  CHECK(criterion_qn(vec({std::log(1.0 / 3.0)}), d, q, p) <= 1e-20);
  const auto [model, report] = fit_gamma(d, q, p);
  CHECK(report.q_n_value <= 1e-12);
  CHECK(model.pi()(0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-5));
}

TEST_CASE("fully observed data gives the zero odds model") {
  std::vector<ObservedRecord> recs{record(1, 0.1, 0.3, {1.0}, 0, {0.2}, 1.0),
                                   record(1, -0.4, -1.0, {0.0}, 1, {0.5}, 2.0)};
  const Dataset d(std::move(recs), testutil::dims(1, 1));
  const auto [q, p] = intercept_bases();
  const auto [model, report] = fit_gamma(d, q, p);
  CHECK(model.is_zero());
  CHECK(model.eval(d[0]) == 0.0);
  CHECK(report.q_n_value == 0.0);
}

TEST_CASE("analytic gradient matches central differences") {
  const Dataset d = testutil::random_instance(17, 150, 2, 0.3);
  const auto [q, p] = default_gamma_bases(d);
  const GammaCriterion crit(d, q, p, 10.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nrm(0.0, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd pi(crit.num_params());
    for (Eigen::Index j = 0; j < pi.size(); ++j) pi(j) = nrm(rng);
    const Eigen::VectorXd grad = crit.gradient(pi);
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
      const double h = 1e-6;
      Eigen::VectorXd up = pi, dn = pi;
      up(j) += h;
      dn(j) -= h;
      const double fd = (crit.value(up) - crit.value(dn)) / (2 * h);
      CHECK(std::abs(grad(j) - fd) <= 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("criterion dominates the squared mean moment") {
  // H contains the constant function, so ||Hg||^2 / n >= mean(g)^2.
  const Dataset d = testutil::random_instance(5, 200, 1, 0.4);
  const auto [q, p] = default_gamma_bases(d);
  const GammaCriterion crit(d, q, p, 10.0);
  for (double shift : {-1.0, 0.0, 0.5}) {
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(crit.num_params());
    pi(0) = shift;
    const Eigen::VectorXd g = crit.r().cwiseProduct(crit.gamma_values(pi)) -
                              (Eigen::VectorXd::Ones(crit.n()) - crit.r());
    CHECK(crit.value(pi) >= g.mean() * g.mean() - 1e-12);
  }
}

TEST_CASE("weak norm vanishes for identical odds and grows with the gap") {
  const Dataset d = testutil::random_instance(8, 120, 1, 0.3);
  const auto [q, p] = default_gamma_bases(d);
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d.size()), 0.4);
  CHECK(weak_norm_sq(g, g, d, p) == 0.0);
  const double small = weak_norm_sq(g, g * 1.1, d, p);
  const double large = weak_norm_sq(g, g * 1.5, d, p);
  CHECK(small > 0.0);
  CHECK(large == doctest::Approx(25.0 * small).epsilon(1e-9));
}

TEST_CASE("missing completely at random recovers the constant odds") {
  // Linear q with an intercept; p keeps its default cubic sieve.
  const Dataset d = mcar(5000, 0.7, 11);
  const auto [q, p] = default_gamma_bases(d, {BasisKind::Power, 1, false});
  const auto [model, report] = fit_gamma(d, q, p);
  REQUIRE_FALSE(model.is_zero());
  int close = 0, total = 0;
  for (const auto& rec : d.records()) {
    if (!rec.r) continue;
    ++total;
    close += std::abs(model.eval(rec) - 3.0 / 7.0) <= 0.05;
  }
  CHECK(close >= 0.9 * total);
}

TEST_CASE("simulated data: the fitted criterion improves on every start") {
  DgpConfig cfg;
  cfg.n = 2000;
  cfg.seed = 99;
  const SimulatedSample s = generate(cfg);
  const auto [q, p] = default_gamma_bases(s.observed);
  GammaOptions opt;
  opt.seed = 4;
  const auto [model, report] = fit_gamma(s.observed, q, p, opt);
  CHECK(report.converged);
  CHECK(report.grad_norm <= 1e-5);
  REQUIRE_FALSE(report.start_q_n.empty());
  for (double start : report.start_q_n) CHECK(report.q_n_value <= start + 1e-15);
  // Determinism under a fixed seed.
  const auto again = fit_gamma(s.observed, q, p, opt);
  CHECK((again.first.pi() - model.pi()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed odds models evaluate the supplied function") {
  const GammaModel m = GammaModel::fixed([](const Eigen::VectorXd& x) { return x.sum(); });
  CHECK_FALSE(m.is_zero());
  const ObservedRecord rec = record(1, 0.0, 1.0, {2.0}, 1, {3.0}, 4.0);
  CHECK(m.eval(rec) == doctest::Approx(11.0));
  CHECK(gamma_q_point(rec).size() == 5);
  CHECK(gamma_p_point(rec).size() == 5);
  CHECK(gamma_p_point(rec)(0) == 0.0);
}
