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

// Small builders and independent reference computations shared by the tests.

#pragma once

#include "shadowmed/data_model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testutil {

using shadowmed::Dataset;
using shadowmed::Dims;
using shadowmed::ObservedRecord;

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline ObservedRecord record(int r, double z, std::optional<double> x1, std::vector<double> x_obs, int a,
                             std::vector<double> m, double y) {
  ObservedRecord rec;
  rec.r = r;
  rec.z = vec({z});
  if (x1) rec.x_miss = vec({*x1});
  rec.x_obs = Eigen::Map<Eigen::VectorXd>(x_obs.data(), static_cast<Eigen::Index>(x_obs.size()));
  rec.a = a;
  for (double v : m) rec.m.push_back(vec({v}));
  rec.y = y;
  return rec;
}

inline Dims dims(int x_obs, int k) {
  Dims d;
  d.z = 1;
  d.x_miss = 1;
  d.x_obs = x_obs;
  d.m.assign(static_cast<std::size_t>(k), 1);
  return d;
}

// Random instance with K scalar mediators, one x_obs column and a fraction
// of x_miss masked; outcome smooth in its inputs.
inline Dataset random_instance(std::uint64_t seed, int n, int k, double miss_prob) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ObservedRecord> recs;
  for (int i = 0; i < n; ++i) {
    const double x1 = nrm(rng), x2 = unif(rng), z = 0.6 * x1 + 0.8 * nrm(rng);
    const int a = unif(rng) < 0.3 + 0.4 * (x2 > 0.5) ? 1 : 0;
    std::vector<double> m;
    double prev = 0.0;
    for (int j = 0; j < k; ++j) {
      prev = 0.5 * a + 0.7 * x1 - 0.3 * prev + nrm(rng);
      m.push_back(prev);
    }
    const double y = 1.0 + a + x1 * x2 + prev + 0.5 * nrm(rng);
    const int r = unif(rng) < miss_prob ? 0 : 1;
    recs.push_back(record(r, z, r ? std::optional<double>(x1) : std::nullopt, {x2}, a, m, y));
  }
  return Dataset(std::move(recs), dims(1, k));
}

// Counterfactual means of the simulation design in closed form. X1 and X2 are
// Uniform(0,1) and X3 is Bernoulli(1/2); every structural equation is linear
// in the mediators, so each mean follows by substitution.
inline double closed_form_psi(int a1, int a2, int a3) {
  const double e_sin_x1 = 1.0 - std::cos(1.0);
  const double e_sin_x2 = 1.0 - std::cos(1.0);
  const double e_x_sq = 1.0 / 3.0;
  const double e_m1 = -1.0 + 0.5 * a1 - 2.0 * e_sin_x1 + 3.0 * e_x_sq - 2.0 * 0.5 + 0.5;
  const double e_m2 = 1.0 - 0.5 * a2 + 0.5 + e_x_sq - 0.5 - 0.5 * a2 * e_m1;
  return -1.0 + 0.5 * a3 + (-1.5 + 0.5 * a3) * e_m1 + (1.5 + 0.5 * a3) * e_m2 + 3.0 * 0.5 + 3.0 * e_x_sq -
         3.0 * e_sin_x2 + e_x_sq - 0.5;
}

inline std::map<std::string, double> closed_form_effects() {
  return {{"NDE", closed_form_psi(0, 0, 1) - closed_form_psi(0, 0, 0)},
          {"NIE1", closed_form_psi(1, 1, 1) - closed_form_psi(0, 1, 1)},
          {"NIE2", closed_form_psi(0, 1, 1) - closed_form_psi(0, 0, 1)},
          {"TE", closed_form_psi(1, 1, 1) - closed_form_psi(0, 0, 0)}};
}

}  // namespace testutil
