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

#include <cstdint>

namespace shadowmed {

// Standard normal CDF via erfc; absolute error well below 1e-15.
double normal_cdf(double x);

// Inverse standard normal CDF: Acklam's rational approximation followed by
// one Halley correction step.
double normal_quantile(double p);

// Two-sided critical value z with P(|N(0,1)| <= z) = level.
double z_critical(double level);

double expit(double u);

// SplitMix64 finalizer. Stream seeds are derive_seed(master, index), so a
// replication's random stream depends only on (master, index).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace shadowmed
