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

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace shadowmed {

// One unit: (R, Z, X, A, M_1..M_K, Y). x_miss is the block that is either
// fully observed (r = 1) or entirely missing (r = 0).
struct ObservedRecord {
  int r = 1;
  Eigen::VectorXd z;
  std::optional<Eigen::VectorXd> x_miss;
  Eigen::VectorXd x_obs;
  int a = 0;
  std::vector<Eigen::VectorXd> m;
  double y = 0.0;
};

struct Dims {
  int z = 1;
  int x_miss = 1;
  int x_obs = 0;
  std::vector<int> m;  // one entry per mediator cluster

  int k() const { return static_cast<int>(m.size()); }
  int x() const { return x_miss + x_obs; }
  // Width of (M_1, ..., M_k).
  int mediators_through(int k) const;
};

// Column names used for CSV round trips. Defaults are generated from Dims.
struct ColumnNames {
  std::vector<std::string> z;
  std::vector<std::string> x_miss;
  std::vector<std::string> x_obs;
  std::vector<std::vector<std::string>> m;

  static ColumnNames defaults(const Dims& dims);
  std::vector<std::string> header() const;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ObservedRecord> records, Dims dims);
  Dataset(std::vector<ObservedRecord> records, Dims dims, ColumnNames names);

  const std::vector<ObservedRecord>& records() const { return records_; }
  const ObservedRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  int k() const { return dims_.k(); }
  const Dims& dims() const { return dims_; }
  const ColumnNames& names() const { return names_; }

  std::size_t complete_count() const;

 private:
  std::vector<ObservedRecord> records_;
  Dims dims_;
  ColumnNames names_;
};

struct ValidationReport {
  std::size_t n = 0;
  std::size_t n_complete = 0;
  double miss_frac = 0.0;
  std::array<std::size_t, 2> arm_counts{0, 0};
  std::array<std::size_t, 2> complete_arm_counts{0, 0};
  bool dims_consistent = true;
  std::vector<std::string> flags;
};

// Throws EmptyDataset for n = 0 and DimensionMismatch for any record that
// breaks the declared layout or the x_miss <=> r = 1 rule. Soft problems
// (empty arms, all-missing, all-observed) are reported as flags.
ValidationReport validate(const Dataset& dataset);

// Records with r = 1, order preserved. Throws EmptyResult if none.
Dataset complete_cases(const Dataset& dataset);

// [x_miss, x_obs]. Throws MissingCovariate for r = 0.
Eigen::VectorXd covariate_vector(const ObservedRecord& record);

// [M_1, ..., M_k] flattened; k = 0 gives an empty vector.
Eigen::VectorXd mediator_prefix(const ObservedRecord& record, int k);

// A vector of K+1 binary treatment statuses (a_1, ..., a_{K+1}).
class TreatmentProfile {
 public:
  TreatmentProfile() = default;
  explicit TreatmentProfile(std::vector<int> a);

  int k() const { return static_cast<int>(a_.size()) - 1; }
  std::size_t size() const { return a_.size(); }
  // 1-based access mirroring a_1..a_{K+1}.
  int at(int k) const { return a_.at(static_cast<std::size_t>(k - 1)); }
  const std::vector<int>& values() const { return a_; }

  std::string label() const;
  static TreatmentProfile parse(const std::string& text);

  static TreatmentProfile constant(int k, int value);
  // a_1..a_{j} = lo, a_{j+1}..a_{K+1} = hi.
  static TreatmentProfile step(int k, int j, int lo = 0, int hi = 1);

  friend bool operator==(const TreatmentProfile&, const TreatmentProfile&) = default;
  friend auto operator<=>(const TreatmentProfile&, const TreatmentProfile&) = default;

 private:
  std::vector<int> a_;
};

}  // namespace shadowmed
