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

#include <string>
#include <utility>
#include <vector>

namespace shadowmed {

struct Standardizer {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  static Standardizer identity(int dim);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return (x - center).cwiseQuotient(scale);
  }
};

// Per-column mean and population standard deviation; zero-variance columns
// get scale 1. Needs at least two rows of finite values.
Standardizer fit_standardizer(const Eigen::MatrixXd& points);

enum class BasisKind { Power, TensorPower };

const char* to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& text);

// User-facing basis settings; the run config carries these.
struct BasisConfig {
  BasisKind kind = BasisKind::Power;
  int degree = 3;
  bool include_interactions = true;
};

// A polynomial sieve basis over standardized inputs.
//
// Power: intercept, then per-coordinate monomials x_j, x_j^2, ..., x_j^d in
// coordinate-major order, then the pairwise products x_i x_j (i < j) in
// lexicographic order. TensorPower: every product of per-coordinate
// monomials with exponents in 0..d, ordered by total degree and then by
// descending exponent vector. Coordinates flagged binary never exceed power 1.
class BasisSpec {
 public:
  BasisSpec() = default;

  static BasisSpec power(int input_dim, int degree, Standardizer standardizer = {},
                         std::vector<bool> binary = {}, bool include_interactions = true,
                         bool include_intercept = true);
  static BasisSpec tensor_power(int input_dim, int degree, Standardizer standardizer = {},
                                std::vector<bool> binary = {}, bool include_intercept = true);

  BasisKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return static_cast<int>(terms_.size()); }
  bool include_intercept() const { return include_intercept_; }
  bool include_interactions() const { return include_interactions_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const std::vector<bool>& binary() const { return binary_; }

  // Each term is a list of (coordinate, power) factors; the empty list is the intercept.
  using Term = std::vector<std::pair<int, int>>;
  const std::vector<Term>& terms() const { return terms_; }

  // Writes the basis row for an already-standardized point.
  void eval_standardized(const Eigen::Ref<const Eigen::VectorXd>& z,
                         Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  void init(BasisKind kind, int input_dim, int degree, Standardizer standardizer,
            std::vector<bool> binary, bool include_interactions, bool include_intercept);

  BasisKind kind_ = BasisKind::Power;
  int degree_ = 0;
  int input_dim_ = 0;
  bool include_intercept_ = true;
  bool include_interactions_ = true;
  Standardizer standardizer_;
  std::vector<bool> binary_;
  std::vector<Term> terms_;
};

// Closed-form output dimension for inputs with no binary coordinates.
int basis_output_dim(BasisKind kind, int degree, int input_dim, bool include_interactions = true);

Eigen::VectorXd eval_basis(const BasisSpec& spec, const Eigen::VectorXd& point);

// Row i is eval_basis(spec, points.row(i)).
Eigen::MatrixXd design_matrix(const BasisSpec& spec, const Eigen::MatrixXd& points);

// Builds a spec from training points: standardizer fitted on the points,
// {0,1}-valued columns marked binary and left unstandardized.
BasisSpec make_basis(const BasisConfig& config, const Eigen::MatrixXd& training_points);

}  // namespace shadowmed
