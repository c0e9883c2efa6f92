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

#include "shadowmed/sieve_basis.hpp"

#include "shadowmed/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shadowmed {

Standardizer Standardizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Standardizer fit_standardizer(const Eigen::MatrixXd& points) {
  if (points.rows() < 2) throw Error(ErrorCode::DimensionMismatch, "standardizer needs >= 2 rows");
  if (!points.allFinite()) throw Error(ErrorCode::NonFiniteInput, "standardizer input");
  const double n = static_cast<double>(points.rows());
  Standardizer s;
  s.center = points.colwise().mean().transpose();
  s.scale.resize(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double var = (points.col(j).array() - s.center(j)).square().sum() / n;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

const char* to_string(BasisKind kind) {
  return kind == BasisKind::Power ? "power" : "tensor_power";
}

BasisKind parse_basis_kind(const std::string& text) {
  if (text == "power") return BasisKind::Power;
  if (text == "tensor_power") return BasisKind::TensorPower;
  throw Error(ErrorCode::ConfigError, "unknown basis kind '" + text + "'");
}

BasisSpec BasisSpec::power(int input_dim, int degree, Standardizer standardizer,
                           std::vector<bool> binary, bool include_interactions,
                           bool include_intercept) {
  BasisSpec spec;
  spec.init(BasisKind::Power, input_dim, degree, std::move(standardizer), std::move(binary),
            include_interactions, include_intercept);
  return spec;
}

BasisSpec BasisSpec::tensor_power(int input_dim, int degree, Standardizer standardizer,
                                  std::vector<bool> binary, bool include_intercept) {
  BasisSpec spec;
  spec.init(BasisKind::TensorPower, input_dim, degree, std::move(standardizer), std::move(binary),
            false, include_intercept);
  return spec;
}

void BasisSpec::init(BasisKind kind, int input_dim, int degree, Standardizer standardizer,
                     std::vector<bool> binary, bool include_interactions, bool include_intercept) {
  if (input_dim < 1) throw Error(ErrorCode::ConfigError, "basis input_dim must be >= 1");
  if (degree < 0) throw Error(ErrorCode::ConfigError, "basis degree must be >= 0");
  if (standardizer.center.size() == 0) standardizer = Standardizer::identity(input_dim);
  if (standardizer.center.size() != input_dim || standardizer.scale.size() != input_dim)
    throw Error(ErrorCode::DimensionMismatch, "standardizer width differs from input_dim");
  if ((standardizer.scale.array() <= 0.0).any())
    throw Error(ErrorCode::ConfigError, "standardizer scales must be positive");
  if (binary.empty()) binary.assign(static_cast<std::size_t>(input_dim), false);
  if (static_cast<int>(binary.size()) != input_dim)
    throw Error(ErrorCode::DimensionMismatch, "binary mask width differs from input_dim");

  kind_ = kind;
  input_dim_ = input_dim;
  degree_ = degree;
  standardizer_ = std::move(standardizer);
  binary_ = std::move(binary);
  include_interactions_ = include_interactions;
  include_intercept_ = include_intercept;
  terms_.clear();

  auto cap = [&](int j) { return binary_[static_cast<std::size_t>(j)] ? std::min(1, degree) : degree; };

  if (kind == BasisKind::Power) {
    if (include_intercept) terms_.push_back({});
    for (int j = 0; j < input_dim; ++j)
      for (int p = 1; p <= cap(j); ++p) terms_.push_back({{j, p}});
    if (include_interactions && degree >= 1)
      for (int i = 0; i < input_dim; ++i)
        for (int j = i + 1; j < input_dim; ++j) terms_.push_back({{i, 1}, {j, 1}});
    return;
  }

  // Tensor product: enumerate exponent vectors, then order.
  std::vector<std::vector<int>> exps{{}};
  for (int j = 0; j < input_dim; ++j) {
    std::vector<std::vector<int>> next;
    for (const auto& e : exps)
      for (int p = 0; p <= cap(j); ++p) {
        auto grown = e;
        grown.push_back(p);
        next.push_back(std::move(grown));
      }
    exps = std::move(next);
  }
  auto total = [](const std::vector<int>& e) {
    int s = 0;
    for (int v : e) s += v;
    return s;
  };
  std::stable_sort(exps.begin(), exps.end(), [&](const auto& a, const auto& b) {
    const int ta = total(a), tb = total(b);
    if (ta != tb) return ta < tb;
    return a > b;
  });
  for (const auto& e : exps) {
    if (total(e) == 0 && !include_intercept) continue;
    Term term;
    for (int j = 0; j < input_dim; ++j)
      if (e[static_cast<std::size_t>(j)] > 0) term.emplace_back(j, e[static_cast<std::size_t>(j)]);
    terms_.push_back(std::move(term));
  }
}

void BasisSpec::eval_standardized(const Eigen::Ref<const Eigen::VectorXd>& z,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    double v = 1.0;
    for (const auto& [coord, power] : terms_[t]) {
      const double base = z(coord);
      double pw = base;
      for (int p = 1; p < power; ++p) pw *= base;
      v *= pw;
    }
    out(static_cast<Eigen::Index>(t)) = v;
  }
}

int basis_output_dim(BasisKind kind, int degree, int input_dim, bool include_interactions) {
  if (kind == BasisKind::Power) {
    int dim = 1 + input_dim * degree;
    if (include_interactions && degree >= 1) dim += input_dim * (input_dim - 1) / 2;
    return dim;
  }
  int dim = 1;
  for (int j = 0; j < input_dim; ++j) dim *= degree + 1;
  return dim;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, const Eigen::VectorXd& point) {
  if (point.size() != spec.input_dim()) {
    std::ostringstream os;
    os << "basis expects " << spec.input_dim() << " inputs, got " << point.size();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  if (!point.allFinite()) throw Error(ErrorCode::NonFiniteInput, "basis input");
  Eigen::VectorXd out(spec.output_dim());
  spec.eval_standardized(spec.standardizer().apply(point), out);
  return out;
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, const Eigen::MatrixXd& points) {
  if (points.cols() != spec.input_dim()) {
    std::ostringstream os;
    os << "basis expects " << spec.input_dim() << " inputs, got " << points.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  Eigen::MatrixXd out(points.rows(), spec.output_dim());
  Eigen::VectorXd row(spec.output_dim());
  const auto& st = spec.standardizer();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::VectorXd x = points.row(i).transpose();
    if (!x.allFinite())
      throw Error(ErrorCode::NonFiniteInput, "basis input at row " + std::to_string(i));
    spec.eval_standardized(st.apply(x), row);
    out.row(i) = row.transpose();
  }
  return out;
}

BasisSpec make_basis(const BasisConfig& config, const Eigen::MatrixXd& training_points) {
  const int dim = static_cast<int>(training_points.cols());
  Standardizer st = fit_standardizer(training_points);
  std::vector<bool> binary(static_cast<std::size_t>(dim), false);
  for (int j = 0; j < dim; ++j) {
    const auto col = training_points.col(j).array();
    if (((col == 0.0) || (col == 1.0)).all()) {
      binary[static_cast<std::size_t>(j)] = true;
      st.center(j) = 0.0;
      st.scale(j) = 1.0;
    }
  }
  if (config.kind == BasisKind::Power)
    return BasisSpec::power(dim, config.degree, std::move(st), std::move(binary),
                            config.include_interactions);
  return BasisSpec::tensor_power(dim, config.degree, std::move(st), std::move(binary));
}

}  // namespace shadowmed
