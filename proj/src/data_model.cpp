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

#include "shadowmed/data_model.hpp"

#include "shadowmed/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace shadowmed {

int Dims::mediators_through(int k) const {
  int width = 0;
  for (int j = 0; j < k; ++j) width += m.at(static_cast<std::size_t>(j));
  return width;
}

namespace {

std::vector<std::string> numbered(const std::string& stem, int count) {
  std::vector<std::string> out;
  if (count == 1) {
    out.push_back(stem);
    return out;
  }
  for (int i = 1; i <= count; ++i) out.push_back(stem + "_" + std::to_string(i));
  return out;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

ColumnNames ColumnNames::defaults(const Dims& dims) {
  ColumnNames names;
  names.z = numbered("z", dims.z);
  for (int j = 1; j <= dims.x_miss; ++j) names.x_miss.push_back("x" + std::to_string(j));
  for (int j = 1; j <= dims.x_obs; ++j)
    names.x_obs.push_back("x" + std::to_string(dims.x_miss + j));
  for (int k = 1; k <= dims.k(); ++k)
    names.m.push_back(numbered("m" + std::to_string(k), dims.m[static_cast<std::size_t>(k - 1)]));
  return names;
}

std::vector<std::string> ColumnNames::header() const {
  std::vector<std::string> cols{"r"};
  cols.insert(cols.end(), z.begin(), z.end());
  cols.insert(cols.end(), x_miss.begin(), x_miss.end());
  cols.insert(cols.end(), x_obs.begin(), x_obs.end());
  cols.push_back("a");
  for (const auto& block : m) cols.insert(cols.end(), block.begin(), block.end());
  cols.push_back("y");
  return cols;
}

Dataset::Dataset(std::vector<ObservedRecord> records, Dims dims)
    : records_(std::move(records)), dims_(std::move(dims)), names_(ColumnNames::defaults(dims_)) {}

Dataset::Dataset(std::vector<ObservedRecord> records, Dims dims, ColumnNames names)
    : records_(std::move(records)), dims_(std::move(dims)), names_(std::move(names)) {}

std::size_t Dataset::complete_count() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.r == 1; }));
}

ValidationReport validate(const Dataset& dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no records");
  const Dims& dims = dataset.dims();
  if (dims.k() < 1) throw Error(ErrorCode::DimensionMismatch, "at least one mediator cluster required");
  if (dims.z < 1 || dims.x_miss < 1 || dims.x_obs < 0)
    throw Error(ErrorCode::DimensionMismatch, "z and x_miss need at least one column");

  ValidationReport report;
  report.n = dataset.size();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& rec = dataset[i];
    auto fail = [&](const std::string& why) {
      std::ostringstream os;
      os << "record " << i << ": " << why;
      throw Error(ErrorCode::DimensionMismatch, os.str());
    };
    if (rec.r != 0 && rec.r != 1) fail("r must be 0 or 1");
    if (rec.a != 0 && rec.a != 1) fail("a must be 0 or 1");
    if (rec.x_miss.has_value() != (rec.r == 1)) fail("x_miss must be present exactly when r = 1");
    if (rec.x_miss && rec.x_miss->size() != dims.x_miss) fail("x_miss width");
    if (rec.z.size() != dims.z) fail("z width");
    if (rec.x_obs.size() != dims.x_obs) fail("x_obs width");
    if (static_cast<int>(rec.m.size()) != dims.k()) fail("mediator cluster count");
    for (int k = 0; k < dims.k(); ++k)
      if (rec.m[static_cast<std::size_t>(k)].size() != dims.m[static_cast<std::size_t>(k)])
        fail("mediator " + std::to_string(k + 1) + " width");
    bool finite = all_finite(rec.z) && all_finite(rec.x_obs) && std::isfinite(rec.y) &&
                  (!rec.x_miss || all_finite(*rec.x_miss));
    for (const auto& m : rec.m) finite = finite && all_finite(m);
    if (!finite) throw Error(ErrorCode::NonFiniteInput, "record " + std::to_string(i));

    report.arm_counts[static_cast<std::size_t>(rec.a)]++;
    if (rec.r == 1) {
      report.n_complete++;
      report.complete_arm_counts[static_cast<std::size_t>(rec.a)]++;
    }
  }
  report.miss_frac = 1.0 - static_cast<double>(report.n_complete) / static_cast<double>(report.n);
  if (report.arm_counts[0] == 0) report.flags.emplace_back("empty_arm_a0");
  if (report.arm_counts[1] == 0) report.flags.emplace_back("empty_arm_a1");
  if (report.n_complete == 0) report.flags.emplace_back("all_missing");
  if (report.n_complete == report.n) report.flags.emplace_back("all_observed");
  return report;
}

Dataset complete_cases(const Dataset& dataset) {
  std::vector<ObservedRecord> kept;
  kept.reserve(dataset.size());
  for (const auto& rec : dataset.records())
    if (rec.r == 1) kept.push_back(rec);
  if (kept.empty()) throw Error(ErrorCode::EmptyResult, "no complete cases");
  return Dataset(std::move(kept), dataset.dims(), dataset.names());
}

Eigen::VectorXd covariate_vector(const ObservedRecord& record) {
  if (record.r != 1 || !record.x_miss)
    throw Error(ErrorCode::MissingCovariate, "covariates unavailable for r = 0 record");
  Eigen::VectorXd x(record.x_miss->size() + record.x_obs.size());
  x << *record.x_miss, record.x_obs;
  return x;
}

Eigen::VectorXd mediator_prefix(const ObservedRecord& record, int k) {
  Eigen::Index width = 0;
  for (int j = 0; j < k; ++j) width += record.m.at(static_cast<std::size_t>(j)).size();
  Eigen::VectorXd out(width);
  Eigen::Index pos = 0;
  for (int j = 0; j < k; ++j) {
    const auto& block = record.m[static_cast<std::size_t>(j)];
    out.segment(pos, block.size()) = block;
    pos += block.size();
  }
  return out;
}

TreatmentProfile::TreatmentProfile(std::vector<int> a) : a_(std::move(a)) {
  if (a_.size() < 2)
    throw Error(ErrorCode::ConfigError, "treatment profile needs K+1 >= 2 entries");
  for (int v : a_)
    if (v != 0 && v != 1) throw Error(ErrorCode::ConfigError, "treatment profile entries must be 0/1");
}

std::string TreatmentProfile::label() const {
  std::string s;
  for (int v : a_) s.push_back(v ? '1' : '0');
  return s;
}

TreatmentProfile TreatmentProfile::parse(const std::string& text) {
  std::vector<int> a;
  for (char c : text) {
    if (c == '0' || c == '1')
      a.push_back(c - '0');
    else if (c != ',' && c != ' ' && c != '(' && c != ')')
      throw Error(ErrorCode::ConfigError, "cannot parse treatment profile '" + text + "'");
  }
  return TreatmentProfile(std::move(a));
}

TreatmentProfile TreatmentProfile::constant(int k, int value) {
  return TreatmentProfile(std::vector<int>(static_cast<std::size_t>(k + 1), value));
}

TreatmentProfile TreatmentProfile::step(int k, int j, int lo, int hi) {
  std::vector<int> a(static_cast<std::size_t>(k + 1), hi);
  for (int i = 0; i < j && i < k + 1; ++i) a[static_cast<std::size_t>(i)] = lo;
  return TreatmentProfile(std::move(a));
}

}  // namespace shadowmed
