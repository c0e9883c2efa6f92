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

#include "shadowmed/baselines.hpp"

#include "shadowmed/error.hpp"
#include "shadowmed/stats.hpp"

#include <cmath>
#include <random>

namespace shadowmed {

const char* to_string(Method method) {
  switch (method) {
    case Method::Sri: return "sri";
    case Method::Oracle: return "oracle";
    case Method::Cca: return "cca";
    case Method::Mi: return "mi";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "sri") return Method::Sri;
  if (text == "oracle") return Method::Oracle;
  if (text == "cca") return Method::Cca;
  if (text == "mi") return Method::Mi;
  throw Error(ErrorCode::ConfigError, "unknown method '" + text + "' (expected sri, oracle, cca, mi)");
}

AnalysisResult oracle_estimate(const Dataset& full, const std::vector<Estimand>& estimands,
                               const AnalysisSettings& settings) {
  std::vector<ObservedRecord> records = full.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].x_miss)
      throw Error(ErrorCode::MissingTrueX, "record " + std::to_string(i) + " has no true covariate value");
    records[i].r = 1;
  }
  const Dataset completed(std::move(records), full.dims(), full.names());
  validate(completed);
  AnalysisResult result = analyze_with_gamma(completed, GammaModel::zero(), estimands, settings);
  result.method = "oracle";
  return result;
}

AnalysisResult cca_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                            const AnalysisSettings& settings) {
  validate(dataset);
  const Dataset complete = complete_cases(dataset);
  AnalysisResult result = analyze_with_gamma(complete, GammaModel::zero(), estimands, settings);
  result.method = "cca";
  return result;
}

namespace {

Eigen::VectorXd imputation_predictors(const ObservedRecord& rec) {
  const Eigen::VectorXd m = mediator_prefix(rec, static_cast<int>(rec.m.size()));
  Eigen::VectorXd out(1 + rec.z.size() + rec.x_obs.size() + 1 + m.size() + 1);
  out << 1.0, rec.z, rec.x_obs, static_cast<double>(rec.a), m, rec.y;
  return out;
}

}  // namespace

std::vector<Dataset> mi_impute(const Dataset& dataset, const MiOptions& options) {
  if (options.m < 2) throw Error(ErrorCode::ConfigError, "mi.m must be at least 2");
  if (!(options.noise_scale >= 0.0)) throw Error(ErrorCode::ConfigError, "mi noise scale must be >= 0");
  validate(dataset);
  const int dx = dataset.dims().x_miss;
  const Eigen::Index p = imputation_predictors(dataset[0]).size();
  const auto nc = static_cast<Eigen::Index>(dataset.complete_count());
  if (nc < p + 1)
    throw Error(ErrorCode::InsufficientCompleteCases,
                "imputation model needs at least " + std::to_string(p + 1) + " complete cases");

  Eigen::MatrixXd design(nc, p);
  Eigen::MatrixXd targets(nc, dx);
  Eigen::Index row = 0;
  for (const auto& rec : dataset.records()) {
    if (rec.r != 1) continue;
    design.row(row) = imputation_predictors(rec).transpose();
    targets.row(row) = rec.x_miss->transpose();
    ++row;
  }
  Eigen::MatrixXd coef(p, dx);
  Eigen::VectorXd sd(dx);
  for (int j = 0; j < dx; ++j) {
    const Eigen::VectorXd tj = targets.col(j);
    coef.col(j) = weighted_least_squares(design, tj).coef;
    const double rss = (tj - design * coef.col(j)).squaredNorm();
    sd(j) = std::sqrt(rss / static_cast<double>(nc - p));
  }

  std::vector<Dataset> completed;
  completed.reserve(static_cast<std::size_t>(options.m));
  for (int imp = 0; imp < options.m; ++imp) {
    std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(imp)));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<ObservedRecord> records = dataset.records();
    for (auto& rec : records) {
      if (rec.r == 1) continue;
      const Eigen::VectorXd mean = coef.transpose() * imputation_predictors(rec);
      Eigen::VectorXd draw(dx);
      for (int j = 0; j < dx; ++j) draw(j) = mean(j) + options.noise_scale * sd(j) * noise(rng);
      rec.x_miss = draw;
      rec.r = 1;
    }
    completed.emplace_back(std::move(records), dataset.dims(), dataset.names());
  }
  return completed;
}

namespace {

InferenceReport pool(const std::vector<const InferenceReport*>& parts, double level) {
  const double m = static_cast<double>(parts.size());
  InferenceReport out;
  out.level = level;
  out.n = parts.front()->n;
  double qbar = 0.0, wbar = 0.0;
  for (const auto* p : parts) {
    qbar += p->estimate;
    wbar += p->se * p->se;
  }
  qbar /= m;
  wbar /= m;
  double between = 0.0;
  for (const auto* p : parts) between += (p->estimate - qbar) * (p->estimate - qbar);
  between /= (m - 1.0);
  const double total = wbar + (1.0 + 1.0 / m) * between;
  out.estimate = qbar;
  out.se = std::sqrt(total);
  out.sigma2 = total * static_cast<double>(out.n);
  const double z = z_critical(level);
  out.ci_lo = qbar - z * out.se;
  out.ci_hi = qbar + z * out.se;
  out.diagnostics["rubin_within"] = wbar;
  out.diagnostics["rubin_between"] = between;
  return out;
}

}  // namespace

AnalysisResult mi_estimate(const Dataset& dataset, const std::vector<Estimand>& estimands,
                           const AnalysisSettings& settings, const MiOptions& options) {
  const std::vector<Dataset> completed = mi_impute(dataset, options);
  std::vector<AnalysisResult> runs;
  runs.reserve(completed.size());
  for (const auto& d : completed) runs.push_back(analyze_with_gamma(d, GammaModel::zero(), estimands, settings));

  AnalysisResult result;
  result.method = "mi";
  result.n_used = dataset.size();
  for (std::size_t e = 0; e < estimands.size(); ++e) {
    std::vector<const InferenceReport*> parts;
    for (const auto& run : runs) parts.push_back(&run.estimands[e].report);
    result.estimands.push_back({estimands[e], pool(parts, settings.level)});
  }
  for (std::size_t p = 0; p < runs.front().profiles.size(); ++p) {
    std::vector<const InferenceReport*> parts;
    for (const auto& run : runs) parts.push_back(&run.profiles[p].report);
    result.profiles.push_back({runs.front().profiles[p].profile, pool(parts, settings.level)});
  }
  return result;
}

}  // namespace shadowmed
