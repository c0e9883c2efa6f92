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

#include "shadowmed/report.hpp"

#include "shadowmed/format.hpp"

#include "json.hpp"

#include <sstream>

namespace shadowmed {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json inference_json(const InferenceReport& r) {
  ordered_json j;
  j["psi_hat"] = r.estimate;
  j["sigma2"] = r.sigma2;
  j["se"] = r.se;
  j["ci_lo"] = r.ci_lo;
  j["ci_hi"] = r.ci_hi;
  j["level"] = r.level;
  j["n"] = r.n;
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j;
}

ordered_json gamma_json(const AnalysisResult& res) {
  ordered_json j;
  j["zero"] = res.gamma_zero;
  if (res.gamma_zero) return j;
  const GammaFitReport& g = res.gamma_report;
  j["q_n"] = g.q_n_value;
  j["grad_norm"] = g.grad_norm;
  j["iterations"] = g.iterations;
  j["converged"] = g.converged;
  j["best_start"] = g.best_start;
  j["start_q_n"] = g.start_q_n;
  j["projection_ridge"] = g.projection_ridge;
  j["clamp_events"] = g.clamp_events;
  return j;
}

ordered_json cell_json(const McCell& c) {
  ordered_json j;
  j["bias"] = c.bias;
  j["se"] = c.se;
  j["cp"] = c.cp;
  j["mean_estimate"] = c.mean_estimate;
  j["mean_se_hat"] = c.mean_se_hat;
  j["mcse_bias"] = c.mcse_bias;
  j["mcse_cp"] = c.mcse_cp;
  j["n_ok"] = c.n_ok;
  j["se_defined"] = c.se_defined;
  return j;
}

}  // namespace

std::string analysis_json(const AnalysisResult& res) {
  ordered_json j;
  j["method"] = res.method;
  j["n_used"] = res.n_used;
  ordered_json estimands = ordered_json::array();
  for (const auto& e : res.estimands) {
    ordered_json item;
    item["name"] = e.estimand.name;
    item["plus"] = e.estimand.plus.label();
    item["minus"] = e.estimand.minus ? ordered_json(e.estimand.minus->label()) : ordered_json(nullptr);
    item.update(inference_json(e.report));
    estimands.push_back(item);
  }
  j["estimands"] = estimands;
  ordered_json profiles = ordered_json::array();
  for (const auto& p : res.profiles) {
    ordered_json item;
    item["profile"] = p.profile.label();
    item.update(inference_json(p.report));
    profiles.push_back(item);
  }
  j["profiles"] = profiles;
  j["gamma"] = gamma_json(res);
  j["warnings"] = res.warnings;
  return j.dump(2) + "\n";
}

std::string analysis_csv(const AnalysisResult& res) {
  std::ostringstream os;
  os << "estimand,plus,minus,estimate,se,ci_lo,ci_hi\n";
  for (const auto& e : res.estimands) {
    os << e.estimand.name << ',' << e.estimand.plus.label() << ','
       << (e.estimand.minus ? e.estimand.minus->label() : std::string()) << ',' << format_double(e.report.estimate)
       << ',' << format_double(e.report.se) << ',' << format_double(e.report.ci_lo) << ','
       << format_double(e.report.ci_hi) << '\n';
  }
  return os.str();
}

std::string validation_json(const ValidationReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["n_complete"] = r.n_complete;
  j["miss_frac"] = r.miss_frac;
  j["arm_counts"] = r.arm_counts;
  j["complete_arm_counts"] = r.complete_arm_counts;
  j["dims_consistent"] = r.dims_consistent;
  j["flags"] = r.flags;
  return j.dump(2) + "\n";
}

std::string truth_json(const TruthTable& t) {
  ordered_json j;
  j["draws"] = t.draws;
  ordered_json psi = ordered_json::object(), psi_mcse = ordered_json::object();
  for (const auto& [p, v] : t.psi) psi[p.label()] = v;
  for (const auto& [p, v] : t.psi_mcse) psi_mcse[p.label()] = v;
  j["psi"] = psi;
  j["psi_mcse"] = psi_mcse;
  ordered_json eff = ordered_json::object(), eff_mcse = ordered_json::object();
  for (const auto& name : {"NDE", "NIE1", "NIE2", "TE"}) {
    if (t.effects.count(name)) eff[name] = t.effects.at(name);
    if (t.effects_mcse.count(name)) eff_mcse[name] = t.effects_mcse.at(name);
  }
  j["effects"] = eff;
  j["effects_mcse"] = eff_mcse;
  j["te_direct"] = t.te_direct;
  j["te_direct_mcse"] = t.te_direct_mcse;
  return j.dump(2) + "\n";
}

std::string mc_summary_json(const McResult& r) {
  ordered_json j;
  j["reps"] = r.reps;
  j["n"] = r.n;
  j["master_seed"] = r.master_seed;
  j["methods"] = r.methods;
  j["estimands"] = r.estimands;
  ordered_json truth = ordered_json::object();
  for (const auto& e : r.estimands)
    if (r.truth.count(e)) truth[e] = r.truth.at(e);
  j["truth"] = truth;
  ordered_json cells = ordered_json::object();
  for (const auto& m : r.methods) {
    ordered_json per = ordered_json::object();
    if (r.cells.count(m))
      for (const auto& e : r.estimands)
        if (r.cells.at(m).count(e)) per[e] = cell_json(r.cells.at(m).at(e));
    cells[m] = per;
  }
  j["cells"] = cells;
  ordered_json failures = ordered_json::object();
  for (const auto& m : r.methods) failures[m] = r.failures.count(m) ? r.failures.at(m) : 0;
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

}  // namespace shadowmed
