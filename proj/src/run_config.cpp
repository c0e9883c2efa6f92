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

#include "shadowmed/run_config.hpp"

#include "shadowmed/error.hpp"
#include "shadowmed/io.hpp"
#include "shadowmed/stats.hpp"

#include "json.hpp"

#include <filesystem>
#include <set>
#include <utility>

namespace shadowmed {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Estimate: return "estimate";
    case Mode::Simulate: return "simulate";
    case Mode::Truth: return "truth";
    case Mode::Validate: return "validate";
  }
  return "estimate";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::Estimate, Mode::Simulate, Mode::Truth, Mode::Validate})
    if (text == to_string(m)) return m;
  throw Error(ErrorCode::ConfigError, "unknown mode '" + text + "'");
}

namespace {

// Structural coefficients addressable by name in the dgp block.
const std::vector<std::pair<const char*, double DgpConfig::*>>& dgp_fields() {
  static const std::vector<std::pair<const char*, double DgpConfig::*>> fields{
      {"alpha", &DgpConfig::alpha},     {"a0", &DgpConfig::a0},
      {"a_x1", &DgpConfig::a_x1},       {"a_x2", &DgpConfig::a_x2},
      {"a_x3", &DgpConfig::a_x3},       {"m1_0", &DgpConfig::m1_0},
      {"m1_a", &DgpConfig::m1_a},       {"m1_sin_x1", &DgpConfig::m1_sin_x1},
      {"m1_x1sq", &DgpConfig::m1_x1sq}, {"m1_x2", &DgpConfig::m1_x2},
      {"m1_x3", &DgpConfig::m1_x3},     {"m2_0", &DgpConfig::m2_0},
      {"m2_a", &DgpConfig::m2_a},       {"m2_x1", &DgpConfig::m2_x1},
      {"m2_x2sq", &DgpConfig::m2_x2sq}, {"m2_x3", &DgpConfig::m2_x3},
      {"m2_am1", &DgpConfig::m2_am1},   {"y0", &DgpConfig::y0},
      {"y_a", &DgpConfig::y_a},         {"y_m1", &DgpConfig::y_m1},
      {"y_m2", &DgpConfig::y_m2},       {"y_x1", &DgpConfig::y_x1},
      {"y_x1sq", &DgpConfig::y_x1sq},   {"y_sin_x2", &DgpConfig::y_sin_x2},
      {"y_x2sq", &DgpConfig::y_x2sq},   {"y_x3", &DgpConfig::y_x3},
      {"y_am1", &DgpConfig::y_am1},     {"y_am2", &DgpConfig::y_am2},
      {"r0", &DgpConfig::r0},           {"r_x1", &DgpConfig::r_x1},
      {"r_x2", &DgpConfig::r_x2},       {"r_x3", &DgpConfig::r_x3},
      {"r_ae3", &DgpConfig::r_ae3},     {"r_ae4", &DgpConfig::r_ae4},
      {"r_e5", &DgpConfig::r_e5},
  };
  return fields;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw Error(ErrorCode::ConfigError, "unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void take(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

BasisConfig parse_basis(const json& j, BasisConfig base, const std::string& where) {
  reject_unknown(j, {"kind", "degree", "include_interactions"}, where);
  if (j.contains("kind")) base.kind = parse_basis_kind(j.at("kind").get<std::string>());
  take(j, "degree", base.degree);
  take(j, "include_interactions", base.include_interactions);
  if (base.degree < 0) throw Error(ErrorCode::ConfigError, where + ".degree must be >= 0");
  return base;
}

ordered_json basis_to_json(const BasisConfig& b) {
  ordered_json j;
  j["kind"] = to_string(b.kind);
  j["degree"] = b.degree;
  j["include_interactions"] = b.include_interactions;
  return j;
}

std::vector<Method> parse_methods(const json& j) {
  std::vector<Method> methods;
  for (const auto& item : j) {
    const Method m = parse_method(item.get<std::string>());
    for (Method seen : methods)
      if (seen == m) throw Error(ErrorCode::ConfigError, "duplicate method in simulate.methods");
    methods.push_back(m);
  }
  if (methods.empty()) throw Error(ErrorCode::ConfigError, "simulate.methods is empty");
  return methods;
}

void parse_into(const json& j, RunConfig& c) {
  reject_unknown(j,
                 {"mode", "data", "descriptor", "method", "estimand", "estimands", "profile_a", "profile_b",
                  "basis_mu", "basis_q", "basis_p", "gamma", "mi", "level", "seed", "threads", "out",
                  "simulate", "truth", "version"},
                 "config");
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  take(j, "data", c.data);
  take(j, "descriptor", c.descriptor);
  if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("estimand") && j.contains("estimands"))
    throw Error(ErrorCode::ConfigError, "use either estimand or estimands, not both");
  if (j.contains("estimand")) c.estimands = {j.at("estimand").get<std::string>()};
  if (j.contains("estimands")) c.estimands = j.at("estimands").get<std::vector<std::string>>();
  if (j.contains("profile_a"))
    c.profile_a = j.at("profile_a").is_null() ? std::nullopt
                                              : std::optional<std::string>(j.at("profile_a").get<std::string>());
  if (j.contains("profile_b"))
    c.profile_b = j.at("profile_b").is_null() ? std::nullopt
                                              : std::optional<std::string>(j.at("profile_b").get<std::string>());
  if (j.contains("basis_mu")) c.analysis.mu_basis = parse_basis(j.at("basis_mu"), c.analysis.mu_basis, "basis_mu");
  if (j.contains("basis_q")) c.analysis.q_basis = parse_basis(j.at("basis_q"), c.analysis.q_basis, "basis_q");
  if (j.contains("basis_p")) c.analysis.p_basis = parse_basis(j.at("basis_p"), c.analysis.p_basis, "basis_p");
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    reject_unknown(g, {"max_iter", "grad_tol", "linear_cap", "restarts"}, "gamma");
    take(g, "max_iter", c.analysis.gamma.max_iter);
    take(g, "grad_tol", c.analysis.gamma.grad_tol);
    take(g, "linear_cap", c.analysis.gamma.linear_cap);
    take(g, "restarts", c.analysis.gamma.restarts);
  }
  if (j.contains("mi")) {
    const json& m = j.at("mi");
    reject_unknown(m, {"m", "noise_scale"}, "mi");
    take(m, "m", c.mi.m);
    take(m, "noise_scale", c.mi.noise_scale);
  }
  take(j, "level", c.analysis.level);
  take(j, "seed", c.seed);
  take(j, "threads", c.threads);
  take(j, "out", c.out);
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    reject_unknown(s, {"n", "reps", "methods", "dgp"}, "simulate");
    take(s, "n", c.simulate.n);
    take(s, "reps", c.simulate.reps);
    if (s.contains("methods")) c.simulate.methods = parse_methods(s.at("methods"));
    if (s.contains("dgp")) {
      const json& d = s.at("dgp");
      std::set<std::string> names;
      for (const auto& [name, member] : dgp_fields()) names.insert(name);
      reject_unknown(d, names, "simulate.dgp");
      for (const auto& [name, member] : dgp_fields()) take(d, name, c.simulate.dgp.*member);
    }
  }
  if (j.contains("truth")) {
    const json& t = j.at("truth");
    reject_unknown(t, {"big_n", "seed"}, "truth");
    take(t, "big_n", c.truth.big_n);
    take(t, "seed", c.truth.seed);
  }
}

// Upper bound on a basis size given its input layout; binary columns can
// only shrink it, so comparing bounds on equal footing is conservative.
int bound(const BasisConfig& b, int input_dim) {
  return basis_output_dim(b.kind, b.degree, input_dim, b.include_interactions);
}

void check_sieve_sizes(const Dims& dims, const AnalysisSettings& s) {
  const int mtot = dims.mediators_through(dims.k());
  const int q_in = dims.x_miss + dims.x_obs + 1 + mtot + 1;
  const int p_in = dims.z + dims.x_obs + 1 + mtot + 1;
  if (bound(s.p_basis, p_in) < bound(s.q_basis, q_in))
    throw Error(ErrorCode::ConfigError, "conditioning basis (" + std::to_string(bound(s.p_basis, p_in)) +
                                            " terms) is smaller than the odds-function basis (" +
                                            std::to_string(bound(s.q_basis, q_in)) + " terms)");
}

Dims descriptor_dims(const std::string& path) {
  Dims dims;
  try {
    const json d = json::parse(read_text_file(path));
    dims.z = static_cast<int>(d.value("z", std::vector<std::string>{}).size());
    dims.x_miss = static_cast<int>(d.value("x_miss", std::vector<std::string>{}).size());
    dims.x_obs = static_cast<int>(d.value("x_obs", std::vector<std::string>{}).size());
    for (const auto& block : d.at("m")) dims.m.push_back(static_cast<int>(block.size()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "bad descriptor '" + path + "': " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return dims;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig config;
  if (json_text.find_first_not_of(" \t\r\n") == std::string::npos) return config;
  try {
    parse_into(json::parse(json_text), config);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  return config;
}

void check_run_config(const RunConfig& c, const Dims* dataset_dims) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (!(c.analysis.level > 0.0 && c.analysis.level < 1.0)) fail("level must lie in (0, 1)");
  if (c.threads < 1) fail("threads must be >= 1");
  if (c.mi.m < 2) fail("mi.m must be >= 2");
  if (!(c.mi.noise_scale >= 0.0)) fail("mi.noise_scale must be >= 0");
  const GammaOptions& g = c.analysis.gamma;
  if (g.max_iter < 1 || g.restarts < 1) fail("gamma.max_iter and gamma.restarts must be >= 1");
  if (!(g.grad_tol > 0.0) || !(g.linear_cap > 1.0)) fail("gamma.grad_tol must be > 0 and gamma.linear_cap > 1");
  if ((c.profile_b && !c.profile_a)) fail("profile_b requires profile_a");
  if (c.profile_a) TreatmentProfile::parse(*c.profile_a);
  if (c.profile_b) TreatmentProfile::parse(*c.profile_b);
  if (c.estimands.empty() && !c.profile_a) fail("no estimand requested");

  switch (c.mode) {
    case Mode::Estimate:
    case Mode::Validate: {
      if (dataset_dims) {
        if (c.mode == Mode::Estimate && c.method == Method::Sri) check_sieve_sizes(*dataset_dims, c.analysis);
        break;
      }
      if (c.data.empty()) fail("data path is required");
      if (c.descriptor.empty()) fail("descriptor path is required");
      if (!std::filesystem::exists(c.data)) fail("data file not found: " + c.data);
      if (!std::filesystem::exists(c.descriptor)) fail("descriptor file not found: " + c.descriptor);
      if (c.mode == Mode::Estimate && c.method == Method::Sri)
        check_sieve_sizes(descriptor_dims(c.descriptor), c.analysis);
      break;
    }
    case Mode::Simulate: {
      if (c.simulate.n < 2) fail("simulate.n must be >= 2");
      if (c.simulate.reps < 1) fail("simulate.reps must be >= 1");
      if (!(c.simulate.dgp.alpha > 0.0 && c.simulate.dgp.alpha <= 1.0)) fail("dgp.alpha must lie in (0, 1]");
      if (c.truth.big_n < 100000) fail("truth.big_n must be >= 100000");
      bool sri = false;
      for (Method m : c.simulate.methods) sri = sri || m == Method::Sri;
      if (sri) {
        Dims dims;
        dims.z = 1;
        dims.x_miss = 1;
        dims.x_obs = 2;
        dims.m = {1, 1};
        check_sieve_sizes(dims, c.analysis);
      }
      break;
    }
    case Mode::Truth:
      if (!(c.simulate.dgp.alpha > 0.0 && c.simulate.dgp.alpha <= 1.0)) fail("dgp.alpha must lie in (0, 1]");
      if (c.truth.big_n < 100000) fail("truth.big_n must be >= 100000");
      break;
  }
}

std::string run_config_json(const RunConfig& c) {
  ordered_json j;
  j["mode"] = to_string(c.mode);
  j["data"] = c.data;
  j["descriptor"] = c.descriptor;
  j["method"] = to_string(c.method);
  j["estimands"] = c.estimands;
  j["profile_a"] = c.profile_a ? ordered_json(*c.profile_a) : ordered_json(nullptr);
  j["profile_b"] = c.profile_b ? ordered_json(*c.profile_b) : ordered_json(nullptr);
  j["basis_mu"] = basis_to_json(c.analysis.mu_basis);
  j["basis_q"] = basis_to_json(c.analysis.q_basis);
  j["basis_p"] = basis_to_json(c.analysis.p_basis);
  j["gamma"] = {{"max_iter", c.analysis.gamma.max_iter},
                {"grad_tol", c.analysis.gamma.grad_tol},
                {"linear_cap", c.analysis.gamma.linear_cap},
                {"restarts", c.analysis.gamma.restarts}};
  j["mi"] = {{"m", c.mi.m}, {"noise_scale", c.mi.noise_scale}};
  j["level"] = c.analysis.level;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  ordered_json dgp;
  for (const auto& [name, member] : dgp_fields()) dgp[name] = c.simulate.dgp.*member;
  ordered_json methods = ordered_json::array();
  for (Method m : c.simulate.methods) methods.push_back(to_string(m));
  j["simulate"] = {{"n", c.simulate.n}, {"reps", c.simulate.reps}, {"methods", methods}, {"dgp", dgp}};
  j["truth"] = {{"big_n", c.truth.big_n}, {"seed", c.truth.seed}};
  return j.dump(2) + "\n";
}

std::vector<Estimand> resolve_estimands(const RunConfig& c, int k) {
  auto checked = [k](const std::string& text) {
    TreatmentProfile p = TreatmentProfile::parse(text);
    if (p.k() != k)
      throw Error(ErrorCode::ConfigError, "profile '" + text + "' needs " + std::to_string(k + 1) + " entries");
    return p;
  };
  if (c.profile_a) {
    Estimand e;
    e.plus = checked(*c.profile_a);
    if (c.profile_b) {
      e.minus = checked(*c.profile_b);
      e.name = "psi(" + e.plus.label() + ")-psi(" + e.minus->label() + ")";
    } else {
      e.name = "psi(" + e.plus.label() + ")";
    }
    return {e};
  }
  std::vector<Estimand> out;
  for (const auto& name : c.estimands) {
    for (auto& e : parse_estimands(name, k)) {
      bool dup = false;
      for (const auto& seen : out) dup = dup || seen.name == e.name;
      if (!dup) out.push_back(std::move(e));
    }
  }
  return out;
}

AnalysisResult run_method(const RunConfig& c, const Dataset& dataset, const std::vector<Estimand>& estimands) {
  AnalysisSettings settings = c.analysis;
  settings.gamma.seed = derive_seed(c.seed, 0x47);
  switch (c.method) {
    case Method::Sri:
      return sri_estimate(dataset, estimands, settings);
    case Method::Oracle:
      return oracle_estimate(dataset, estimands, settings);
    case Method::Cca:
      return cca_estimate(dataset, estimands, settings);
    case Method::Mi: {
      MiOptions mi = c.mi;
      mi.seed = derive_seed(c.seed, 0x4D49);
      return mi_estimate(dataset, estimands, settings, mi);
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown method");
}

TruthTable run_truth(const RunConfig& c) { return true_effects(c.simulate.dgp, c.truth.big_n, c.truth.seed); }

McResult run_simulation(const RunConfig& c, const TruthTable& truth) {
  McOptions options;
  options.reps = c.simulate.reps;
  options.n = c.simulate.n;
  options.methods = c.simulate.methods;
  options.master_seed = c.seed;
  options.threads = c.threads;
  options.settings = c.analysis;
  options.mi = c.mi;
  return run_monte_carlo(c.simulate.dgp, options, truth.effects);
}

}  // namespace shadowmed
