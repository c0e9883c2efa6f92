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

// Command-line front end over the shadowmed C API.

#include "shadowmed/shadowmed.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> data, descriptor, method, profile_a, profile_b, out;
  std::vector<std::string> estimands;
  std::optional<unsigned long long> seed;
  std::optional<int> reps, n, threads, mi_m;
  std::optional<double> level;
};

int exit_code(sm_status status) {
  switch (status) {
    case SM_OK: return 0;
    case SM_ERR_ARGUMENT:
    case SM_ERR_CONFIG: return 2;
    case SM_ERR_DATA: return 3;
    case SM_ERR_SOLVER: return 4;
    default: return 1;
  }
}

int report_failure(sm_status status) {
  std::cerr << "shadowmed: " << sm_last_error() << "\n";
  return exit_code(status);
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  text = os.str();
  return true;
}

bool write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// Config file first, then flags on top.
std::optional<ordered_json> merged_config(const std::string& mode, const Flags& f) {
  ordered_json j = ordered_json::object();
  if (!f.config.empty()) {
    std::string text;
    if (!read_file(f.config, text)) {
      std::cerr << "shadowmed: cannot read config file: " << f.config << "\n";
      return std::nullopt;
    }
    try {
      j = ordered_json::parse(text);
    } catch (const std::exception& e) {
      std::cerr << "shadowmed: config file " << f.config << ": " << e.what() << "\n";
      return std::nullopt;
    }
    if (!j.is_object()) {
      std::cerr << "shadowmed: config file " << f.config << " must hold a JSON object\n";
      return std::nullopt;
    }
  }
  j["mode"] = mode;
  if (f.data) j["data"] = *f.data;
  if (f.descriptor) j["descriptor"] = *f.descriptor;
  if (f.method) j["method"] = *f.method;
  if (!f.estimands.empty()) {
    j.erase("estimand");
    j["estimands"] = f.estimands;
  }
  if (f.profile_a) j["profile_a"] = *f.profile_a;
  if (f.profile_b) j["profile_b"] = *f.profile_b;
  if (f.seed) j["seed"] = *f.seed;
  if (f.threads) j["threads"] = *f.threads;
  if (f.out) j["out"] = *f.out;
  if (f.level) j["level"] = *f.level;
  if (f.mi_m) j["mi"]["m"] = *f.mi_m;
  if (f.reps) j["simulate"]["reps"] = *f.reps;
  if (f.n) {
    if (mode == "truth")
      j["truth"]["big_n"] = *f.n;
    else
      j["simulate"]["n"] = *f.n;
  }
  return j;
}

class Report {
 public:
  ~Report() { sm_report_free(ptr); }
  sm_report* ptr = nullptr;
};

class DatasetHandle {
 public:
  ~DatasetHandle() { sm_dataset_free(ptr); }
  sm_dataset* ptr = nullptr;
};

int write_artifacts(const sm_report* report, const fs::path& dir) {
  for (size_t i = 0; i < sm_report_count(report); ++i) {
    const fs::path path = dir / sm_report_name(report, i);
    if (!write_file(path, sm_report_text(report, i))) {
      std::cerr << "shadowmed: cannot write " << path.string() << "\n";
      return 3;
    }
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int run(const std::string& mode, const Flags& flags) {
  const auto merged = merged_config(mode, flags);
  if (!merged) return 2;

  Report resolved;
  sm_status st = sm_config_resolve(merged->dump().c_str(), &resolved.ptr);
  if (st != SM_OK) return report_failure(st);
  const std::string config_text = sm_report_get(resolved.ptr, "config.json");
  const ordered_json config = ordered_json::parse(config_text);

  const fs::path out_dir = config.at("out").get<std::string>();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "shadowmed: cannot create output directory " << out_dir.string() << ": " << ec.message() << "\n";
    return 2;
  }
  if (!write_file(out_dir / "run_manifest.json", config_text)) {
    std::cerr << "shadowmed: cannot write run_manifest.json\n";
    return 3;
  }

  Report result;
  if (mode == "simulate") {
    st = sm_simulate(config_text.c_str(), &result.ptr);
  } else if (mode == "truth") {
    st = sm_truth(config_text.c_str(), &result.ptr);
  } else {
    DatasetHandle data;
    st = sm_dataset_load(config.at("data").get<std::string>().c_str(),
                         config.at("descriptor").get<std::string>().c_str(), &data.ptr);
    if (st != SM_OK) return report_failure(st);
    st = mode == "validate" ? sm_validate(data.ptr, &result.ptr)
                            : sm_estimate(data.ptr, config_text.c_str(), &result.ptr);
  }
  if (st != SM_OK) return report_failure(st);
  if (const int rc = write_artifacts(result.ptr, out_dir)) return rc;

  if (mode == "estimate") std::cout << sm_report_get(result.ptr, "estimates.csv");
  if (mode == "simulate") std::cout << sm_report_get(result.ptr, "table.csv");
  return 0;
}

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run config; flags override its values");
  cmd->add_option("--data", f.data, "dataset CSV");
  cmd->add_option("--descriptor", f.descriptor, "dataset descriptor JSON");
  cmd->add_option("--method", f.method, "sri, oracle, cca or mi");
  cmd->add_option("--estimand", f.estimands, "nde, nie<k>, te, pse_m2 or all (repeatable)");
  cmd->add_option("--profile-a", f.profile_a, "explicit treatment profile, e.g. 0,0,1");
  cmd->add_option("--profile-b", f.profile_b, "profile subtracted from --profile-a");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--reps", f.reps, "Monte-Carlo replications");
  cmd->add_option("--n", f.n, "sample size (simulate) or draw count (truth)");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--level", f.level, "confidence level");
  cmd->add_option("--mi-m", f.mi_m, "number of imputations");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-specific effects with a covariate missing not at random"};
  app.set_version_flag("--version", std::string(sm_version()));
  app.require_subcommand(1);

  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "summarize and check a dataset"},
      {"estimate", "estimate effects with confidence intervals"},
      {"simulate", "Monte-Carlo study of the simulation design"},
      {"truth", "true effects of the simulation design"},
  };
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run(app.get_subcommands().front()->get_name(), flags);
}
