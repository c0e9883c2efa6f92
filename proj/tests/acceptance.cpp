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

// Reproduces the simulation table and checks the acceptance criteria.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include "helpers.hpp"

#include "shadowmed/baselines.hpp"
#include "shadowmed/gamma_solver.hpp"
#include "shadowmed/inference.hpp"
#include "shadowmed/shadowmed.h"
#include "shadowmed/simulation.hpp"
#include "shadowmed/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace shadowmed;

namespace {

const std::vector<std::string> kEstimands{"NDE", "NIE1", "NIE2", "TE"};

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %d %s: %s | %s\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_cells(const McResult& res, const std::string& method) {
  std::printf("  %-6s n=%d reps=%d failures=%d\n", method.c_str(), res.n, res.reps, res.failures.at(method));
  for (const char* metric : {"bias", "se", "cp", "se_hat"}) {
    std::printf("    %-7s", metric);
    for (const auto& e : kEstimands) {
      const McCell& c = res.cells.at(method).at(e);
      const std::string m = metric;
      const double v = m == "bias" ? c.bias : m == "se" ? c.se : m == "cp" ? c.cp : c.mean_se_hat;
      std::printf(" %9.4f", v);
    }
    std::printf("\n");
  }
}

McResult monte_carlo(const std::vector<Method>& methods, int n, int reps, std::uint64_t seed,
                     const std::map<std::string, double>& truth) {
  McOptions opt;
  opt.methods = methods;
  opt.n = n;
  opt.reps = reps;
  opt.master_seed = seed;
  opt.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  McResult res = run_monte_carlo(DgpConfig{}, opt, truth);
  std::printf("  (%d reps at n=%d in %.1fs)\n", reps, n, seconds_since(t0));
  return res;
}

// Table row check: bias within +/- bias_tol of a target (or |bias| bound),
// SE within a relative band of the target, CP inside [cp_lo, cp_hi].
struct RowCheck {
  bool ok = true;
  std::ostringstream detail;
};

void check_row(RowCheck& rc, const McResult& res, const std::string& method, const std::vector<double>& bias_target,
               double bias_tol, const std::vector<double>& se_target, double se_rel, double cp_lo, double cp_hi) {
  for (std::size_t i = 0; i < kEstimands.size(); ++i) {
    const McCell& c = res.cells.at(method).at(kEstimands[i]);
    const bool b = std::abs(c.bias - bias_target[i]) <= bias_tol;
    const bool s = c.se_defined && std::abs(c.se / se_target[i] - 1.0) <= se_rel;
    const bool p = c.cp >= cp_lo && c.cp <= cp_hi;
    rc.ok = rc.ok && b && s && p;
    rc.detail << kEstimands[i] << "(bias " << fmt(c.bias) << (b ? "" : "*") << ", se " << fmt(c.se)
              << (s ? "" : "*") << ", cp " << fmt(c.cp, 3) << (p ? "" : "*") << ") ";
  }
}

// ---- property suite -------------------------------------------------------

Dataset complete_only(const Dataset& d) {
  std::vector<ObservedRecord> recs;
  for (const auto& rec : d.records())
    if (rec.r == 1) recs.push_back(rec);
  return Dataset(std::move(recs), d.dims());
}

std::pair<bool, std::string> orthogonality_property() {
  double worst = 0.0;
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    const int k = 1 + static_cast<int>(seed % 3);
    const Dataset d = testutil::random_instance(seed, 120 + static_cast<int>(seed % 5) * 30, k, 0.3);
    const auto specs = default_mu_bases(d);
    const GammaModel gamma = GammaModel::fixed([](const Eigen::VectorXd& x) { return 0.4 + 0.2 * std::tanh(x(0)); });
    std::vector<int> levels(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j) levels[static_cast<std::size_t>(j)] = static_cast<int>((seed >> j) & 1u);
    const TreatmentProfile profile(levels);
    const NuisanceFits fits = fit_mu_chain(d, gamma, profile, specs);
    const OmegaFits om = fit_omegas(d, gamma, profile, specs);
    for (double o : fits.orthogonality) worst = std::max(worst, o);
    for (double o : om.moment_residual) worst = std::max(worst, o);
  }
  return {worst <= 1e-6, "max normal-equation residual " + sci(worst)};
}

std::pair<bool, std::string> gradient_property() {
  const Dataset d = testutil::random_instance(77, 300, 2, 0.35);
  const auto [q, p] = default_gamma_bases(d);
  const GammaCriterion crit(d, q, p, 10.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nrm(0.0, 0.5);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    Eigen::VectorXd pi(crit.num_params());
    for (Eigen::Index j = 0; j < pi.size(); ++j) pi(j) = nrm(rng);
    const Eigen::VectorXd g = crit.gradient(pi);
    Eigen::VectorXd fd(pi.size());
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(pi(j)));
      Eigen::VectorXd up = pi, dn = pi;
      up(j) += h;
      dn(j) -= h;
      fd(j) = (crit.value(up) - crit.value(dn)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  return {worst <= 1e-5, "max relative gradient error " + sci(worst)};
}

std::pair<bool, std::string> mcar_property() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ObservedRecord> recs;
  for (int i = 0; i < 5000; ++i) {
    const double x = nrm(rng), w = nrm(rng);
    const int a = unif(rng) < 0.5;
    const double m = 0.5 * a + x + nrm(rng), y = x + m + nrm(rng);
    const int r = unif(rng) < 0.7;
    recs.push_back(testutil::record(r, 0.7 * x + nrm(rng), r ? std::optional<double>(x) : std::nullopt, {w}, a,
                                    {m}, y));
  }
  const Dataset d(std::move(recs), testutil::dims(1, 1));
  const auto [q, p] = default_gamma_bases(d, {BasisKind::Power, 1, false});
  const auto [model, report] = fit_gamma(d, q, p);
  int close = 0, total = 0;
  for (const auto& rec : d.records())
    if (rec.r == 1) {
      ++total;
      close += std::abs(model.eval(rec) - 3.0 / 7.0) <= 0.05;
    }
  const double frac = static_cast<double>(close) / total;
  return {frac >= 0.9, "fraction within 0.05 of 3/7: " + fmt(frac, 3)};
}

std::pair<bool, std::string> decomposition_property() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = testutil::random_instance(500 + seed, 300, 2, 0.25);
    const GammaModel gamma = GammaModel::fixed([](const Eigen::VectorXd& x) { return 0.3 + 0.1 * x(0) * x(0); });
    PsiTable table(d, gamma, default_mu_bases(d));
    const double te = table.contrast(te_estimand(2));
    const double sum = table.contrast(nde_estimand(2)) + table.contrast(nie_estimand(2, 1)) +
                       table.contrast(nie_estimand(2, 2));
    worst = std::max(worst, std::abs(te - sum));
  }
  return {worst <= 1e-12, "max |TE - (NDE + NIE1 + NIE2)| " + sci(worst)};
}

std::pair<bool, std::string> full_data_property() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = complete_only(testutil::random_instance(600 + seed, 250, 2, 0.0));
    const auto est = parse_estimands("all", 2);
    const AnalysisResult a = sri_estimate(d, est), b = oracle_estimate(d, est), c = cca_estimate(d, est);
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double x = a.estimands[i].report.estimate;
      worst = std::max({worst, std::abs(x - b.estimands[i].report.estimate),
                        std::abs(x - c.estimands[i].report.estimate),
                        std::abs(a.estimands[i].report.se - b.estimands[i].report.se)});
    }
  }
  return {worst <= 1e-10, "max SRI/Oracle/CCA discrepancy " + sci(worst)};
}

std::pair<bool, std::string> representer_property() {
  const Dataset d = testutil::random_instance(12, 20, 1, 0.3);
  const BasisSpec q = BasisSpec::power(5, 1, Standardizer::identity(5), {}, false);
  const BasisSpec p = BasisSpec::power(5, 2, Standardizer::identity(5), {}, false);
  Eigen::VectorXd phi(20);
  for (int i = 0; i < 20; ++i) phi(i) = d[static_cast<std::size_t>(i)].r ? std::sin(1.0 + i) : 0.0;
  const RepresenterFit fit = fit_representer(d, GammaModel::zero(), phi, q, p);
  // Brute force: coordinate descent on the criterion with exact line minimization
  // along each axis, using only criterion evaluations.
  auto c = [&](const Eigen::VectorXd& t) { return representer_criterion(d, phi, q, p, t); };
  const int s = q.output_dim();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(s);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (int j = 0; j < s; ++j) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(s, j);
      const double f0 = c(theta), fp = c(theta + e), fm = c(theta - e);
      const double curv = fp + fm - 2.0 * f0;
      if (curv > 1e-14) theta(j) -= (fp - fm) / (2.0 * curv);
    }
  }
  const double gap = std::abs(c(theta) - fit.criterion);
  return {gap <= 1e-6, "criterion gap to brute-force minimizer " + sci(gap)};
}

std::pair<bool, std::string> weak_norm_property() {
  const AnalysisSettings settings;
  auto median_norm = [&](int n) {
    std::vector<double> vals;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      DgpConfig cfg;
      cfg.n = n;
      cfg.seed = derive_seed(0xBEEF + static_cast<std::uint64_t>(n), seed);
      const SimulatedSample s = generate(cfg);
      const auto bases = default_gamma_bases(s.observed, settings.q_basis, settings.p_basis);
      const auto fit = fit_gamma(s.observed, bases.first, bases.second, settings.gamma);
      Eigen::VectorXd truth(static_cast<Eigen::Index>(n));
      for (int i = 0; i < n; ++i) truth(i) = true_odds(cfg, s.full[static_cast<std::size_t>(i)]);
      vals.push_back(weak_norm_sq(fit.first.values_on(s.observed), truth, s.observed, bases.second));
    }
    std::nth_element(vals.begin(), vals.begin() + 25, vals.end());
    return vals[25];
  };
  const double small = median_norm(1000), large = median_norm(4000);
  return {large < small, "median weak norm^2 n=1000 " + fmt(small, 5) + ", n=4000 " + fmt(large, 5)};
}

// ---- determinism -----------------------------------------------------------

std::vector<std::pair<std::string, std::string>> simulate_artifacts(const char* config) {
  sm_report* rep = nullptr;
  std::vector<std::pair<std::string, std::string>> out;
  if (sm_simulate(config, &rep) != SM_OK) {
    std::printf("  sm_simulate failed: %s\n", sm_last_error());
    return out;
  }
  for (size_t i = 0; i < sm_report_count(rep); ++i) out.emplace_back(sm_report_name(rep, i), sm_report_text(rep, i));
  sm_report_free(rep);
  return out;
}

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();
  const DgpConfig dgp;

  std::printf("truth: structural Monte Carlo, 1e6 draws\n");
  const TruthTable truth_table = true_effects(dgp, 1000000, 20240601);
  const auto closed = testutil::closed_form_effects();
  for (const auto& e : kEstimands)
    std::printf("  %-5s %9.5f (mcse %.5f)  closed form %9.5f\n", e.c_str(), truth_table.effects.at(e),
                truth_table.effects_mcse.at(e), closed.at(e));
  const std::map<std::string, double>& truth = truth_table.effects;

  // 1. Oracle row.
  std::printf("Oracle, n=1000\n");
  const McResult oracle = monte_carlo({Method::Oracle}, 1000, 1000, 101, truth);
  print_cells(oracle, "oracle");
  {
    RowCheck rc;
    check_row(rc, oracle, "oracle", {-0.003, 0.001, 0.007, 0.005}, 0.02, {0.075, 0.137, 0.149, 0.170}, 0.20, 0.93,
              0.97);
    verdict(1, rc.ok, "Oracle n=1000, 1000 reps", rc.detail.str());
  }

  // 2. SRI row.
  std::printf("SRI, n=1000\n");
  const McResult sri = monte_carlo({Method::Sri}, 1000, 500, 202, truth);
  print_cells(sri, "sri");
  {
    RowCheck rc;
    check_row(rc, sri, "sri", {0.0, 0.0, 0.0, 0.0}, 0.05, {0.105, 0.178, 0.177, 0.195}, 0.25, 0.92, 0.985);
    rc.detail << "non-converged reps excluded: " << sri.failures.at("sri");
    verdict(2, rc.ok, "SRI n=1000, 500 reps", rc.detail.str());
  }

  // 3. Baselines at n=2000.
  std::printf("CCA and MI, n=2000\n");
  const McResult base = monte_carlo({Method::Mi, Method::Cca}, 2000, 200, 303, truth);
  print_cells(base, "mi");
  print_cells(base, "cca");
  {
    const McCell& cca_te = base.cells.at("cca").at("TE");
    const McCell& mi_nde = base.cells.at("mi").at("NDE");
    const bool a = cca_te.bias >= -0.80 && cca_te.bias <= -0.60;
    const bool b = mi_nde.bias < 0.0 && std::abs(mi_nde.bias) >= 0.03;
    const bool c = cca_te.cp <= 0.20;
    verdict(3, a && b && c, "baseline bias direction n=2000, 200 reps",
            "CCA TE bias " + fmt(cca_te.bias) + (a ? "" : "*") + ", MI NDE bias " + fmt(mi_nde.bias) +
                (b ? "" : "*") + ", CCA TE cp " + fmt(cca_te.cp, 3) + (c ? "" : "*"));
  }

  // 4. Missingness rate over 1e6 units, drawn in ten independent blocks.
  {
    std::size_t missing = 0, total = 0;
    for (std::uint64_t block = 0; block < 10; ++block) {
      DgpConfig cfg;
      cfg.n = 100000;
      cfg.seed = derive_seed(404, block);
      const SimulatedSample s = generate(cfg);
      for (int r : s.r) missing += r == 0;
      total += s.r.size();
    }
    const double rate = static_cast<double>(missing) / static_cast<double>(total);
    verdict(4, std::abs(rate - 0.437) <= 0.01, "missingness rate at n=1e6", "rate " + fmt(rate));
  }

  // 5. Property suite.
  {
    const std::vector<std::pair<std::string, std::function<std::pair<bool, std::string>()>>> props{
        {"orthogonality", orthogonality_property}, {"gradient", gradient_property},
        {"mcar", mcar_property},                   {"decomposition", decomposition_property},
        {"full-data", full_data_property},         {"representer", representer_property},
        {"weak-norm", weak_norm_property}};
    bool ok = true;
    std::string detail;
    for (const auto& [name, fn] : props) {
      const auto [pass, msg] = fn();
      std::printf("  %-13s %s  %s\n", name.c_str(), pass ? "ok" : "FAILED", msg.c_str());
      ok = ok && pass;
      detail += name + (pass ? " ok; " : " FAILED; ");
    }
    verdict(5, ok, "property suite", detail);
  }

  // 6. Determinism of the simulation artifacts.
  {
    const char* config =
        R"({"mode": "simulate", "seed": 606, "simulate": {"n": 500, "reps": 4}, "truth": {"big_n": 100000}})";
    const auto first = simulate_artifacts(config);
    const auto second = simulate_artifacts(config);
    const bool ok = !first.empty() && first == second;
    verdict(6, ok, "repeated simulate is byte-identical",
            std::to_string(first.size()) + " artifacts compared");
  }

  std::printf("total %.1fs, %d criteria failed\n", seconds_since(t_start), failures);
  return failures == 0 ? 0 : 1;
}
