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

#include "shadowmed/simulation.hpp"

#include "shadowmed/error.hpp"
#include "shadowmed/format.hpp"
#include "shadowmed/stats.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace shadowmed {

DgpConfig DgpConfig::without_treatment_effects() const {
  DgpConfig c = *this;
  c.m1_a = 0.0;
  c.m2_a = 0.0;
  c.m2_am1 = 0.0;
  c.y_a = 0.0;
  c.y_am1 = 0.0;
  c.y_am2 = 0.0;
  return c;
}

namespace {

struct Covariates {
  double x1, z, x2, x3;
};

struct Noise {
  double e3, e4, e5;
};

double m1_mean(const DgpConfig& c, const Covariates& x, int a) {
  return c.m1_0 + c.m1_a * a + c.m1_sin_x1 * std::sin(x.x1) + c.m1_x1sq * x.x1 * x.x1 + c.m1_x2 * x.x2 +
         c.m1_x3 * x.x3;
}

double m2_mean(const DgpConfig& c, const Covariates& x, int a, double m1) {
  return c.m2_0 + c.m2_a * a + c.m2_x1 * x.x1 + c.m2_x2sq * x.x2 * x.x2 + c.m2_x3 * x.x3 +
         c.m2_am1 * a * m1;
}

double y_mean(const DgpConfig& c, const Covariates& x, int a, double m1, double m2) {
  return c.y0 + c.y_a * a + c.y_m1 * m1 + c.y_m2 * m2 + c.y_x1 * x.x1 + c.y_x1sq * x.x1 * x.x1 +
         c.y_sin_x2 * std::sin(x.x2) + c.y_x2sq * x.x2 * x.x2 + c.y_x3 * x.x3 + c.y_am1 * a * m1 +
         c.y_am2 * a * m2;
}

double a_index(const DgpConfig& c, const Covariates& x) {
  return c.a0 + c.a_x1 * x.x1 + c.a_x2 * x.x2 + c.a_x3 * x.x3;
}

double r_index(const DgpConfig& c, const Covariates& x, int a, const Noise& e) {
  return c.r0 + c.r_x1 * x.x1 + c.r_x2 * x.x2 + c.r_x3 * x.x3 + c.r_ae3 * a * e.e3 + c.r_ae4 * a * e.e4 +
         c.r_e5 * e.e5;
}

struct UnitSampler {
  explicit UnitSampler(std::uint64_t seed) : rng(seed) {}

  // Draw order per unit: e1..e5, X2, X3, then the A and R uniforms.
  void draw(const DgpConfig& c, Covariates& x, Noise& e, double& ua, double& ur) {
    const double e1 = normal(rng), e2 = normal(rng);
    e.e3 = normal(rng);
    e.e4 = normal(rng);
    e.e5 = normal(rng);
    x.x1 = normal_cdf(c.alpha * e1 + std::sqrt(1.0 - c.alpha * c.alpha) * e2);
    x.z = normal_cdf(e1);
    x.x2 = uniform(rng);
    x.x3 = uniform(rng) < 0.5 ? 1.0 : 0.0;
    ua = uniform(rng);
    ur = uniform(rng);
  }

  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> uniform{0.0, 1.0};
};

void check_config(const DgpConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw Error(ErrorCode::ConfigError, "dgp alpha must lie in (0, 1]");
  if (c.n < 1) throw Error(ErrorCode::ConfigError, "dgp n must be >= 1");
}

class RunningStat {
 public:
  void add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }
  double mean() const { return mean_; }
  double mcse() const {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

SimulatedSample generate(const DgpConfig& config) {
  check_config(config);
  Dims dims;
  dims.z = 1;
  dims.x_miss = 1;
  dims.x_obs = 2;
  dims.m = {1, 1};

  UnitSampler sampler(config.seed);
  std::vector<ObservedRecord> full, observed;
  std::vector<int> rs;
  full.reserve(static_cast<std::size_t>(config.n));
  observed.reserve(static_cast<std::size_t>(config.n));
  for (int i = 0; i < config.n; ++i) {
    Covariates x{};
    Noise e{};
    double ua = 0.0, ur = 0.0;
    sampler.draw(config, x, e, ua, ur);
    const int a = ua < expit(a_index(config, x)) ? 1 : 0;
    const double m1 = m1_mean(config, x, a) + e.e3;
    const double m2 = m2_mean(config, x, a, m1) + e.e4;
    const double y = y_mean(config, x, a, m1, m2) + e.e5;
    const int r = ur < expit(r_index(config, x, a, e)) ? 1 : 0;

    ObservedRecord rec;
    rec.r = 1;
    rec.z = Eigen::VectorXd::Constant(1, x.z);
    rec.x_miss = Eigen::VectorXd::Constant(1, x.x1);
    rec.x_obs = Eigen::Vector2d(x.x2, x.x3);
    rec.a = a;
    rec.m = {Eigen::VectorXd::Constant(1, m1), Eigen::VectorXd::Constant(1, m2)};
    rec.y = y;
    full.push_back(rec);
    rec.r = r;
    if (r == 0) rec.x_miss.reset();
    observed.push_back(std::move(rec));
    rs.push_back(r);
  }
  return {Dataset(std::move(full), dims), Dataset(std::move(observed), dims), std::move(rs)};
}

double true_odds(const DgpConfig& config, const ObservedRecord& record) {
  if (!record.x_miss) throw Error(ErrorCode::MissingTrueX, "true odds need X1");
  const Covariates x{(*record.x_miss)(0), record.z(0), record.x_obs(0), record.x_obs(1)};
  const double m1 = record.m.at(0)(0), m2 = record.m.at(1)(0);
  const Noise e{m1 - m1_mean(config, x, record.a), m2 - m2_mean(config, x, record.a, m1),
                record.y - y_mean(config, x, record.a, m1, m2)};
  return std::exp(-r_index(config, x, record.a, e));
}

GammaModel true_gamma_model(const DgpConfig& config) {
  return GammaModel::fixed([config](const Eigen::VectorXd& p) {
    if (p.size() != 7) throw Error(ErrorCode::DimensionMismatch, "true odds expect (x1, x2, x3, a, m1, m2, y)");
    const Covariates x{p(0), 0.0, p(1), p(2)};
    const int a = p(3) > 0.5 ? 1 : 0;
    const Noise e{p(4) - m1_mean(config, x, a), p(5) - m2_mean(config, x, a, p(4)),
                  p(6) - y_mean(config, x, a, p(4), p(5))};
    return std::exp(-r_index(config, x, a, e));
  });
}

TruthTable true_effects(const DgpConfig& config, std::size_t big_n, std::uint64_t seed) {
  check_config(config);
  if (big_n < 2) throw Error(ErrorCode::ConfigError, "truth needs at least two draws");
  std::vector<TreatmentProfile> profiles;
  for (int code = 0; code < 8; ++code)
    profiles.emplace_back(std::vector<int>{(code >> 2) & 1, (code >> 1) & 1, code & 1});

  const std::vector<Estimand> contrasts{nde_estimand(2), nie_estimand(2, 1), nie_estimand(2, 2), te_estimand(2)};
  std::map<TreatmentProfile, RunningStat> psi;
  std::map<std::string, RunningStat> eff;
  RunningStat te_direct;

  UnitSampler sampler(derive_seed(seed, 0));
  UnitSampler direct(derive_seed(seed, 1));
  std::map<TreatmentProfile, double> y_of;
  for (std::size_t i = 0; i < big_n; ++i) {
    Covariates x{};
    Noise e{};
    double ua = 0.0, ur = 0.0;
    sampler.draw(config, x, e, ua, ur);
    for (const auto& p : profiles) {
      const double m1 = m1_mean(config, x, p.at(1)) + e.e3;
      const double m2 = m2_mean(config, x, p.at(2), m1) + e.e4;
      const double y = y_mean(config, x, p.at(3), m1, m2) + e.e5;
      y_of[p] = y;
      psi[p].add(y);
    }
    for (const auto& c : contrasts) eff[c.name].add(y_of[c.plus] - y_of[*c.minus]);

    direct.draw(config, x, e, ua, ur);
    auto outcome = [&](int a) {
      const double m1 = m1_mean(config, x, a) + e.e3;
      const double m2 = m2_mean(config, x, a, m1) + e.e4;
      return y_mean(config, x, a, m1, m2) + e.e5;
    };
    te_direct.add(outcome(1) - outcome(0));
  }

  TruthTable t;
  t.draws = big_n;
  for (const auto& [p, s] : psi) {
    t.psi[p] = s.mean();
    t.psi_mcse[p] = s.mcse();
  }
  for (const auto& c : contrasts) {
    // Differences of the shared-draw psi table, so TE = NDE + NIE1 + NIE2 up to rounding.
    t.effects[c.name] = t.psi[c.plus] - t.psi[*c.minus];
    t.effects_mcse[c.name] = eff[c.name].mcse();
  }
  t.te_direct = te_direct.mean();
  t.te_direct_mcse = te_direct.mcse();
  return t;
}

namespace {

struct MethodOutcome {
  bool ok = false;
  std::string failure;
  std::vector<double> estimate, se, lo, hi;
};

MethodOutcome run_one(Method method, const SimulatedSample& sample, const std::vector<Estimand>& estimands,
                      const McOptions& options, std::uint64_t rep_seed) {
  MethodOutcome out;
  try {
    AnalysisResult res;
    switch (method) {
      case Method::Oracle:
        res = oracle_estimate(sample.full, estimands, options.settings);
        break;
      case Method::Sri:
        res = sri_estimate(sample.observed, estimands, options.settings);
        if (!res.gamma_zero && !res.gamma_report.converged) {
          out.failure = "NonConvergence";
          return out;
        }
        break;
      case Method::Cca:
        res = cca_estimate(sample.observed, estimands, options.settings);
        break;
      case Method::Mi: {
        MiOptions mi = options.mi;
        mi.seed = derive_seed(rep_seed, 0x4D49);
        res = mi_estimate(sample.observed, estimands, options.settings, mi);
        break;
      }
    }
    for (const auto& e : res.estimands) {
      out.estimate.push_back(e.report.estimate);
      out.se.push_back(e.report.se);
      out.lo.push_back(e.report.ci_lo);
      out.hi.push_back(e.report.ci_hi);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

}  // namespace

McResult run_monte_carlo(const DgpConfig& config, const McOptions& options,
                         const std::map<std::string, double>& truth) {
  if (options.reps < 1) throw Error(ErrorCode::ConfigError, "reps must be >= 1");
  if (options.methods.empty()) throw Error(ErrorCode::ConfigError, "no methods requested");
  const std::vector<Estimand> estimands{nde_estimand(2), nie_estimand(2, 1), nie_estimand(2, 2), te_estimand(2)};
  for (const auto& e : estimands)
    if (!truth.count(e.name)) throw Error(ErrorCode::ConfigError, "truth is missing " + e.name);

  const std::size_t reps = static_cast<std::size_t>(options.reps);
  const std::size_t nm = options.methods.size();
  std::vector<std::vector<MethodOutcome>> outcomes(reps, std::vector<MethodOutcome>(nm));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t rep = next++; rep < reps; rep = next++) {
      DgpConfig cfg = config;
      cfg.n = options.n;
      cfg.seed = derive_seed(options.master_seed, rep);
      const SimulatedSample sample = generate(cfg);
      for (std::size_t m = 0; m < nm; ++m)
        outcomes[rep][m] = run_one(options.methods[m], sample, estimands, options, cfg.seed);
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  McResult result;
  result.reps = options.reps;
  result.n = options.n;
  result.master_seed = options.master_seed;
  for (const auto& e : estimands) {
    result.estimands.push_back(e.name);
    result.truth[e.name] = truth.at(e.name);
  }
  for (std::size_t m = 0; m < nm; ++m) {
    const std::string mname = to_string(options.methods[m]);
    result.methods.push_back(mname);
    int failures = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& o = outcomes[rep][m];
      if (!o.ok) ++failures;
      for (std::size_t e = 0; e < estimands.size(); ++e) {
        McReplicate row;
        row.rep = static_cast<int>(rep);
        row.method = mname;
        row.estimand = estimands[e].name;
        row.ok = o.ok;
        row.failure = o.failure;
        if (o.ok) {
          row.estimate = o.estimate[e];
          row.se_hat = o.se[e];
          row.ci_lo = o.lo[e];
          row.ci_hi = o.hi[e];
        }
        result.replicates.push_back(std::move(row));
      }
    }
    result.failures[mname] = failures;
    for (std::size_t e = 0; e < estimands.size(); ++e) {
      const double t = truth.at(estimands[e].name);
      McCell cell;
      double sum = 0.0, sum_se = 0.0;
      int covered = 0;
      std::vector<double> vals;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& o = outcomes[rep][m];
        if (!o.ok) continue;
        vals.push_back(o.estimate[e]);
        sum += o.estimate[e];
        sum_se += o.se[e];
        if (o.lo[e] <= t && t <= o.hi[e]) ++covered;
      }
      cell.n_ok = static_cast<int>(vals.size());
      if (cell.n_ok > 0) {
        const double k = static_cast<double>(cell.n_ok);
        cell.mean_estimate = sum / k;
        cell.mean_se_hat = sum_se / k;
        cell.bias = cell.mean_estimate - t;
        cell.cp = covered / k;
        if (cell.n_ok > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - cell.mean_estimate) * (v - cell.mean_estimate);
          cell.se = std::sqrt(ss / (k - 1.0));
          cell.se_defined = true;
        }
        cell.mcse_bias = cell.se / std::sqrt(k);
        cell.mcse_cp = std::sqrt(cell.cp * (1.0 - cell.cp) / k);
      }
      result.cells[mname][estimands[e].name] = cell;
    }
  }
  return result;
}

std::string mc_table_csv(const McResult& result) {
  std::ostringstream os;
  os << "method,metric";
  for (const auto& e : result.estimands) os << ',' << e;
  os << '\n';
  for (const auto& m : result.methods) {
    for (const char* metric : {"bias", "se", "cp"}) {
      os << m << ',' << metric;
      for (const auto& e : result.estimands) {
        const McCell& c = result.cells.at(m).at(e);
        const std::string name = metric;
        const double v = name == "bias" ? c.bias : name == "se" ? c.se : c.cp;
        os << ',' << format_double(v);
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string mc_replicates_csv(const McResult& result) {
  std::ostringstream os;
  os << "rep,method,estimand,estimate,se_hat,ci_lo,ci_hi,ok\n";
  for (const auto& r : result.replicates) {
    os << r.rep << ',' << r.method << ',' << r.estimand << ',';
    if (r.ok)
      os << format_double(r.estimate) << ',' << format_double(r.se_hat) << ',' << format_double(r.ci_lo) << ','
         << format_double(r.ci_hi) << ",1\n";
    else
      os << "NA,NA,NA,NA,0\n";
  }
  return os.str();
}

}  // namespace shadowmed
