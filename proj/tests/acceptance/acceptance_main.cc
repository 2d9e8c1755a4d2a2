/*
* Copyright 2026 The fedcausal Authors.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     https://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
* ============================================================================
*/
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion,
// followed by indented detail lines.
//
//   acceptance [--reps N] [--out FILE] [--strict]
//
// Without --strict the exit status is 0 whenever every criterion ran to
// completion; --strict exits 1 if any criterion failed.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fedcausal/density_ratio.h"
#include "fedcausal/federation.h"
#include "fedcausal/fedruntime.h"
#include "fedcausal/numkit.h"
#include "fedcausal/rng.h"
#include "fedcausal/simbench.h"
#include "fedcausal/site_estimator.h"
#include "fedcausal/status.h"
#include "test_util.h"

namespace fedcausal {
namespace {

using testing::RandomNormal;

const std::vector<EnsembleMethod> kAllMethods = {
    EnsembleMethod::kTargetOnly, EnsembleMethod::kSampleSize,
    EnsembleMethod::kInverseVariance, EnsembleMethod::kAipwL1,
    EnsembleMethod::kMrL1};
const std::vector<std::string> kPresetNames = {"c0", "c05", "c1", "mismatch"};

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return buffer;
}

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  // Records one check; the criterion passes only if every check does.
  bool Check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    lines_.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
    return ok;
  }
  void Note(const std::string& what) { lines_.push_back("info  " + what); }

  bool pass() const { return pass_; }
  std::string Render() const {
    std::string out = std::string(pass_ ? "PASS  " : "FAIL  ") + title_ + "\n";
    for (const std::string& line : lines_) out += "      " + line + "\n";
    return out;
  }

 private:
  std::string title_;
  bool pass_ = true;
  std::vector<std::string> lines_;
};

ScenarioSpec LoadPreset(const std::string& name) {
  std::ifstream in(std::string(FEDCAUSAL_PRESET_DIR) + "/" + name + ".json");
  return ScenarioSpecFromJson(nlohmann::json::parse(in));
}

bool Within(double value, double center, double tolerance) {
  return std::abs(value - center) <= tolerance;
}

std::string Near(const char* label, double value, double center, double tol) {
  return Format("%s = %.4f, expected %.3f +/- %.3f", label, value, center, tol);
}

// ---------------------------------------------------------------------------
// Simulation-table criteria.

struct PresetRun {
  ScenarioSpec spec;
  ScenarioResult result;
};

std::map<std::string, PresetRun> RunPresets(int reps) {
  std::map<std::string, PresetRun> runs;
  for (const std::string& name : kPresetNames) {
    PresetRun run;
    run.spec = LoadPreset(name);
    SimOptions options;
    options.replications = reps;
    options.keep_ledger = false;
    run.result = RunScenario(run.spec, kAllMethods, ProtocolConfig{}, options);
    std::fprintf(stderr, "ran %s (%d replications)\n", name.c_str(), reps);
    runs.emplace(name, std::move(run));
  }
  return runs;
}

void Describe(Criterion& c, const std::string& name, const MetricsTable& table) {
  for (const MethodMetrics& m : table.methods) {
    c.Note(Format("%-8s %-8s rmse %.4f  cov %.3f  len %.3f  se %.4f  sd %.4f  fail %d",
                  name.c_str(), std::string(EnsembleMethodName(m.method)).c_str(),
                  m.rmse, m.coverage, m.ci_length, m.mean_se, m.mc_sd, m.failures));
  }
}

Criterion TableOne(const std::map<std::string, PresetRun>& runs) {
  Criterion c("1 simulation table, settings C=0, 1/2, 1");
  const std::map<std::string, double> mr_rmse = {
      {"c0", 0.061}, {"c05", 0.062}, {"c1", 0.063}};
  for (const auto& [name, expected] : mr_rmse) {
    const MetricsTable& t = runs.at(name).result.metrics;
    c.Check(Within(t.Get(EnsembleMethod::kMrL1).rmse, expected, 0.015),
            name + " MR-L1 " + Near("rmse", t.Get(EnsembleMethod::kMrL1).rmse, expected, 0.015));
    c.Check(Within(t.Get(EnsembleMethod::kTargetOnly).rmse, 0.141, 0.02),
            name + " Target " +
                Near("rmse", t.Get(EnsembleMethod::kTargetOnly).rmse, 0.141, 0.02));
  }
  const double cov = runs.at("c0").result.metrics.Get(EnsembleMethod::kMrL1).coverage;
  c.Check(Within(cov, 0.960, 0.03), "c0 MR-L1 " + Near("coverage", cov, 0.960, 0.03));
  for (const char* name : {"c0", "c05", "c1"}) {
    Describe(c, name, runs.at(name).result.metrics);
  }
  return c;
}

Criterion TableTwo(const std::map<std::string, PresetRun>& runs) {
  Criterion c("2 simulation table, covariate mismatch");
  const MetricsTable& t = runs.at("mismatch").result.metrics;
  const MethodMetrics& mr = t.Get(EnsembleMethod::kMrL1);
  const MethodMetrics& aipw = t.Get(EnsembleMethod::kAipwL1);
  c.Check(Within(mr.rmse, 0.067, 0.015), "MR-L1 " + Near("rmse", mr.rmse, 0.067, 0.015));
  c.Check(Within(mr.coverage, 0.944, 0.03),
          "MR-L1 " + Near("coverage", mr.coverage, 0.944, 0.03));
  c.Check(Within(aipw.rmse, 0.134, 0.02),
          "AIPW-L1 " + Near("rmse", aipw.rmse, 0.134, 0.02));
  Describe(c, "mismatch", t);
  return c;
}

Criterion Orderings(const std::map<std::string, PresetRun>& runs) {
  Criterion c("3 ordering properties");
  for (const char* name : {"c05", "c1"}) {
    const MetricsTable& t = runs.at(name).result.metrics;
    const double mr = t.Get(EnsembleMethod::kMrL1).rmse;
    const double target = t.Get(EnsembleMethod::kTargetOnly).rmse;
    c.Check(mr < target, Format("%s rmse MR-L1 %.4f < Target %.4f", name, mr, target));
  }
  const MetricsTable& c0 = runs.at("c0").result.metrics;
  const double ss = c0.Get(EnsembleMethod::kSampleSize).rmse;
  const double mr = c0.Get(EnsembleMethod::kMrL1).rmse;
  c.Check(ss >= 5.0 * mr, Format("c0 rmse SS %.4f >= 5 x MR-L1 %.4f", ss, mr));
  const double ivw = c0.Get(EnsembleMethod::kInverseVariance).coverage;
  c.Check(ivw < 0.90, Format("c0 IVW coverage %.3f < 0.90", ivw));
  for (const std::string& name : kPresetNames) {
    const double cov = runs.at(name).result.metrics.Get(EnsembleMethod::kMrL1).coverage;
    c.Check(cov >= 0.92 && cov <= 0.98,
            Format("%s MR-L1 coverage %.3f in [0.92, 0.98]", name.c_str(), cov));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Density ratio.

Criterion DensityRatio() {
  Criterion c("4 density ratio oracles");
  double worst_residual = 0.0;
  int failures = 0;
  for (int instance = 0; instance < 100; ++instance) {
    Rng rng = MakeRng(4001, {static_cast<std::uint64_t>(instance)});
    const int q = 1 + instance % 3;
    const int n_t = 300 + instance * 7, n_k = 500 + instance * 5;
    Matrix target = RandomNormal(n_t, q, rng);
    const Matrix source = RandomNormal(n_k, q, rng);
    for (int j = 0; j < q; ++j) target.col(j).array() += UniformUnit(rng) - 0.5;
    const BasisSpec basis = BasisSpec::For(BasisKind::kLinear, q);
    const MomentSummary summary = TargetMoments(target, basis);
    try {
      const TiltCoefficients tilt = SolveTilt(source, summary, basis);
      const Vector w = RatioWeights(tilt, source);
      // Weighted source moments recomputed from scratch.
      Vector moments = Vector::Zero(q + 1);
      for (int i = 0; i < n_k; ++i) {
        moments[0] += w[i];
        for (int j = 0; j < q; ++j) moments[j + 1] += w[i] * source(i, j);
      }
      moments /= n_k;
      Vector means = Vector::Ones(q + 1);
      for (int j = 0; j < q; ++j) means[j + 1] = target.col(j).mean();
      worst_residual = std::max(worst_residual, (moments - means).cwiseAbs().maxCoeff());
    } catch (const FedError& e) {
      ++failures;
    }
  }
  c.Check(failures == 0 && worst_residual < 1e-8,
          Format("100 shifted-Gaussian tilts: max moment residual %.2e, %d solver failures",
                 worst_residual, failures));

  const int n = 20000;
  Rng rng = MakeRng(4002, {});
  Matrix target = RandomNormal(n, 2, rng);
  target.col(0).array() += 0.5;
  target.col(1).array() -= 0.3;
  const Matrix source = RandomNormal(n, 2, rng);
  const BasisSpec basis = BasisSpec::For(BasisKind::kLinear, 2);
  const Vector zeta = RatioWeights(SolveTilt(source, TargetMoments(target, basis), basis), source);
  Matrix pooled(2 * n, 2);
  pooled << target, source;
  Vector in_source(2 * n);
  in_source << Vector::Zero(n), Vector::Ones(n);
  const Vector coef = FitLogistic(WithIntercept(pooled), in_source).coefficients;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return zeta[a] < zeta[b]; });
  double worst = 0.0;
  for (int r = n / 20; r < n - n / 20; ++r) {
    const int i = order[r];
    const double p = Expit(coef[0] + coef[1] * source(i, 0) + coef[2] * source(i, 1));
    const double odds = (1.0 - p) / p;
    worst = std::max(worst, std::abs(zeta[i] - odds) / odds);
  }
  c.Check(worst < 0.05,
          Format("IPSW odds vs tilt at n=20000, inner 90%%: max relative gap %.4f < 0.05",
                 worst));
  return c;
}

// ---------------------------------------------------------------------------
// Multiple robustness. X = (V, U) with U independent of site; the target
// shifts V. Each nuisance is either correctly specified or deliberately wrong.

struct RobustnessSample {
  SiteFrame source;
  Matrix target_v;
};

double TrueOutcome(int arm, double v, double u) {
  return arm == 1 ? 2.0 + v + u * u : 1.0 + 0.5 * v + u * u;
}

constexpr double kRobustEffect = 3.5 - 2.25;

RobustnessSample DrawRobustness(int n, std::uint64_t seed) {
  Rng rng = MakeRng(5001, {seed});
  RobustnessSample s;
  s.source.site_id = "source";
  s.source.role = SiteRole::kSource;
  s.source.x.resize(n, 2);
  s.source.y.resize(n);
  s.source.a.resize(n);
  s.source.shared_cols = {0};
  for (int i = 0; i < n; ++i) {
    const double v = StandardNormal(rng), u = StandardNormal(rng);
    const double pi = Expit(0.2 + 0.4 * v - 0.3 * u + 0.2 * (u * u - 1.0));
    const int arm = UniformUnit(rng) < pi ? 1 : 0;
    s.source.x(i, 0) = v;
    s.source.x(i, 1) = u;
    s.source.a[i] = arm;
    s.source.y[i] = TrueOutcome(arm, v, u) + StandardNormal(rng);
  }
  s.target_v.resize(n, 1);
  for (int i = 0; i < n; ++i) s.target_v(i, 0) = 0.5 + StandardNormal(rng);
  return s;
}

Matrix Columns(const Matrix& x, bool with_square) {
  Matrix f(x.rows(), with_square ? 3 : 2);
  f.col(0) = x.col(0);
  f.col(1) = x.col(1);
  if (with_square) f.col(2) = x.col(1).array().square();
  return f;
}

struct RobustChoice {
  const char* label;
  bool pi, m, zeta, tau;
};

double RobustEffect(const RobustnessSample& s, const RobustChoice& choice) {
  const SiteFrame& f = s.source;
  const Matrix& x = f.x;
  const int n = static_cast<int>(f.size());
  NuisanceValues values;
  if (choice.pi) {
    const DesignMatrix d = WithIntercept(Columns(x, true));
    values.propensity = (d * FitLogistic(d, f.a).coefficients)
                            .unaryExpr([](double e) { return Expit(e); });
  } else {
    values.propensity = Vector::Constant(n, f.a.mean());
  }
  std::array<Vector, 2> truth;
  for (int arm = 0; arm < 2; ++arm) {
    truth[arm].resize(n);
    for (int i = 0; i < n; ++i) truth[arm][i] = TrueOutcome(arm, x(i, 0), x(i, 1));
    // Correct: (V, U, U^2). Wrong: linear in (V, U).
    const DesignMatrix d = WithIntercept(Columns(x, choice.m));
    const std::vector<int> rows = ArmIndices(f, arm);
    const Vector beta = FitOls(SelectRows(d, rows), SelectRows(f.y, rows)).coefficients;
    values.outcome[arm] = d * beta;
  }
  const Matrix v = f.SharedCovariates();
  Vector ratio = Vector::Ones(n);
  if (choice.zeta) {
    const BasisSpec basis = BasisSpec::For(BasisKind::kLinear, 1);
    ratio = RatioWeights(SolveTilt(v, TargetMoments(s.target_v, basis), basis), v);
  }
  TauModel tau;
  if (choice.tau) {
    tau = FitTauFromValues(v, truth);
  } else {
    tau.coefficients = {Vector::Zero(2), Vector::Zero(2)};
  }
  return EstimateSourceFromValues(f, s.target_v, values, ratio, tau).Effect();
}

Criterion MultipleRobustness(int reps) {
  Criterion c("5 multiple robustness at n=5000");
  const std::vector<RobustChoice> choices = {
      {"propensity + ratio", true, false, true, false},
      {"propensity + projection", true, false, false, true},
      {"outcome + ratio", false, true, true, false},
      {"outcome + projection", false, true, false, true},
      {"all wrong", false, false, false, false},
  };
  std::vector<std::vector<double>> errors(choices.size());
  for (int r = 0; r < reps; ++r) {
    const RobustnessSample s = DrawRobustness(5000, static_cast<std::uint64_t>(r));
    for (size_t j = 0; j < choices.size(); ++j) {
      errors[j].push_back(RobustEffect(s, choices[j]) - kRobustEffect);
    }
  }
  for (size_t j = 0; j < choices.size(); ++j) {
    double mean = 0.0;
    for (double e : errors[j]) mean += e;
    mean /= reps;
    double ss = 0.0;
    for (double e : errors[j]) ss += (e - mean) * (e - mean);
    const double se = std::sqrt(ss / (reps - 1) / reps);
    const bool wrong = j + 1 == choices.size();
    const bool ok = wrong ? std::abs(mean) > 3.0 * se : std::abs(mean) < 3.0 * se;
    c.Check(ok, Format("%-24s bias %+.5f, MC se %.5f, |bias|/se %.2f %s 3", choices[j].label,
                       mean, se, std::abs(mean) / se, wrong ? ">" : "<"));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Weight solver.

Criterion WeightSolver() {
  Criterion c("6 penalized weight solver");
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    Rng rng = MakeRng(6001, {static_cast<std::uint64_t>(instance)});
    const int n = 40 + instance, p = 2 + instance % 6;
    const Matrix g = RandomNormal(n, p, rng);
    const Vector r = RandomNormal(n, 1, rng).col(0);
    Vector pen(p);
    for (int k = 0; k < p; ++k) pen[k] = instance % 3 == 0 ? 0.0 : 4.0 * UniformUnit(rng);
    const Vector eta = NnlsCoordinateDescent(g, r, pen);
    const std::vector<double> oracle = testing::ProjectedGradientNnls(
        testing::ToRows(g), testing::ToStd(r), testing::ToStd(pen));
    const double ours = NnlsObjective(g, r, pen, eta);
    const double theirs = testing::Objective(testing::ToRows(g), testing::ToStd(r),
                                             testing::ToStd(pen), oracle);
    worst = std::max(worst, std::abs(ours - theirs));
  }
  c.Check(worst < 1e-6,
          Format("50 instances vs projected gradient: max objective gap %.2e", worst));

  const ScenarioSpec spec = LoadPreset("c1");
  const RoundResult round =
      RunDirect(GenerateSites(spec, 0), MrFamilyConfig(spec, ProtocolConfig{}));
  const int t = TargetIndex(round.estimates);
  Vector unit = Vector::Zero(static_cast<Eigen::Index>(round.estimates.size()));
  unit[t] = 1.0;
  for (int arm : {0, 1, kEffectArm}) {
    const Vector eta = SolveL1Weights(round.estimates, arm, 1e12);
    c.Check(eta == unit, Format("lambda = 1e12, arm %d: target-only weights exactly", arm));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Influence values.

Criterion Influence(const std::map<std::string, PresetRun>& runs) {
  Criterion c("7 influence values");
  const ScenarioSpec spec = LoadPreset("c1");
  const std::vector<SiteFrame> frames = GenerateSites(spec, 0);
  ProtocolConfig base;
  base.methods = kAllMethods;
  double worst = 0.0;
  int parts = 0;
  for (const ProtocolConfig& config :
       {AipwFamilyConfig(spec, base), MrFamilyConfig(spec, base)}) {
    const RoundResult round = RunRound(frames, config);
    const long total = round.reports.front().total_n;
    for (const SiteEstimate& e : round.estimates) {
      for (int arm = 0; arm < 2; ++arm) {
        const InfluenceParts p = InfluenceValues(e, total, arm);
        worst = std::max(worst, std::abs(CompensatedMean(p.own)));
        ++parts;
        if (p.on_target.size() > 0) {
          worst = std::max(worst, std::abs(CompensatedMean(p.on_target)));
          ++parts;
        }
      }
    }
  }
  c.Check(worst < 1e-8,
          Format("%d scaled influence parts, max |mean| %.2e < 1e-8", parts, worst));

  for (const MethodMetrics& m : runs.at("c1").result.metrics.methods) {
    const double ratio = m.mean_se / m.mc_sd;
    c.Check(std::abs(ratio - 1.0) <= 0.2,
            Format("c1 %-8s influence se %.4f vs MC sd %.4f, ratio %.3f",
                   std::string(EnsembleMethodName(m.method)).c_str(), m.mean_se, m.mc_sd,
                   ratio));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Runtime equivalence and privacy.

bool SameReport(const GlobalReport& a, const GlobalReport& b) {
  return a.method == b.method && a.delta_hat == b.delta_hat && a.variance == b.variance &&
         a.mu == b.mu && a.ci == b.ci && a.solution.eta[0] == b.solution.eta[0] &&
         a.solution.eta[1] == b.solution.eta[1] && a.solution.lambda == b.solution.lambda;
}

Criterion Runtime(const std::map<std::string, PresetRun>& runs) {
  Criterion c("8 runtime equivalence and privacy audit");
  Rng rng = MakeRng(8001, {});
  int identical = 0, clean = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::string& name = kPresetNames[trial % kPresetNames.size()];
    const ScenarioSpec spec = LoadPreset(name);
    const std::uint64_t replication = rng() % 100000;
    ProtocolConfig base;
    base.methods = kAllMethods;
    base.seed = rng();
    base.l1.seed = rng();
    ProtocolConfig config = trial % 2 == 0 ? AipwFamilyConfig(spec, base)
                                           : MrFamilyConfig(spec, base);
    const std::vector<SiteFrame> frames = GenerateSites(spec, replication);
    const RoundResult wire = RunRound(frames, config);
    const RoundResult direct = RunDirect(frames, config);
    bool same = wire.reports.size() == direct.reports.size();
    for (size_t m = 0; same && m < wire.reports.size(); ++m) {
      same = SameReport(wire.reports[m], direct.reports[m]);
    }
    identical += same;
    const AuditSummary audit = AuditLedger(wire.ledger);
    const int reporting = static_cast<int>(wire.estimates.size()) - 1;
    clean += audit.violations == 0 &&
             audit.messages_by_kind ==
                 ExpectedCensus(static_cast<int>(frames.size()), reporting);
  }
  c.Check(identical == 20, Format("%d/20 seeds bit-identical to direct composition", identical));
  c.Check(clean == 20, Format("%d/20 seeded rounds with zero violations and expected census",
                              clean));
  for (const auto& [name, run] : runs) {
    const AuditTotals& a = run.result.audit;
    c.Check(a.violations == 0 && a.census_mismatches == 0 && a.rounds > 0,
            Format("%s simulation: %d rounds audited, %d violations, %d census mismatches",
                   name.c_str(), a.rounds, a.violations, a.census_mismatches));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Determinism across thread counts.

Criterion Determinism(int reps) {
  Criterion c("9 determinism across thread counts");
  for (const std::string& name : kPresetNames) {
    const ScenarioSpec spec = LoadPreset(name);
    std::string metrics[2], records[2];
    for (int run = 0; run < 2; ++run) {
      SimOptions options;
      options.replications = reps;
      options.threads = run == 0 ? 1 : 3;
      const ScenarioResult r = RunScenario(spec, kAllMethods, ProtocolConfig{}, options);
      metrics[run] = MetricsCsv(r.metrics);
      records[run] = ReplicationsCsv(r.replications, spec.num_sites);
    }
    c.Check(metrics[0] == metrics[1] && records[0] == records[1],
            Format("%s, %d replications: 1 vs 3 threads give byte-identical CSV output",
                   name.c_str(), reps));
  }
  return c;
}

int Main(int argc, char** argv) {
  int reps = 500;
  bool strict = false;
  std::string out_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--reps" && i + 1 < argc) {
      reps = std::atoi(argv[++i]);
    } else if (arg == "--out" && i + 1 < argc) {
      out_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance [--reps N] [--out FILE] [--strict]\n");
      return 2;
    }
  }
  if (reps < 2) {
    std::fprintf(stderr, "--reps must be at least 2\n");
    return 2;
  }

  const std::map<std::string, PresetRun> runs = RunPresets(reps);
  std::vector<std::function<Criterion()>> steps = {
      [&] { return TableOne(runs); },
      [&] { return TableTwo(runs); },
      [&] { return Orderings(runs); },
      [] { return DensityRatio(); },
      [] { return MultipleRobustness(200); },
      [] { return WeightSolver(); },
      [&] { return Influence(runs); },
      [&] { return Runtime(runs); },
      [] { return Determinism(20); },
  };
  std::string text = Format("acceptance run with %d replications per preset\n", reps);
  int failed = 0;
  for (const auto& step : steps) {
    const Criterion c = step();
    failed += !c.pass();
    std::fputs(c.Render().c_str(), stdout);
    std::fflush(stdout);
    text += c.Render();
  }
  const std::string summary =
      Format("%zu criteria, %zu passed, %d failed\n", steps.size(), steps.size() - failed, failed);
  std::fputs(summary.c_str(), stdout);
  text += summary;
  if (!out_path.empty()) std::ofstream(out_path) << text;
  return strict && failed > 0 ? 1 : 0;
}

}  // namespace
}  // namespace fedcausal

int main(int argc, char** argv) {
  try {
    return fedcausal::Main(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 1;
  }
}
