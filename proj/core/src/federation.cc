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

#include "fedcausal/federation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fedcausal/nuisance.h"
#include "fedcausal/rng.h"
#include "fedcausal/status.h"

namespace fedcausal {
namespace {

long TotalUnits(const std::vector<SiteEstimate>& estimates) {
  long n = 0;
  for (const SiteEstimate& e : estimates) n += e.n_k;
  return n;
}

InfluenceParts Phi(const SiteEstimate& est, long total_n, int arm) {
  return arm == kEffectArm ? EffectInfluenceValues(est, total_n)
                           : InfluenceValues(est, total_n, arm);
}

double Mu(const SiteEstimate& est, int arm) {
  return arm == kEffectArm ? est.Effect() : est.mu[arm];
}

std::vector<std::string> SiteIds(const std::vector<SiteEstimate>& estimates) {
  std::vector<std::string> ids;
  for (const SiteEstimate& e : estimates) ids.push_back(e.site_id);
  return ids;
}

Vector Deltas(const std::vector<SiteEstimate>& estimates, int arm) {
  const int t = TargetIndex(estimates);
  Vector delta(static_cast<Eigen::Index>(estimates.size()));
  for (size_t k = 0; k < estimates.size(); ++k) {
    delta(k) = static_cast<int>(k) == t
                   ? 0.0
                   : Mu(estimates[k], arm) - Mu(estimates[t], arm);
  }
  return delta;
}

EnsembleSolution BaseSolution(const std::vector<SiteEstimate>& estimates,
                              WeightMode mode) {
  EnsembleSolution s;
  s.site_ids = SiteIds(estimates);
  s.mode = mode;
  s.delta = {Deltas(estimates, 0), Deltas(estimates, 1)};
  return s;
}

// Solves the penalized problem restricted to 'rows' (all rows when empty).
// Exactly duplicated columns with equal penalties are merged and share
// their weight equally.
Vector SolveSourceWeights(const L1Design& d, const std::vector<int>& rows,
                          double lambda, PenaltyScale scale,
                          const SolverOptions& options) {
  const Eigen::Index p = d.g.cols();
  const double row_count =
      static_cast<double>(rows.empty() ? d.g.rows() : rows.size());
  const double per_row = scale == PenaltyScale::kPerRow ? row_count : 1.0;
  Vector penalties(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double d2 = d.delta(k) * d.delta(k);
    // 0 * inf stays 0 so an unbiased source is never pinned.
    penalties(k) = d2 == 0.0 ? 0.0 : lambda * d2 * per_row;
  }
  std::vector<int> group(p, -1);
  std::vector<int> reps;
  for (Eigen::Index k = 0; k < p; ++k) {
    for (int r : reps) {
      if (penalties(r) == penalties(k) && d.g.col(r) == d.g.col(k)) {
        group[k] = r;
        break;
      }
    }
    if (group[k] < 0) {
      group[k] = static_cast<int>(k);
      reps.push_back(static_cast<int>(k));
    }
  }
  const auto q = static_cast<Eigen::Index>(reps.size());
  Matrix g_sub(rows.empty() ? d.g.rows() : static_cast<Eigen::Index>(rows.size()), q);
  Vector r_sub(g_sub.rows());
  for (Eigen::Index c = 0; c < q; ++c) {
    g_sub.col(c) = rows.empty() ? Vector(d.g.col(reps[c]))
                                : SelectRows(Vector(d.g.col(reps[c])), rows);
  }
  r_sub = rows.empty() ? d.r : SelectRows(d.r, rows);
  Vector pen_sub(q);
  for (Eigen::Index c = 0; c < q; ++c) pen_sub(c) = penalties(reps[c]);
  const Vector eta_sub = NnlsCoordinateDescentGram(
      g_sub.transpose() * g_sub, g_sub.transpose() * r_sub, pen_sub, options);
  Vector eta(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const int rep = group[k];
    const auto c = static_cast<Eigen::Index>(
        std::find(reps.begin(), reps.end(), rep) - reps.begin());
    const auto size = std::count(group.begin(), group.end(), rep);
    eta(k) = eta_sub(c) / static_cast<double>(size);
  }
  return eta;
}

// Places source weights into a full simplex vector.
Vector ToSimplex(const std::vector<SiteEstimate>& estimates, const L1Design& d,
                 const Vector& source_eta) {
  const int t = TargetIndex(estimates);
  Vector eta = Vector::Zero(static_cast<Eigen::Index>(estimates.size()));
  double source_total = 0.0;
  for (size_t c = 0; c < d.sources.size(); ++c) {
    eta(d.sources[c]) = source_eta(static_cast<Eigen::Index>(c));
    source_total += source_eta(static_cast<Eigen::Index>(c));
  }
  if (source_total <= 1.0) {
    eta(t) = 1.0 - source_total;
  } else {
    eta /= source_total;
    eta(t) = 0.0;
  }
  return eta;
}

double ValidationError(const L1Design& d, const std::vector<int>& rows,
                       const Vector& source_eta) {
  double sum = 0.0;
  for (int i : rows) {
    const double e = d.r(i) - d.g.row(i).dot(source_eta);
    sum += e * e;
  }
  return sum / static_cast<double>(rows.size());
}

}  // namespace

std::string_view EnsembleMethodName(EnsembleMethod method) {
  switch (method) {
    case EnsembleMethod::kTargetOnly:
      return "target";
    case EnsembleMethod::kSampleSize:
      return "ss";
    case EnsembleMethod::kInverseVariance:
      return "ivw";
    case EnsembleMethod::kAipwL1:
      return "aipw_l1";
    case EnsembleMethod::kMrL1:
      return "mr_l1";
  }
  return "unknown";
}

EnsembleMethod ParseEnsembleMethod(std::string_view name) {
  for (EnsembleMethod m :
       {EnsembleMethod::kTargetOnly, EnsembleMethod::kSampleSize,
        EnsembleMethod::kInverseVariance, EnsembleMethod::kAipwL1,
        EnsembleMethod::kMrL1}) {
    if (EnsembleMethodName(m) == name) return m;
  }
  if (name == "target_only") return EnsembleMethod::kTargetOnly;
  throw FedError(ErrorCode::kInvalidArgument,
                 "unknown method '" + std::string(name) + "'");
}

bool IsL1Method(EnsembleMethod method) {
  return method == EnsembleMethod::kAipwL1 || method == EnsembleMethod::kMrL1;
}

std::string_view WeightModeName(WeightMode mode) {
  return mode == WeightMode::kContrast ? "contrast" : "per_arm";
}

WeightMode ParseWeightMode(std::string_view name) {
  if (name == "contrast") return WeightMode::kContrast;
  if (name == "per_arm") return WeightMode::kPerArm;
  throw FedError(ErrorCode::kInvalidArgument,
                 "unknown weight mode '" + std::string(name) + "'");
}

std::string_view BiasScaleName(BiasScale scale) {
  switch (scale) {
    case BiasScale::kUnit:
      return "unit";
    case BiasScale::kRootNTarget:
      return "root_n_target";
    case BiasScale::kRootN:
      return "root_n";
  }
  return "unknown";
}

BiasScale ParseBiasScale(std::string_view name) {
  if (name == "unit") return BiasScale::kUnit;
  if (name == "root_n") return BiasScale::kRootN;
  if (name == "root_n_target") return BiasScale::kRootNTarget;
  throw FedError(ErrorCode::kInvalidArgument,
                 "unknown bias scale '" + std::string(name) + "'");
}

std::string_view PenaltyScaleName(PenaltyScale scale) {
  return scale == PenaltyScale::kTotal ? "total" : "per_row";
}

PenaltyScale ParsePenaltyScale(std::string_view name) {
  if (name == "total") return PenaltyScale::kTotal;
  if (name == "per_row") return PenaltyScale::kPerRow;
  throw FedError(ErrorCode::kInvalidArgument,
                 "unknown penalty scale '" + std::string(name) + "'");
}

int TargetIndex(const std::vector<SiteEstimate>& estimates) {
  int index = -1;
  for (size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].role != SiteRole::kTarget) continue;
    if (index >= 0) {
      throw FedError(ErrorCode::kInvalidArgument, "more than one target site");
    }
    index = static_cast<int>(k);
  }
  if (index < 0) throw FedError(ErrorCode::kMissingTarget, "no target estimate");
  return index;
}

EnsembleSolution CombineFixed(const std::vector<SiteEstimate>& estimates,
                              FixedScheme scheme, WeightMode mode) {
  const int t = TargetIndex(estimates);
  EnsembleSolution s = BaseSolution(estimates, mode);
  const auto k = static_cast<Eigen::Index>(estimates.size());
  for (int arm = 0; arm < 2; ++arm) {
    Vector eta = Vector::Zero(k);
    switch (scheme) {
      case FixedScheme::kTargetOnly:
        eta(t) = 1.0;
        break;
      case FixedScheme::kSampleSize: {
        const double n = static_cast<double>(TotalUnits(estimates));
        for (Eigen::Index j = 0; j < k; ++j) {
          eta(j) = static_cast<double>(estimates[j].n_k) / n;
        }
        break;
      }
      case FixedScheme::kInverseVariance: {
        const int which = mode == WeightMode::kContrast ? kEffectArm : arm;
        for (Eigen::Index j = 0; j < k; ++j) {
          const double var = SiteVariance(estimates[j], which);
          if (!(var > 0.0) || !std::isfinite(var)) {
            throw FedError(ErrorCode::kZeroVariance,
                           "site '" + estimates[j].site_id +
                               "' has no positive variance");
          }
          eta(j) = 1.0 / var;
        }
        eta /= eta.sum();
        break;
      }
    }
    s.eta[arm] = eta;
  }
  return s;
}

L1Design BuildL1Design(const std::vector<SiteEstimate>& estimates, int arm,
                       BiasScale bias) {
  const int t = TargetIndex(estimates);
  const long total_n = TotalUnits(estimates);
  const SiteEstimate& target = estimates[t];
  const Vector phi_t = Phi(target, total_n, arm).own;
  L1Design d;
  for (size_t k = 0; k < estimates.size(); ++k) {
    if (static_cast<int>(k) != t) d.sources.push_back(static_cast<int>(k));
  }
  const auto p = static_cast<Eigen::Index>(d.sources.size());
  d.g = Matrix::Zero(total_n, p);
  d.r = Vector::Zero(total_n);
  d.delta = Vector(p);
  const Eigen::Index n_t = target.n_k;
  d.r.head(n_t) = phi_t;
  Eigen::Index offset = n_t;
  for (Eigen::Index c = 0; c < p; ++c) {
    const SiteEstimate& src = estimates[d.sources[c]];
    if (src.n_t != target.n_k || !src.HasTargetPart()) {
      throw FedError(ErrorCode::kDimensionMismatch,
                     "source '" + src.site_id + "' lacks target-unit values");
    }
    const InfluenceParts phi = Phi(src, total_n, arm);
    const double delta = Mu(src, arm) - Mu(target, arm);
    d.delta(c) = delta;
    double scale = 1.0;
    if (bias == BiasScale::kRootN) scale = std::sqrt(static_cast<double>(total_n));
    if (bias == BiasScale::kRootNTarget) scale = std::sqrt(static_cast<double>(n_t));
    d.g.col(c).array() -= scale * delta;
    d.g.col(c).head(n_t) += phi_t - phi.on_target;
    offset = n_t;
    for (Eigen::Index j = 0; j < c; ++j) offset += estimates[d.sources[j]].n_k;
    d.g.col(c).segment(offset, src.n_k) -= phi.own;
  }
  return d;
}

Vector SolveL1Weights(const std::vector<SiteEstimate>& estimates, int arm,
                      double lambda, const L1Scaling& scaling,
                      const SolverOptions& options) {
  if (!(lambda >= 0.0)) {
    throw FedError(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  }
  const L1Design d = BuildL1Design(estimates, arm, scaling.bias);
  if (d.sources.empty()) return ToSimplex(estimates, d, Vector());
  return ToSimplex(estimates, d, SolveSourceWeights(d, {}, lambda,
                                                    scaling.penalty, options));
}

L1Selection CrossValidateLambda(const std::vector<SiteEstimate>& estimates,
                                int arm, const std::vector<double>& grid,
                                int n_splits, std::uint64_t seed,
                                const L1Scaling& scaling,
                                const SolverOptions& options) {
  if (grid.empty()) {
    throw FedError(ErrorCode::kInvalidArgument, "empty lambda grid");
  }
  if (n_splits < 1) {
    throw FedError(ErrorCode::kInvalidArgument, "n_splits must be >= 1");
  }
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  const L1Design d = BuildL1Design(estimates, arm, scaling.bias);
  L1Selection out;
  if (d.sources.empty()) {
    out.eta = ToSimplex(estimates, d, Vector());
    out.lambda = sorted.back();
    return out;
  }
  std::vector<double> error(sorted.size(), 0.0);
  for (int s = 0; s < n_splits; ++s) {
    const DataSplit split = SplitData(static_cast<int>(d.r.size()), 0.5,
                                      DeriveSeed(seed, {static_cast<std::uint64_t>(s)}));
    for (size_t l = 0; l < sorted.size(); ++l) {
      const Vector eta = SolveSourceWeights(d, split.train, sorted[l],
                                            scaling.penalty, options);
      error[l] += ValidationError(d, split.validation, eta) / n_splits;
    }
  }
  size_t best = 0;
  for (size_t l = 0; l < sorted.size(); ++l) {
    out.cv_trace.push_back({sorted[l], error[l]});
    if (error[l] <= error[best]) best = l;
  }
  out.lambda = sorted[best];
  out.eta = ToSimplex(estimates, d,
                      SolveSourceWeights(d, {}, out.lambda, scaling.penalty,
                                         options));
  return out;
}

EnsembleSolution SolveL1Ensemble(const std::vector<SiteEstimate>& estimates,
                                 const L1Options& options) {
  EnsembleSolution s = BaseSolution(estimates, options.mode);
  if (options.mode == WeightMode::kContrast) {
    const L1Selection sel =
        CrossValidateLambda(estimates, kEffectArm, options.lambda_grid,
                            options.cv_splits, options.seed, options.scaling);
    for (int arm = 0; arm < 2; ++arm) {
      s.eta[arm] = sel.eta;
      s.lambda[arm] = sel.lambda;
      s.cv_trace[arm] = sel.cv_trace;
    }
  } else {
    for (int arm = 0; arm < 2; ++arm) {
      const L1Selection sel = CrossValidateLambda(
          estimates, arm, options.lambda_grid, options.cv_splits,
          DeriveSeed(options.seed, {static_cast<std::uint64_t>(arm)}),
          options.scaling);
      s.eta[arm] = sel.eta;
      s.lambda[arm] = sel.lambda;
      s.cv_trace[arm] = sel.cv_trace;
    }
  }
  return s;
}

GlobalReport GlobalEstimate(const std::vector<SiteEstimate>& estimates,
                            const EnsembleSolution& solution, double alpha,
                            EnsembleMethod method) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw FedError(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  const int t = TargetIndex(estimates);
  const auto k = static_cast<Eigen::Index>(estimates.size());
  for (int arm = 0; arm < 2; ++arm) {
    if (solution.eta[arm].size() != k) {
      throw FedError(ErrorCode::kDimensionMismatch,
                     "weights do not match the estimates");
    }
  }
  GlobalReport report;
  report.method = method;
  report.alpha = alpha;
  report.solution = solution;
  report.total_n = TotalUnits(estimates);
  const double n = static_cast<double>(report.total_n);
  const SiteEstimate& target = estimates[t];

  for (int arm = 0; arm < 2; ++arm) {
    double shift = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == t) continue;
      shift += solution.eta[arm](j) * (estimates[j].mu[arm] - target.mu[arm]);
    }
    report.mu[arm] = target.mu[arm] + shift;
  }
  report.delta_hat = report.mu[1] - report.mu[0];

  // Combined influence of the effect: target rows, then each source's rows.
  Vector target_rows = Vector::Zero(target.n_k);
  double source_sq = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const SiteEstimate& e = estimates[j];
    Vector own = Vector::Zero(e.n_k);
    for (int arm = 0; arm < 2; ++arm) {
      const double sign = arm == 1 ? 1.0 : -1.0;
      const double w = solution.eta[arm](j);
      if (w == 0.0) continue;
      const InfluenceParts phi = InfluenceValues(e, report.total_n, arm);
      if (j == t) {
        target_rows += sign * w * phi.own;
      } else {
        own += sign * w * phi.own;
        target_rows += sign * w * phi.on_target;
      }
    }
    if (j != t) source_sq += own.squaredNorm();
  }
  report.variance = (target_rows.squaredNorm() + source_sq) / (n * n);
  report.se = std::sqrt(report.variance);
  const double z = NormalQuantile(1.0 - alpha / 2.0);
  report.ci = {report.delta_hat - z * report.se,
               report.delta_hat + z * report.se};

  for (Eigen::Index j = 0; j < k; ++j) {
    const SiteEstimate& e = estimates[j];
    SiteSummary s;
    s.site_id = e.site_id;
    s.role = e.role;
    s.n = e.n_k;
    s.mu = e.mu;
    s.effect = e.Effect();
    s.effect_se = std::sqrt(SiteVariance(e, kEffectArm));
    s.eta = {solution.eta[0](j), solution.eta[1](j)};
    s.warnings = e.diagnostics.warnings;
    report.per_site.push_back(std::move(s));
  }
  return report;
}

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw FedError(ErrorCode::kInvalidArgument, "quantile outside [0, 1]");
  }
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

nlohmann::json ToJson(const EnsembleSolution& solution) {
  auto vec = [](const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json j = {{"site_ids", solution.site_ids},
                      {"mode", WeightModeName(solution.mode)}};
  for (int arm = 0; arm < 2; ++arm) {
    nlohmann::json trace = nlohmann::json::array();
    for (const CvPoint& p : solution.cv_trace[arm]) {
      trace.push_back({{"lambda", p.lambda}, {"error", p.error}});
    }
    j["arm" + std::to_string(arm)] = {{"eta", vec(solution.eta[arm])},
                                      {"lambda", solution.lambda[arm]},
                                      {"delta", vec(solution.delta[arm])},
                                      {"cv_trace", trace}};
  }
  return j;
}

nlohmann::json ToJson(const GlobalReport& report) {
  nlohmann::json sites = nlohmann::json::array();
  for (const SiteSummary& s : report.per_site) {
    sites.push_back({{"site_id", s.site_id},
                     {"role", SiteRoleName(s.role)},
                     {"n", s.n},
                     {"mu0", s.mu[0]},
                     {"mu1", s.mu[1]},
                     {"effect", s.effect},
                     {"effect_se", s.effect_se},
                     {"eta0", s.eta[0]},
                     {"eta1", s.eta[1]},
                     {"warnings", s.warnings}});
  }
  return {{"method", EnsembleMethodName(report.method)},
          {"delta_hat", report.delta_hat},
          {"mu0", report.mu[0]},
          {"mu1", report.mu[1]},
          {"variance", report.variance},
          {"se", report.se},
          {"ci", {report.ci[0], report.ci[1]}},
          {"alpha", report.alpha},
          {"total_n", report.total_n},
          {"solution", ToJson(report.solution)},
          {"per_site", sites},
          {"warnings", report.warnings}};
}

}  // namespace fedcausal
