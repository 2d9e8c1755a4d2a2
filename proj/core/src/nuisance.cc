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

#include "fedcausal/nuisance.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "fedcausal/rng.h"
#include "fedcausal/status.h"

namespace fedcausal {
namespace {

double Softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                   : std::log1p(std::exp(eta));
}

LinearFit FitCandidate(CandidateTarget target, const DesignMatrix& design,
                       const Vector& response, const SolverOptions& options) {
  return target == CandidateTarget::kTreatment
             ? FitLogistic(design, response, options)
             : FitOls(design, response, options);
}

// Per-unit score of a fitted candidate on held-out rows: Bernoulli
// log-likelihood for treatment models, negative squared error scaled by
// kappa for outcome models. Larger is better.
Vector ValidationScores(CandidateTarget target, const LinearFit& fit,
                        const DesignMatrix& design, const Vector& response,
                        double kappa) {
  const Vector eta = design * fit.coefficients;
  Vector score(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (target == CandidateTarget::kTreatment) {
      score(i) = response(i) * eta(i) - Softplus(eta(i));
    } else {
      const double e = response(i) - eta(i);
      score(i) = -kappa * e * e;
    }
  }
  return score;
}

// Averages, over validation positions i, the softmax of the cumulative
// scores of units before i. Candidates flagged in 'dropped' receive zero.
Vector SequentialWeights(const std::vector<Vector>& scores,
                         const std::vector<bool>& dropped) {
  const int num = static_cast<int>(scores.size());
  std::vector<int> live;
  for (int j = 0; j < num; ++j) {
    if (!dropped[j]) live.push_back(j);
  }
  Vector weights = Vector::Zero(num);
  if (live.empty()) return weights;
  const Eigen::Index m = scores[live.front()].size();
  std::vector<double> cumulative(num, 0.0);
  std::vector<double> total(num, 0.0);
  std::vector<double> compensation(num, 0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int j : live) top = std::max(top, cumulative[j]);
    double norm = 0.0;
    for (int j : live) norm += std::exp(cumulative[j] - top);
    for (int j : live) {
      // Kahan summation of the per-position softmax.
      const double term = std::exp(cumulative[j] - top) / norm;
      const double yv = term - compensation[j];
      const double t = total[j] + yv;
      compensation[j] = (t - total[j]) - yv;
      total[j] = t;
    }
    for (int j : live) cumulative[j] += scores[j](i);
  }
  for (int j : live) weights(j) = total[j] / static_cast<double>(m);
  return weights / weights.sum();
}

struct MixInputs {
  CandidateTarget target;
  const Matrix* x;         // rows eligible for this model
  Vector response;         // aligned with x
  std::vector<int> index;  // site-local index of each row of x
};

MixedModel Mix(const MixInputs& in, const std::vector<CandidateSpec>& specs,
               double fraction, std::uint64_t seed, double kappa,
               int split_count, const SolverOptions& options) {
  if (specs.empty()) {
    throw FedError(ErrorCode::kInvalidArgument, "no candidate models");
  }
  if (split_count < 1) {
    throw FedError(ErrorCode::kInvalidArgument, "split_count must be >= 1");
  }
  for (const CandidateSpec& spec : specs) {
    if (spec.target != in.target) {
      throw FedError(ErrorCode::kInvalidArgument,
                     "candidate '" + spec.id + "' has the wrong target");
    }
  }
  const int num = static_cast<int>(specs.size());
  const int n = static_cast<int>(in.x->rows());

  MixedModel model;
  model.target = in.target;
  model.split_seed = seed;
  model.train_fraction = fraction;

  std::vector<Matrix> features;
  features.reserve(num);
  for (const CandidateSpec& spec : specs) {
    features.push_back(WithIntercept(spec.feature_map.Apply(*in.x)));
  }

  Vector weight_sum = Vector::Zero(num);
  std::vector<bool> ever_live(num, false);
  FedError last_error(ErrorCode::kNoConvergence, "no candidate could be fit");
  for (int split = 0; split < split_count; ++split) {
    const std::uint64_t split_seed =
        split == 0 ? seed : DeriveSeed(seed, {static_cast<std::uint64_t>(split)});
    const DataSplit parts = SplitData(n, fraction, split_seed);
    if (parts.train.size() < 2 || parts.validation.size() < 2) {
      throw FedError(ErrorCode::kTooFewUnits,
                     "model mixing needs two units in each partition");
    }
    if (split == 0) {
      for (int v : parts.validation) model.validation_order.push_back(in.index[v]);
    }
    const Vector y_train = SelectRows(in.response, parts.train);
    const Vector y_val = SelectRows(in.response, parts.validation);
    std::vector<Vector> scores(num);
    std::vector<bool> dropped(num, false);
    for (int j = 0; j < num; ++j) {
      try {
        const LinearFit fit = FitCandidate(
            in.target, SelectRows(features[j], parts.train), y_train, options);
        scores[j] = ValidationScores(in.target, fit,
                                     SelectRows(features[j], parts.validation),
                                     y_val, kappa);
        if (!scores[j].allFinite()) {
          throw FedError(ErrorCode::kNoConvergence, "non-finite validation score");
        }
      } catch (const FedError& e) {
        dropped[j] = true;
        last_error = e;
        model.warnings.push_back("candidate '" + specs[j].id +
                                 "' failed on the training split: " + e.what());
      }
    }
    const Vector w = SequentialWeights(scores, dropped);
    if (w.sum() == 0.0) throw last_error;
    weight_sum += w;
    for (int j = 0; j < num; ++j) ever_live[j] = ever_live[j] || !dropped[j];
  }

  model.candidates.resize(num);
  for (int j = 0; j < num; ++j) {
    FittedCandidate& c = model.candidates[j];
    c.spec = specs[j];
    c.failed = !ever_live[j];
    if (c.failed) continue;
    try {
      c.fit = FitCandidate(in.target, features[j], in.response, options);
      if (!c.fit.converged) {
        model.warnings.push_back("candidate '" + specs[j].id +
                                 "' reached the iteration cap");
      }
    } catch (const FedError& e) {
      c.failed = true;
      last_error = e;
      model.warnings.push_back("candidate '" + specs[j].id +
                               "' failed on the full sample: " + e.what());
    }
  }
  Vector weights = weight_sum;
  for (int j = 0; j < num; ++j) {
    if (model.candidates[j].failed) weights(j) = 0.0;
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw last_error;
  model.weights = weights / total;
  return model;
}

Vector Mixture(const MixedModel& model, const Matrix& x, bool logistic) {
  Vector out = Vector::Zero(x.rows());
  for (size_t j = 0; j < model.candidates.size(); ++j) {
    const double w = model.weights(static_cast<Eigen::Index>(j));
    const FittedCandidate& c = model.candidates[j];
    if (w == 0.0 || c.failed) continue;
    const Vector eta =
        WithIntercept(c.spec.feature_map.Apply(x)) * c.fit.coefficients;
    if (logistic) {
      out += w * eta.unaryExpr([](double e) { return Expit(e); });
    } else {
      out += w * eta;
    }
  }
  return out;
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kRaw:
      return "raw";
    case FeatureKind::kKangSchafer:
      return "kangschafer";
    case FeatureKind::kSubset:
      return "subset";
  }
  return "unknown";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  if (name == "raw") return FeatureKind::kRaw;
  if (name == "kangschafer") return FeatureKind::kKangSchafer;
  if (name == "subset") return FeatureKind::kSubset;
  throw FedError(ErrorCode::kSchemaError,
                 "unknown feature map '" + std::string(name) + "'");
}

Matrix KangSchafer(const Matrix& x) {
  if (x.cols() != 4) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "Kang-Schafer transform needs four columns");
  }
  Matrix z(x.rows(), 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double x1 = x(i, 0), x2 = x(i, 1), x3 = x(i, 2), x4 = x(i, 3);
    z(i, 0) = std::exp(x1 / 2.0);
    z(i, 1) = x2 / (1.0 + std::exp(x1)) + 10.0;
    z(i, 2) = std::pow(x1 * x3 / 25.0 + 0.6, 3);
    z(i, 3) = std::pow(x2 + x4 + 20.0, 2);
  }
  return z;
}

Matrix FeatureMap::Apply(const Matrix& x) const {
  auto pick = [&x](const std::vector<int>& cols) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] < 0 || cols[c] >= x.cols()) {
        throw FedError(ErrorCode::kDimensionMismatch,
                       "feature column out of range");
      }
      out.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
    }
    return out;
  };
  switch (kind) {
    case FeatureKind::kRaw:
      return x;
    case FeatureKind::kSubset:
      return pick(columns);
    case FeatureKind::kKangSchafer:
      return KangSchafer(columns.empty() ? pick({0, 1, 2, 3}) : pick(columns));
  }
  return x;
}

DataSplit SplitData(int n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "train fraction must lie in (0, 1)");
  }
  const int n_train = static_cast<int>(std::floor(n * fraction));
  if (n_train < 1 || n - n_train < 1) {
    throw FedError(ErrorCode::kTooFewUnits,
                   "split leaves an empty partition");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, {0x5b11u}));
  // Fisher-Yates with an explicit bounded draw so the permutation does not
  // depend on the standard library's shuffle.
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(UniformUnit(rng) * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  DataSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.end());
  return split;
}

DataSplit SplitData(const SiteFrame& frame, double fraction,
                    std::uint64_t seed) {
  return SplitData(static_cast<int>(frame.size()), fraction, seed);
}

double DefaultKappa(int num_candidates) {
  return std::max(1.0, std::floor(std::log(static_cast<double>(num_candidates))));
}

MixedModel MixPropensity(const SiteFrame& frame,
                         const std::vector<CandidateSpec>& specs,
                         double fraction, std::uint64_t seed,
                         const SolverOptions& options) {
  MixInputs in{CandidateTarget::kTreatment, &frame.x, frame.a, {}};
  in.index.resize(frame.size());
  std::iota(in.index.begin(), in.index.end(), 0);
  return Mix(in, specs, fraction, seed, 1.0, 1, options);
}

namespace {

MixedModel MixOutcomeImpl(const SiteFrame& frame, int arm,
                          const std::vector<CandidateSpec>& specs,
                          double fraction, std::uint64_t seed, double kappa,
                          int split_count, const SolverOptions& options) {
  const std::vector<int> rows = ArmIndices(frame, arm);
  const Matrix x_arm = SelectRows(frame.x, rows);
  MixInputs in{CandidateTarget::kOutcome, &x_arm, SelectRows(frame.y, rows),
               rows};
  if (kappa <= 0.0) kappa = DefaultKappa(static_cast<int>(specs.size()));
  if (rows.size() < 4) {
    throw FedError(ErrorCode::kTooFewUnits,
                   "too few units in arm " + std::to_string(arm));
  }
  return Mix(in, specs, fraction, seed, kappa, split_count, options);
}

}  // namespace

MixedModel MixOutcome(const SiteFrame& frame, int arm,
                      const std::vector<CandidateSpec>& specs, double fraction,
                      std::uint64_t seed, double kappa,
                      const SolverOptions& options) {
  return MixOutcomeImpl(frame, arm, specs, fraction, seed, kappa, 1, options);
}

NuisanceFit FitNuisance(const SiteFrame& frame,
                        const std::vector<CandidateSpec>& treatment_specs,
                        const std::vector<CandidateSpec>& outcome_specs,
                        const NuisanceOptions& options) {
  if (!(options.clip_lo > 0.0 && options.clip_lo < options.clip_hi &&
        options.clip_hi < 1.0)) {
    throw FedError(ErrorCode::kInvalidArgument, "invalid propensity clip");
  }
  NuisanceFit fit;
  fit.clip_lo = options.clip_lo;
  fit.clip_hi = options.clip_hi;
  MixInputs in{CandidateTarget::kTreatment, &frame.x, frame.a, {}};
  in.index.resize(frame.size());
  std::iota(in.index.begin(), in.index.end(), 0);
  fit.pi = Mix(in, treatment_specs, options.train_fraction, options.seed, 1.0,
               options.split_count, options.solver);
  fit.m1 = MixOutcomeImpl(frame, 1, outcome_specs, options.train_fraction,
                          DeriveSeed(options.seed, {1}), options.kappa,
                          options.split_count, options.solver);
  fit.m0 = MixOutcomeImpl(frame, 0, outcome_specs, options.train_fraction,
                          DeriveSeed(options.seed, {0}), options.kappa,
                          options.split_count, options.solver);
  return fit;
}

Vector MixturePropensity(const MixedModel& model, const Matrix& x) {
  return Mixture(model, x, /*logistic=*/true);
}

Vector MixtureOutcome(const MixedModel& model, const Matrix& x) {
  return Mixture(model, x, /*logistic=*/false);
}

Vector PredictPropensity(const NuisanceFit& fit, const Matrix& x, int arm) {
  Vector p = MixturePropensity(fit.pi, x);
  if (arm == 0) p = (1.0 - p.array()).matrix();
  return p.cwiseMax(fit.clip_lo).cwiseMin(fit.clip_hi);
}

Vector PredictOutcome(const NuisanceFit& fit, const Matrix& x, int arm) {
  return MixtureOutcome(fit.outcome(arm), x);
}

nlohmann::json ToJson(const CandidateSpec& spec) {
  return {{"id", spec.id},
          {"target", spec.target == CandidateTarget::kTreatment ? "treatment"
                                                                 : "outcome"},
          {"feature_map",
           {{"kind", FeatureKindName(spec.feature_map.kind)},
            {"columns", spec.feature_map.columns}}}};
}

CandidateSpec CandidateSpecFromJson(const nlohmann::json& j) {
  try {
    CandidateSpec spec;
    spec.id = j.at("id").get<std::string>();
    const std::string target = j.at("target").get<std::string>();
    if (target == "treatment") {
      spec.target = CandidateTarget::kTreatment;
    } else if (target == "outcome") {
      spec.target = CandidateTarget::kOutcome;
    } else {
      throw FedError(ErrorCode::kSchemaError,
                     "unknown candidate target '" + target + "'");
    }
    const nlohmann::json& fm = j.at("feature_map");
    spec.feature_map.kind = ParseFeatureKind(fm.at("kind").get<std::string>());
    if (fm.contains("columns")) {
      spec.feature_map.columns = fm.at("columns").get<std::vector<int>>();
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FedError(ErrorCode::kSchemaError, e.what());
  }
}

}  // namespace fedcausal
