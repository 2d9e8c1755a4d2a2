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
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "fedcausal/rng.h"
#include "fedcausal/status.h"
#include "test_util.h"

namespace fedcausal {
namespace {

using testing::RandomNormal;

CandidateSpec Treatment(const std::string& id, FeatureMap map = {}) {
  return {id, CandidateTarget::kTreatment, std::move(map)};
}

CandidateSpec Outcome(const std::string& id, FeatureMap map = {}) {
  return {id, CandidateTarget::kOutcome, std::move(map)};
}

FeatureMap Columns(std::vector<int> cols) {
  return {FeatureKind::kSubset, std::move(cols)};
}

// Column 0 drives treatment and outcome; column 1 is pure noise.
SiteFrame SignalAndNoise(int n, std::uint64_t seed) {
  Rng rng = MakeRng(seed, {});
  SiteFrame f;
  f.site_id = "s";
  f.x = RandomNormal(n, 2, rng);
  f.y.resize(n);
  f.a.resize(n);
  for (int i = 0; i < n; ++i) {
    f.a[i] = UniformUnit(rng) < Expit(1.5 * f.x(i, 0)) ? 1.0 : 0.0;
    f.y[i] = 2.0 + 3.0 * f.x(i, 0) + StandardNormal(rng);
  }
  f.shared_cols = {0, 1};
  return f;
}

TEST(SplitDataTest, EvenSplitIsDisjointAndExhaustive) {
  DataSplit s = SplitData(10, 0.5, 1);
  EXPECT_EQ(s.train.size(), 5u);
  EXPECT_EQ(s.validation.size(), 5u);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.begin(), 0);
  EXPECT_EQ(*all.rbegin(), 9);
}

TEST(SplitDataTest, DeterministicAndFloorConvention) {
  DataSplit a = SplitData(7, 0.5, 99);
  DataSplit b = SplitData(7, 0.5, 99);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.train.size(), 3u);
  EXPECT_EQ(a.validation.size(), 4u);
  EXPECT_NE(SplitData(50, 0.5, 1).train, SplitData(50, 0.5, 2).train);
}

TEST(SplitDataTest, RejectsEmptyParts) {
  EXPECT_THROW(SplitData(1, 0.5, 0), FedError);
  EXPECT_THROW(SplitData(10, 1.0, 0), FedError);
  try {
    SplitData(1, 0.5, 0);
  } catch (const FedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewUnits);
  }
}

TEST(DefaultKappaTest, FloorOfLog) {
  EXPECT_EQ(DefaultKappa(1), 1.0);
  EXPECT_EQ(DefaultKappa(2), 1.0);
  EXPECT_EQ(DefaultKappa(8), 2.0);
  EXPECT_EQ(DefaultKappa(21), 3.0);
}

TEST(KangSchaferTest, PrintedFormulas) {
  Matrix x = Matrix::Zero(2, 4);
  x(1, 0) = 2.0;
  Matrix z = KangSchafer(x);
  EXPECT_DOUBLE_EQ(z(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(z(0, 1), 10.0);
  EXPECT_NEAR(z(0, 2), 0.216, 1e-15);
  EXPECT_DOUBLE_EQ(z(0, 3), 400.0);
  EXPECT_NEAR(z(1, 0), 2.718281828, 1e-9);
}

TEST(KangSchaferTest, RowwiseEqualsVectorized) {
  Rng rng = MakeRng(2, {});
  Matrix x = RandomNormal(100, 4, rng);
  Matrix z = KangSchafer(x);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(KangSchafer(x.row(i)), z.row(i));
  }
  EXPECT_THROW(KangSchafer(Matrix::Zero(3, 3)), FedError);
}

TEST(MixPropensityTest, SingleCandidateHasUnitWeight) {
  SiteFrame f = SignalAndNoise(200, 3);
  MixedModel m = MixPropensity(f, {Treatment("x")}, 0.5, 1);
  ASSERT_EQ(m.weights.size(), 1);
  EXPECT_EQ(m.weights[0], 1.0);
}

TEST(MixPropensityTest, IdenticalCandidatesSplitEvenly) {
  SiteFrame f = SignalAndNoise(200, 4);
  MixedModel m = MixPropensity(f, {Treatment("a"), Treatment("b")}, 0.5, 1);
  EXPECT_EQ(m.weights[0], 0.5);
  EXPECT_EQ(m.weights[1], 0.5);
}

TEST(MixPropensityTest, TrueModelDominatesNoise) {
  SiteFrame f = SignalAndNoise(2000, 5);
  MixedModel m = MixPropensity(
      f, {Treatment("signal", Columns({0})), Treatment("noise", Columns({1}))},
      0.5, 7);
  EXPECT_GT(m.weights[0], 0.9);
  EXPECT_NEAR(m.weights.sum(), 1.0, 1e-12);
}

TEST(MixPropensityTest, PermutationEquivariance) {
  SiteFrame f = SignalAndNoise(300, 6);
  std::vector<CandidateSpec> specs = {Treatment("a", Columns({0})),
                                      Treatment("b", Columns({1})),
                                      Treatment("c")};
  MixedModel forward = MixPropensity(f, specs, 0.5, 11);
  std::vector<CandidateSpec> reversed(specs.rbegin(), specs.rend());
  MixedModel backward = MixPropensity(f, reversed, 0.5, 11);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(forward.weights[j], backward.weights[2 - j], 1e-15);
  }
}

TEST(MixPropensityTest, LongValidationSetStaysFinite) {
  // Nearly separated classes make per-unit log-likelihood gaps large; the
  // cumulative sums over 1e5 units would underflow outside log space.
  const int n = 200000;
  Rng rng = MakeRng(7, {});
  SiteFrame f;
  f.x = RandomNormal(n, 2, rng);
  f.y = Vector::Zero(n);
  f.a.resize(n);
  for (int i = 0; i < n; ++i) {
    f.a[i] = UniformUnit(rng) < Expit(8.0 * f.x(i, 0)) ? 1.0 : 0.0;
  }
  MixedModel m = MixPropensity(
      f, {Treatment("signal", Columns({0})), Treatment("noise", Columns({1}))},
      0.5, 3);
  EXPECT_TRUE(m.weights.allFinite());
  EXPECT_NEAR(m.weights.sum(), 1.0, 1e-12);
  EXPECT_GT(m.weights[0], 0.99);
}

TEST(MixOutcomeTest, SingleAndIdenticalCandidates) {
  SiteFrame f = SignalAndNoise(300, 8);
  EXPECT_EQ(MixOutcome(f, 1, {Outcome("x")}, 0.5, 1).weights[0], 1.0);
  MixedModel twin = MixOutcome(f, 0, {Outcome("a"), Outcome("b")}, 0.5, 1);
  EXPECT_EQ(twin.weights[0], 0.5);
  EXPECT_EQ(twin.weights[1], 0.5);
}

TEST(MixOutcomeTest, TrueModelDominatesWrongFeature) {
  SiteFrame f = SignalAndNoise(2000, 9);
  MixedModel m = MixOutcome(
      f, 1, {Outcome("noise", Columns({1})), Outcome("signal", Columns({0}))},
      0.5, 5, 1.0);
  EXPECT_GT(m.weights[1], 0.9);
}

TEST(MixOutcomeTest, UsesOnlyTheRequestedArm) {
  SiteFrame f = SignalAndNoise(400, 10);
  MixedModel m = MixOutcome(f, 1, {Outcome("x")}, 0.5, 5);
  for (int i : m.validation_order) EXPECT_EQ(f.a[i], 1.0);
}

TEST(MixOutcomeTest, TooFewUnitsInArm) {
  SiteFrame f = SignalAndNoise(50, 11);
  f.a.setZero();
  f.a[0] = 1.0;
  try {
    MixOutcome(f, 1, {Outcome("x")}, 0.5, 1);
    FAIL();
  } catch (const FedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewUnits);
  }
}

TEST(MixOutcomeTest, FailedCandidateGetsZeroWeight) {
  SiteFrame f = SignalAndNoise(300, 12);
  f.x.col(1).setConstant(3.0);  // collinear with the intercept
  MixedModel m = MixOutcome(
      f, 1, {Outcome("ok", Columns({0})), Outcome("broken", Columns({1}))},
      0.5, 1);
  EXPECT_EQ(m.weights[1], 0.0);
  EXPECT_EQ(m.weights[0], 1.0);
  EXPECT_TRUE(m.candidates[1].failed);
  EXPECT_FALSE(m.warnings.empty());
}

// Hand-built mixtures for the prediction identities.
NuisanceFit HandFit(std::vector<Vector> pi_coefs, Vector pi_weights) {
  NuisanceFit fit;
  for (size_t j = 0; j < pi_coefs.size(); ++j) {
    FittedCandidate c;
    c.spec = Treatment("c" + std::to_string(j));
    c.fit.coefficients = pi_coefs[j];
    fit.pi.candidates.push_back(c);
  }
  fit.pi.weights = std::move(pi_weights);
  fit.m1 = fit.pi;
  fit.m0 = fit.pi;
  return fit;
}

TEST(PredictTest, ZeroCoefficientsGiveOneHalf) {
  NuisanceFit fit = HandFit({Vector::Zero(3)}, Vector::Ones(1));
  Rng rng = MakeRng(13, {});
  Matrix x = RandomNormal(5, 2, rng);
  Vector p = PredictPropensity(fit, x, 1);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(p[i], 0.5);
}

TEST(PredictTest, ArmsAreComplementsAndMixtureIsLinear) {
  Vector c1(3), c2(3);
  c1 << 0.2, -1.0, 0.5;
  c2 << -0.4, 0.3, 0.1;
  Vector w(2);
  w << 0.3, 0.7;
  NuisanceFit fit = HandFit({c1, c2}, w);
  fit.clip_lo = 1e-9;
  fit.clip_hi = 1 - 1e-9;
  Rng rng = MakeRng(14, {});
  Matrix x = RandomNormal(20, 2, rng);
  Vector p1 = PredictPropensity(fit, x, 1);
  Vector p0 = PredictPropensity(fit, x, 0);
  Matrix design = WithIntercept(x);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(p1[i] + p0[i], 1.0, 1e-15);
    const double expected = 0.3 * Expit(design.row(i).dot(c1)) +
                            0.7 * Expit(design.row(i).dot(c2));
    EXPECT_NEAR(p1[i], expected, 1e-15);
  }
}

TEST(PredictTest, PropensityIsClipped) {
  Vector c(2);
  c << 0.0, 50.0;
  NuisanceFit fit = HandFit({c}, Vector::Ones(1));
  Matrix x(2, 1);
  x << -1, 1;
  Vector p = PredictPropensity(fit, x, 1);
  EXPECT_EQ(p[0], 0.01);
  EXPECT_EQ(p[1], 0.99);
}

TEST(PredictTest, ConstantOutcomeAndDegenerateWeights) {
  SiteFrame f = SignalAndNoise(200, 15);
  f.y.setConstant(4.25);
  NuisanceFit fit =
      FitNuisance(f, {Treatment("x")}, {Outcome("x"), Outcome("x0", Columns({0}))});
  Vector m = PredictOutcome(fit, f.x, 1);
  EXPECT_LT((m.array() - 4.25).abs().maxCoeff(), 1e-10);

  NuisanceFit signal = FitNuisance(SignalAndNoise(200, 16), {Treatment("x")},
                                   {Outcome("a", Columns({0})),
                                    Outcome("b", Columns({1}))});
  signal.m1.weights << 1.0, 0.0;
  const FittedCandidate& first = signal.m1.candidates[0];
  Vector only_first =
      WithIntercept(first.spec.feature_map.Apply(f.x)) * first.fit.coefficients;
  EXPECT_EQ(PredictOutcome(signal, f.x, 1), only_first);
}

TEST(FitNuisanceTest, MixtureBeatsWorstCandidate) {
  SiteFrame f = SignalAndNoise(2000, 17);
  NuisanceFit fit = FitNuisance(
      f, {Treatment("s", Columns({0})), Treatment("n", Columns({1}))},
      {Outcome("s", Columns({0})), Outcome("n", Columns({1}))});
  Vector truth = (2.0 + 3.0 * f.x.col(0).array()).matrix();
  auto rmse = [&](const Vector& pred) {
    return std::sqrt((pred - truth).squaredNorm() / truth.size());
  };
  const double mixture = rmse(PredictOutcome(fit, f.x, 1));
  double worst = 0.0;
  for (const FittedCandidate& c : fit.m1.candidates) {
    worst = std::max(worst, rmse(WithIntercept(c.spec.feature_map.Apply(f.x)) *
                                 c.fit.coefficients));
  }
  EXPECT_LT(mixture, worst);
  for (const MixedModel* m : {&fit.pi, &fit.m0, &fit.m1}) {
    EXPECT_NEAR(m->weights.sum(), 1.0, 1e-12);
    EXPECT_GE(m->weights.minCoeff(), 0.0);
  }
}

TEST(FitNuisanceTest, RiskDominationOverReplications) {
  double mixture_mse = 0.0, best_mse = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    SiteFrame f = SignalAndNoise(2000, 1000 + rep);
    NuisanceOptions opts;
    opts.seed = rep;
    NuisanceFit fit = FitNuisance(
        f, {Treatment("s", Columns({0}))},
        {Outcome("s", Columns({0})), Outcome("n", Columns({1}))}, opts);
    SiteFrame fresh = SignalAndNoise(2000, 5000 + rep);
    Vector truth = (2.0 + 3.0 * fresh.x.col(0).array()).matrix();
    mixture_mse += (PredictOutcome(fit, fresh.x, 1) - truth).squaredNorm();
    const FittedCandidate& correct = fit.m1.candidates[0];
    best_mse += (WithIntercept(correct.spec.feature_map.Apply(fresh.x)) *
                     correct.fit.coefficients -
                 truth)
                    .squaredNorm();
  }
  EXPECT_LE(mixture_mse, 1.1 * best_mse);
}

TEST(CandidateSpecJsonTest, RoundTrip) {
  CandidateSpec spec = Outcome("z", {FeatureKind::kKangSchafer, {0, 1, 2, 3}});
  nlohmann::json j = ToJson(spec);
  EXPECT_EQ(j.at("feature_map").at("kind"), "kangschafer");
  CandidateSpec back = CandidateSpecFromJson(j);
  EXPECT_EQ(back.id, "z");
  EXPECT_EQ(back.target, CandidateTarget::kOutcome);
  EXPECT_EQ(back.feature_map.columns, spec.feature_map.columns);
  j["feature_map"]["kind"] = "spline";
  EXPECT_THROW(CandidateSpecFromJson(j), FedError);
}

}  // namespace
}  // namespace fedcausal
