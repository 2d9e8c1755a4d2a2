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
// Microbenchmarks for the numerical kernels and one full federated round.

#include <fstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "fedcausal/density_ratio.h"
#include "fedcausal/federation.h"
#include "fedcausal/fedruntime.h"
#include "fedcausal/numkit.h"
#include "fedcausal/rng.h"
#include "fedcausal/simbench.h"

namespace fedcausal {
namespace {

Matrix Normal(int rows, int cols, std::uint64_t seed) {
  Rng rng = MakeRng(seed, {});
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = StandardNormal(rng);
  }
  return m;
}

ScenarioSpec LoadPreset(const std::string& name) {
  std::ifstream in(std::string(FEDCAUSAL_PRESET_DIR) + "/" + name + ".json");
  return ScenarioSpecFromJson(nlohmann::json::parse(in));
}

void BM_NnlsCoordinateDescent(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const Matrix g = Normal(rows, 4, 1);
  const Vector r = Normal(rows, 1, 2).col(0);
  const Vector pen = Vector::Constant(4, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(NnlsCoordinateDescent(g, r, pen));
  }
}
BENCHMARK(BM_NnlsCoordinateDescent)->Arg(1000)->Arg(3000);

void BM_SolveTilt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Matrix target = Normal(n, 4, 3);
  target.array() += 0.3;
  const Matrix source = Normal(n, 4, 4);
  const BasisSpec basis = BasisSpec::For(BasisKind::kLinear, 4);
  const MomentSummary summary = TargetMoments(target, basis);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveTilt(source, summary, basis));
  }
}
BENCHMARK(BM_SolveTilt)->Arg(1000)->Arg(10000);

void BM_FitLogistic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix x = Normal(n, 4, 5);
  Rng rng = MakeRng(6, {});
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = UniformUnit(rng) < Expit(0.5 * x(i, 0) - 0.3 * x(i, 1)) ? 1.0 : 0.0;
  }
  const DesignMatrix design = WithIntercept(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitLogistic(design, y));
  }
}
BENCHMARK(BM_FitLogistic)->Arg(1000)->Arg(10000);

// One replication of the C=1 setting: data generation plus a full round
// for the multiply robust family.
void BM_FederatedRound(benchmark::State& state) {
  const ScenarioSpec spec = LoadPreset("c1");
  ProtocolConfig base;
  base.methods = {EnsembleMethod::kMrL1};
  const ProtocolConfig config = MrFamilyConfig(spec, base);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const std::vector<SiteFrame> frames = GenerateSites(spec, rep++);
    benchmark::DoNotOptimize(RunRound(frames, config));
  }
}
BENCHMARK(BM_FederatedRound)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fedcausal

BENCHMARK_MAIN();
