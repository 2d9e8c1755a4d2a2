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
// The fedcausal command line: simulate, estimate and report.

#ifndef FEDCAUSAL_TOOLS_CLI_H_
#define FEDCAUSAL_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fedcausal::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegraded = 3;
inline constexpr int kExitDataError = 4;

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int Simulate(const std::string& scenario_path,
             const std::vector<std::string>& methods, int reps,
             long long seed, const std::string& out_dir, double alpha,
             const std::string& lambda_grid, const std::string& weight_mode,
             std::ostream& out, std::ostream& err);
int Simulate(const std::string& scenario_path,
             const std::vector<std::string>& methods, int reps,
             long long seed, const std::string& out_dir, double alpha,
             const std::string& lambda_grid, const std::string& weight_mode,
             const std::string& bias_scale, const std::string& penalty_scale,
             std::ostream& out, std::ostream& err);

int Estimate(const std::vector<std::string>& site_csvs,
             const std::string& config_path, const std::string& out_dir,
             std::ostream& out, std::ostream& err);

int Report(const std::string& replications_csv, std::ostream& out,
           std::ostream& err);

// "0,0.001,0.01" -> {0, 0.001, 0.01}.
std::vector<double> ParseGrid(const std::string& text);

}  // namespace fedcausal::cli

#endif  // FEDCAUSAL_TOOLS_CLI_H_
