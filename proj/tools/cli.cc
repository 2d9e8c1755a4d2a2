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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedcausal/csv_io.h"
#include "fedcausal/federation.h"
#include "fedcausal/fedruntime.h"
#include "fedcausal/simbench.h"
#include "fedcausal/status.h"

namespace fedcausal::cli {
namespace {

namespace fs = std::filesystem;

constexpr char kAllMethods[] = "target,ss,ivw,aipw_l1,mr_l1";
constexpr char kDefaultGrid[] = "0,0.001,0.01,0.1,0.5,1,2,5,10";
constexpr double kMaxFailureRate = 0.01;

int ExitCodeFor(const FedError& e) {
  return e.code() == ErrorCode::kDataError ? kExitDataError : kExitInputError;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

nlohmann::json ParseJsonFile(const std::string& path) {
  const std::string text = ReadFile(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line and column
    const size_t offset = std::min(e.byte, text.size());
    size_t line = 1, column = 1;
    for (size_t i = 0; i + 1 < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw FedError(ErrorCode::kSchemaError,
                   path + ":" + std::to_string(line) + ":" +
                       std::to_string(column) + ": " + e.what());
  }
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "cannot create output directory '" + dir + "'");
  }
}

std::string JoinPath(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  for (const std::string& item : SplitList(text)) {
    const double v = ParseCell(item, 0, "lambda-grid");
    if (!(v >= 0.0)) {
      throw FedError(ErrorCode::kInvalidArgument, "lambda values must be >= 0");
    }
    grid.push_back(v);
  }
  if (grid.empty()) {
    throw FedError(ErrorCode::kInvalidArgument, "empty lambda grid");
  }
  return grid;
}

int Simulate(const std::string& scenario_path,
             const std::vector<std::string>& method_names, int reps,
             long long seed, const std::string& out_dir, double alpha,
             const std::string& lambda_grid, const std::string& weight_mode,
             std::ostream& out, std::ostream& err) {
  return Simulate(scenario_path, method_names, reps, seed, out_dir, alpha,
                  lambda_grid, weight_mode, "root_n_target", "total", out, err);
}

int Simulate(const std::string& scenario_path,
             const std::vector<std::string>& method_names, int reps,
             long long seed, const std::string& out_dir, double alpha,
             const std::string& lambda_grid, const std::string& weight_mode,
             const std::string& bias_scale, const std::string& penalty_scale,
             std::ostream& out, std::ostream& err) {
  try {
    ScenarioSpec spec = ScenarioSpecFromJson(ParseJsonFile(scenario_path));
    if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
    if (reps > 0) spec.replications = reps;
    std::vector<EnsembleMethod> methods;
    for (const std::string& m : method_names) {
      methods.push_back(ParseEnsembleMethod(m));
    }
    ProtocolConfig base;
    base.alpha = alpha;
    base.l1.lambda_grid = ParseGrid(lambda_grid);
    base.l1.mode = ParseWeightMode(weight_mode);
    base.l1.scaling.bias = ParseBiasScale(bias_scale);
    base.l1.scaling.penalty = ParsePenaltyScale(penalty_scale);
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw FedError(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
    }
    EnsureDirectory(out_dir);

    const ScenarioResult result = RunScenario(spec, methods, base);

    WriteFile(JoinPath(out_dir, "metrics.csv"), MetricsCsv(result.metrics));
    WriteFile(JoinPath(out_dir, "replications.csv"),
              ReplicationsCsv(result.replications, spec.num_sites));
    std::string ledger;
    for (const std::string& line : result.ledger_lines) ledger += line + "\n";
    WriteFile(JoinPath(out_dir, "ledger.jsonl"), ledger);

    bool degraded = false;
    nlohmann::json failures = nlohmann::json::object();
    for (const MethodMetrics& m : result.metrics.methods) {
      failures[std::string(EnsembleMethodName(m.method))] = m.failures;
      if (m.failures > kMaxFailureRate * spec.replications) degraded = true;
    }
    nlohmann::json manifest = {
        {"command", "simulate"},
        {"scenario_path", scenario_path},
        {"scenario", ToJson(spec)},
        {"methods", method_names},
        {"replications", spec.replications},
        {"seed", spec.seed},
        {"alpha", alpha},
        {"lambda_grid", base.l1.lambda_grid},
        {"weight_mode", weight_mode},
        {"bias_scale", bias_scale},
        {"penalty_scale", penalty_scale},
        {"failures", failures},
        {"degraded", degraded},
        {"audit",
         {{"rounds", result.audit.rounds},
          {"violations", result.audit.violations},
          {"census_mismatches", result.audit.census_mismatches},
          {"bytes", result.audit.bytes}}},
        {"outputs",
         {"metrics.csv", "replications.csv", "ledger.jsonl", "manifest.json"}}};
    WriteFile(JoinPath(out_dir, "manifest.json"), manifest.dump(2) + "\n");

    out << MetricsCsv(result.metrics);
    if (degraded) {
      err << "more than 1% of replications failed\n";
      return kExitDegraded;
    }
    if (result.audit.violations > 0 || result.audit.census_mismatches > 0) {
      err << "privacy audit found " << result.audit.violations
          << " violations and " << result.audit.census_mismatches
          << " census mismatches\n";
      return kExitDegraded;
    }
    return kExitOk;
  } catch (const FedError& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
}

int Estimate(const std::vector<std::string>& site_csvs,
             const std::string& config_path, const std::string& out_dir,
             std::ostream& out, std::ostream& err) {
  try {
    const nlohmann::json config_json = ParseJsonFile(config_path);
    std::string target_name;
    std::vector<std::string> shared;
    EnsembleMethod method = EnsembleMethod::kMrL1;
    ProtocolConfig config;
    try {
      target_name = config_json.at("target").get<std::string>();
      shared = config_json.at("shared_columns").get<std::vector<std::string>>();
      if (config_json.contains("method")) {
        method = ParseEnsembleMethod(config_json.at("method").get<std::string>());
      }
      if (config_json.contains("protocol")) {
        config = ProtocolConfigFromJson(config_json.at("protocol"));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FedError(ErrorCode::kSchemaError,
                     config_path + ": " + std::string(e.what()));
    }
    if (config.default_models.treatment.empty()) {
      FeatureMap raw;
      config.default_models.treatment = {
          {"pi_x", CandidateTarget::kTreatment, raw}};
      config.default_models.outcome = {{"m_x", CandidateTarget::kOutcome, raw}};
    }
    config.methods = {method};

    const fs::path target_path(target_name);
    std::vector<SiteFrame> frames;
    bool found_target = false;
    for (const std::string& csv : site_csvs) {
      const fs::path p(csv);
      const bool is_target =
          p == target_path || p.filename() == target_path.filename();
      if (is_target && found_target) {
        throw FedError(ErrorCode::kSchemaError,
                       "more than one CSV matches the target");
      }
      found_target = found_target || is_target;
      frames.push_back(SiteFrameFromCsv(
          ReadFile(csv), p.stem().string(),
          is_target ? SiteRole::kTarget : SiteRole::kSource, shared));
    }
    if (!found_target) {
      throw FedError(ErrorCode::kSchemaError,
                     "target CSV '" + target_name + "' is not among the inputs");
    }
    EnsureDirectory(out_dir);
    const RoundResult result = RunRound(frames, config);
    const AuditSummary audit = AuditLedger(result.ledger);
    nlohmann::json report = ToJson(result.reports.front());
    report["excluded_sites"] = result.excluded_sites;
    report["privacy_audit"] = {{"violations", audit.violations},
                               {"messages_by_kind", audit.messages_by_kind},
                               {"bytes_by_kind", audit.bytes_by_kind}};
    WriteFile(JoinPath(out_dir, "report.json"), report.dump(2) + "\n");
    WriteFile(JoinPath(out_dir, "ledger.jsonl"), LedgerToJsonLines(result.ledger));
    const GlobalReport& r = result.reports.front();
    out << "delta_hat " << r.delta_hat << "  se " << r.se << "  ci ["
        << r.ci[0] << ", " << r.ci[1] << "]\n";
    return kExitOk;
  } catch (const FedError& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
}

int Report(const std::string& replications_csv, std::ostream& out,
           std::ostream& err) {
  try {
    const CsvTable table = ParseCsv(ReadFile(replications_csv));
    auto column = [&table](const std::string& name, bool required) -> int {
      const auto it = std::find(table.header.begin(), table.header.end(), name);
      if (it == table.header.end()) {
        if (required) {
          throw FedError(ErrorCode::kSchemaError,
                         "missing column '" + name + "'");
        }
        return -1;
      }
      return static_cast<int>(it - table.header.begin());
    };
    const int c_method = column("method", true);
    const int c_delta = column("delta_hat", true);
    const int c_lo = column("ci_lo", true);
    const int c_hi = column("ci_hi", true);
    const int c_ok = column("ok", false);
    if (table.rows.empty()) {
      throw FedError(ErrorCode::kSchemaError, "no replication rows");
    }
    std::vector<EnsembleMethod> methods;
    std::vector<ReplicationRecord> records;
    for (size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      const size_t row_no = i + 2;
      ReplicationRecord r;
      r.method = ParseEnsembleMethod(row[c_method]);
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
        methods.push_back(r.method);
      }
      r.ok = c_ok < 0 || ParseCell(row[c_ok], row_no, "ok") != 0.0;
      r.delta_hat = ParseCell(row[c_delta], row_no, "delta_hat");
      r.ci_lo = ParseCell(row[c_lo], row_no, "ci_lo");
      r.ci_hi = ParseCell(row[c_hi], row_no, "ci_hi");
      r.covered = r.ci_lo <= 0.0 && 0.0 <= r.ci_hi;
      records.push_back(r);
    }
    const MetricsTable metrics = Aggregate(records, methods, "report");
    constexpr int kWidth = 10;
    auto pad = [](const std::string& s, int width) {
      return std::string(std::max(0, width - static_cast<int>(s.size())), ' ') + s;
    };
    std::string text = pad("", 6);
    for (const MethodMetrics& m : metrics.methods) {
      text += pad(std::string(EnsembleMethodName(m.method)), kWidth);
    }
    text += "\n";
    const std::pair<const char*, double MethodMetrics::*> rows[] = {
        {"MAE", &MethodMetrics::mae},
        {"RMSE", &MethodMetrics::rmse},
        {"Cov.", &MethodMetrics::coverage},
        {"Len.", &MethodMetrics::ci_length}};
    for (const auto& [label, field] : rows) {
      std::string line = "  " + std::string(label);
      line += std::string(6 - line.size(), ' ');
      for (const MethodMetrics& m : metrics.methods) {
        line += pad(Fixed(m.*field, 3), kWidth);
      }
      text += line + "\n";
    }
    std::string reps = "  n   ";
    for (const MethodMetrics& m : metrics.methods) {
      reps += pad(std::to_string(m.replications), kWidth);
    }
    text += reps + "\n";
    out << text;
    return kExitOk;
  } catch (const FedError& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Federated estimation of target average treatment effects",
               "fedcausal"};
  app.require_subcommand(1);

  std::string scenario, out_dir, methods = kAllMethods, grid = kDefaultGrid;
  std::string mode = "contrast", bias_scale = "root_n_target", penalty_scale = "total";
  int reps = -1;
  long long seed = -1;
  double alpha = 0.05;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  simulate->add_option("--scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--methods", methods, "Comma-separated methods");
  simulate->add_option("--reps", reps, "Replications (default: scenario)");
  simulate->add_option("--seed", seed, "Seed (default: scenario)");
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--alpha", alpha, "Interval level");
  simulate->add_option("--lambda-grid", grid, "Comma-separated penalty grid");
  simulate->add_option("--weight-mode", mode, "contrast or per_arm");
  simulate->add_option("--bias-scale", bias_scale, "unit, root_n_target or root_n");
  simulate->add_option("--penalty-scale", penalty_scale, "total or per_row");

  std::vector<std::string> sites;
  std::string config, est_out;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate from site CSVs");
  estimate->add_option("--sites,sites", sites, "Site CSV files")->required();
  estimate->add_option("--config", config, "Estimation config JSON")->required();
  estimate->add_option("--out", est_out, "Output directory")->required();

  std::string replications;
  CLI::App* report = app.add_subcommand("report", "Summarize replications.csv");
  report->add_option("replications", replications, "replications.csv")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }
  if (simulate->parsed()) {
    return Simulate(scenario, SplitList(methods), reps, seed, out_dir, alpha,
                    grid, mode, bias_scale, penalty_scale, out, err);
  }
  if (estimate->parsed()) return Estimate(sites, config, est_out, out, err);
  return Report(replications, out, err);
}

}  // namespace fedcausal::cli
