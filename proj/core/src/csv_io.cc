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

#include "fedcausal/csv_io.h"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedcausal/status.h"

namespace fedcausal {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells = SplitLine(line);
    for (std::string& c : cells) c = Trim(c);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw FedError(ErrorCode::kSchemaError,
                     "row " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) {
    throw FedError(ErrorCode::kSchemaError, "empty CSV");
  }
  return table;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FedError(ErrorCode::kSchemaError, "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "cannot write '" + path + "'");
  }
  out << contents;
  if (!out) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "write to '" + path + "' failed");
  }
}

double ParseCell(const std::string& cell, size_t row,
                 const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size() || errno == ERANGE) {
    throw FedError(ErrorCode::kSchemaError,
                   "row " + std::to_string(row) + ", column '" + column +
                       "': not a number: '" + cell + "'");
  }
  return value;
}

SiteFrame SiteFrameFromCsv(const std::string& text, const std::string& site_id,
                           SiteRole role,
                           const std::vector<std::string>& shared_names) {
  const CsvTable table = ParseCsv(text);
  if (table.header.size() < 3 || table.header[0] != "y" ||
      table.header[1] != "a") {
    throw FedError(ErrorCode::kSchemaError,
                   "site '" + site_id +
                       "': header must start with y,a and list covariates");
  }
  if (table.rows.empty()) {
    throw FedError(ErrorCode::kSchemaError, "site '" + site_id + "' has no rows");
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(table.header.size() - 2);
  SiteFrame frame;
  frame.site_id = site_id;
  frame.role = role;
  frame.y.resize(n);
  frame.a.resize(n);
  frame.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const size_t row_no = static_cast<size_t>(i) + 2;
    frame.y(i) = ParseCell(row[0], row_no, "y");
    frame.a(i) = ParseCell(row[1], row_no, "a");
    for (Eigen::Index c = 0; c < p; ++c) {
      frame.x(i, c) = ParseCell(row[c + 2], row_no, table.header[c + 2]);
    }
  }
  for (const std::string& name : shared_names) {
    const auto it = std::find(table.header.begin() + 2, table.header.end(), name);
    if (it == table.header.end()) {
      throw FedError(ErrorCode::kSchemaError, "site '" + site_id +
                                                  "' lacks shared column '" +
                                                  name + "'");
    }
    frame.shared_cols.push_back(
        static_cast<int>(it - table.header.begin()) - 2);
  }
  if (role == SiteRole::kTarget) {
    for (int c = 0; c < static_cast<int>(p); ++c) {
      if (frame.shared_cols.size() != static_cast<size_t>(p) ||
          frame.shared_cols[c] != c) {
        throw FedError(ErrorCode::kSchemaError,
                       "target covariates must be exactly the shared columns "
                       "in order");
      }
    }
  }
  frame.Validate();
  return frame;
}

std::string SiteFrameToCsv(const SiteFrame& frame) {
  std::string out = "y,a";
  for (Eigen::Index c = 0; c < frame.x.cols(); ++c) {
    out += ",x" + std::to_string(c + 1);
  }
  out += "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", frame.y(i));
    out += buf;
    out += frame.a(i) == 1.0 ? ",1" : ",0";
    for (Eigen::Index c = 0; c < frame.x.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", frame.x(i, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace fedcausal
