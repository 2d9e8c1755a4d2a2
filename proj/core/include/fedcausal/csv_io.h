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
// Site data as CSV: header "y,a,<covariate names>", one unit per row.

#ifndef FEDCAUSAL_CSV_IO_H_
#define FEDCAUSAL_CSV_IO_H_

#include <string>
#include <vector>

#include "fedcausal/site_frame.h"

namespace fedcausal {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Splits comma-separated text into a header and rows. Blank lines are
// skipped; a trailing carriage return is dropped. Throws kSchemaError on
// ragged rows or an empty file.
CsvTable ParseCsv(const std::string& text);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

// Parses a full-string decimal number. Throws kSchemaError naming the row
// (1-based, counting the header as row 1) and column on failure.
double ParseCell(const std::string& cell, size_t row, const std::string& column);

// Builds a SiteFrame from site CSV text. shared_names lists the covariate
// columns observed at the target, in target order; for the target every
// covariate column must be listed. Throws kSchemaError for malformed input
// and kDataError for a non-binary treatment.
SiteFrame SiteFrameFromCsv(const std::string& text, const std::string& site_id,
                           SiteRole role,
                           const std::vector<std::string>& shared_names);

// Writes y, a and the covariates as x1..xp with round-trip precision.
std::string SiteFrameToCsv(const SiteFrame& frame);

}  // namespace fedcausal

#endif  // FEDCAUSAL_CSV_IO_H_
