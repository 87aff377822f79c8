// Copyright 2026 The bertprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bertprep::eval {

enum class Task { kNer, kPos, kDp };

std::string_view to_string(Task task);
Task parse_task(std::string_view s);

// Metric keys shown in transfer matrices: macro_f1 | upos_acc | uas, las.
std::vector<std::string> headline_metrics(Task task);

struct EvalReport {
  Task task = Task::kNer;
  std::string train_lang;
  std::string test_lang;
  std::string model_name;
  std::map<std::string, double> metrics;

  bool operator==(const EvalReport&) const = default;
};

std::string to_json(const EvalReport& report);
std::string to_json(std::span<const EvalReport> reports);
// Accepts one report object or an array of them. Throws ValidationError
// on metric values outside [0, 1] or missing fields.
std::vector<EvalReport> reports_from_json(std::string_view json);

// English names for the language codes used in the tables; unknown codes
// are shown as-is.
std::string language_name(std::string_view code);

struct TransferMatrix {
  Task task = Task::kNer;
  std::vector<std::string> models;  // column order; models[0] is the baseline
  std::vector<std::pair<std::string, std::string>> rows;  // (train, test)
  // cells[row][model] -> metrics; missing cells are nullopt.
  std::vector<std::vector<std::optional<std::map<std::string, double>>>> cells;
};

// Rows keep first-appearance order, monolingual pairs before cross-lingual
// ones; models keep first-appearance order unless `baseline` names one, which
// then moves to the front. Throws ValidationError on mixed tasks or a
// duplicate (train, test, model) triple.
TransferMatrix transfer_matrix(std::span<const EvalReport> reports,
                               std::optional<std::string> baseline = std::nullopt);

// Markdown table: metrics to three decimals, then one signed delta column
// per non-baseline model and metric (model - baseline).
std::string render_markdown(const TransferMatrix& matrix);

}  // namespace bertprep::eval
