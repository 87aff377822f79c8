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

#include "bertprep/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>
#include <tuple>

#include "bertprep/error.hpp"

namespace bertprep::eval {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kNer: return "ner";
    case Task::kPos: return "pos";
    case Task::kDp: return "dp";
  }
  return "ner";
}

Task parse_task(std::string_view s) {
  if (s == "ner") return Task::kNer;
  if (s == "pos") return Task::kPos;
  if (s == "dp") return Task::kDp;
  throw ValidationError("task must be ner, pos or dp, got '" + std::string(s) + "'");
}

std::vector<std::string> headline_metrics(Task task) {
  switch (task) {
    case Task::kNer: return {"macro_f1"};
    case Task::kPos: return {"upos_acc"};
    case Task::kDp: return {"uas", "las"};
  }
  return {};
}

namespace {

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["task"] = to_string(r.task);
  j["train_lang"] = r.train_lang;
  j["test_lang"] = r.test_lang;
  j["model"] = r.model_name;
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  return j;
}

EvalReport report_from(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("report must be a JSON object");
  EvalReport r;
  try {
    r.task = parse_task(j.at("task").get<std::string>());
    r.train_lang = j.at("train_lang").get<std::string>();
    r.test_lang = j.at("test_lang").get<std::string>();
    r.model_name = j.at("model").get<std::string>();
    for (const auto& [k, v] : j.at("metrics").items()) {
      const double x = v.get<double>();
      if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("metric '" + k + "' = " + std::to_string(x) + " outside [0, 1]");
      }
      r.metrics[k] = x;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return r;
}

// Value in thousandths, so cells and deltas agree with what is printed.
long long thousandths(double v) { return std::llround(v * 1000.0); }

std::string format_fixed3(long long th, bool sign) {
  const bool neg = th < 0;
  const long long a = neg ? -th : th;
  std::string frac = std::to_string(a % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  std::string out;
  if (neg) {
    out = "-";
  } else if (sign) {
    out = "+";
  }
  return out + std::to_string(a / 1000) + "." + frac;
}

std::string metric_label(std::string_view metric) {
  if (metric == "uas") return "UAS";
  if (metric == "las") return "LAS";
  if (metric == "upos_acc") return "UPOS";
  if (metric == "macro_f1") return "F1";
  return std::string(metric);
}

}  // namespace

std::string to_json(const EvalReport& report) { return report_json(report).dump(2); }

std::string to_json(std::span<const EvalReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const EvalReport& r : reports) arr.push_back(report_json(r));
  return arr.dump(2);
}

std::vector<EvalReport> reports_from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  std::vector<EvalReport> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(report_from(item));
  } else {
    out.push_back(report_from(j));
  }
  return out;
}

std::string language_name(std::string_view code) {
  static const std::pair<std::string_view, std::string_view> kNames[] = {
      {"hr", "Croatian"}, {"sl", "Slovenian"}, {"en", "English"},
      {"fi", "Finnish"},  {"et", "Estonian"},
  };
  for (const auto& [c, name] : kNames) {
    if (c == code) return std::string(name);
  }
  return std::string(code);
}

TransferMatrix transfer_matrix(std::span<const EvalReport> reports,
                               std::optional<std::string> baseline) {
  TransferMatrix m;
  if (reports.empty()) return m;
  m.task = reports.front().task;

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const EvalReport& r : reports) {
    if (r.task != m.task) throw ValidationError("reports mix tasks");
    if (!seen.emplace(r.train_lang, r.test_lang, r.model_name).second) {
      throw ValidationError("duplicate report for (" + r.train_lang + ", " + r.test_lang +
                            ", " + r.model_name + ")");
    }
    if (std::find(m.models.begin(), m.models.end(), r.model_name) == m.models.end()) {
      m.models.push_back(r.model_name);
    }
    const std::pair<std::string, std::string> key{r.train_lang, r.test_lang};
    if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
  }
  if (baseline) {
    auto it = std::find(m.models.begin(), m.models.end(), *baseline);
    if (it == m.models.end()) throw ValidationError("baseline model '" + *baseline + "' has no reports");
    std::rotate(m.models.begin(), it, it + 1);
  }
  std::stable_partition(pairs.begin(), pairs.end(),
                        [](const auto& p) { return p.first == p.second; });
  m.rows = std::move(pairs);

  m.cells.assign(m.rows.size(),
                 std::vector<std::optional<std::map<std::string, double>>>(m.models.size()));
  for (const EvalReport& r : reports) {
    const auto row = std::find(m.rows.begin(), m.rows.end(),
                               std::make_pair(r.train_lang, r.test_lang)) - m.rows.begin();
    const auto col = std::find(m.models.begin(), m.models.end(), r.model_name) - m.models.begin();
    m.cells[row][col] = r.metrics;
  }
  return m;
}

std::string render_markdown(const TransferMatrix& m) {
  const std::vector<std::string> metrics = headline_metrics(m.task);
  const bool multi = metrics.size() > 1;
  auto header_for = [&](const std::string& prefix, const std::string& metric) {
    return multi ? prefix + " " + metric_label(metric) : prefix;
  };

  std::vector<std::string> header = {"Train lang", "Test lang"};
  for (const std::string& model : m.models) {
    for (const std::string& metric : metrics) header.push_back(header_for(model, metric));
  }
  for (std::size_t c = 1; c < m.models.size(); ++c) {
    for (const std::string& metric : metrics) {
      header.push_back(header_for("Δ " + m.models[c], metric));
    }
  }

  std::string out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    out += "|";
    for (const std::string& cell : cells) out += " " + cell + " |";
    out += "\n";
  };
  emit_row(header);
  out += "|---|---|";
  for (std::size_t i = 2; i < header.size(); ++i) out += "---:|";
  out += "\n";

  auto value = [&](std::size_t row, std::size_t col,
                   const std::string& metric) -> std::optional<long long> {
    const auto& cell = m.cells[row][col];
    if (!cell) return std::nullopt;
    auto it = cell->find(metric);
    if (it == cell->end()) return std::nullopt;
    return thousandths(it->second);
  };

  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    std::vector<std::string> cells = {language_name(m.rows[r].first),
                                      language_name(m.rows[r].second)};
    for (std::size_t c = 0; c < m.models.size(); ++c) {
      for (const std::string& metric : metrics) {
        const auto v = value(r, c, metric);
        cells.push_back(v ? format_fixed3(*v, false) : "");
      }
    }
    for (std::size_t c = 1; c < m.models.size(); ++c) {
      for (const std::string& metric : metrics) {
        const auto v = value(r, c, metric);
        const auto base = value(r, 0, metric);
        cells.push_back(v && base ? format_fixed3(*v - *base, true) : "");
      }
    }
    emit_row(cells);
  }
  return out;
}

}  // namespace bertprep::eval
