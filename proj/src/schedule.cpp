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

#include "bertprep/schedule.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "bertprep/error.hpp"

namespace bertprep::schedule {

std::uint64_t steps_for(const PhaseSpec& p) {
  if (p.tokens == 0 || p.batch_size == 0 || p.seq_len == 0 || !std::isfinite(p.epochs) ||
      p.epochs <= 0) {
    throw ValidationError("invalid phase");
  }
  const long double num = static_cast<long double>(p.tokens) * p.epochs;
  const long double den =
      static_cast<long double>(p.batch_size) * static_cast<long double>(p.seq_len);
  return static_cast<std::uint64_t>(std::floor(num / den));
}

TrainingPlan make_plan(std::uint64_t tokens, std::span<const PhaseConfig> phases) {
  if (phases.empty()) throw ValidationError("a plan needs at least one phase");
  TrainingPlan plan;
  for (const PhaseConfig& c : phases) {
    PhaseSpec spec{tokens, c.epochs, c.batch_size, c.seq_len};
    const std::uint64_t s = steps_for(spec);
    plan.phases.push_back(spec);
    plan.steps.push_back(s);
    plan.total_steps += s;
  }
  return plan;
}

std::string TrainingPlan::to_json() const {
  nlohmann::ordered_json j;
  j["phases"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < phases.size(); ++i) {
    nlohmann::ordered_json p;
    p["tokens"] = phases[i].tokens;
    p["epochs"] = phases[i].epochs;
    p["batch"] = phases[i].batch_size;
    p["seqlen"] = phases[i].seq_len;
    p["steps"] = steps[i];
    j["phases"].push_back(std::move(p));
  }
  j["total_steps"] = total_steps;
  return j.dump(2);
}

namespace {

double parse_positive(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v) || v <= 0) {
    throw ValidationError("phase field '" + key + "' must be a positive number, got '" +
                          value + "'");
  }
  return v;
}

std::uint64_t parse_positive_int(const std::string& key, const std::string& value) {
  const double v = parse_positive(key, value);
  if (v != std::floor(v) || v > 1e18) {
    throw ValidationError("phase field '" + key + "' must be a positive integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

PhaseConfig parse_phase(const std::string& spec) {
  PhaseConfig c;
  bool have_epochs = false, have_batch = false, have_seqlen = false;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("malformed phase item '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "epochs") {
      c.epochs = parse_positive(key, value);
      have_epochs = true;
    } else if (key == "batch") {
      c.batch_size = parse_positive_int(key, value);
      have_batch = true;
    } else if (key == "seqlen") {
      c.seq_len = parse_positive_int(key, value);
      have_seqlen = true;
    } else {
      throw ValidationError("unknown phase field '" + key + "'");
    }
  }
  if (!have_epochs || !have_batch || !have_seqlen) {
    throw ValidationError("phase needs epochs, batch and seqlen: '" + spec + "'");
  }
  return c;
}

std::uint64_t parse_token_count(const std::string& s) {
  std::size_t used = 0;
  long double v = 0;
  try {
    v = std::stold(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(static_cast<double>(v)) || v < 1 || v > 1e18L) {
    throw ValidationError("token count must be a positive number, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(std::floor(v + 0.5L));
}

}  // namespace bertprep::schedule
