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

// Training step planning: steps = floor(tokens * epochs / (batch * seq_len)).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bertprep::schedule {

struct PhaseSpec {
  std::uint64_t tokens = 0;
  double epochs = 0;
  std::uint64_t batch_size = 0;
  std::uint64_t seq_len = 0;
};

struct PhaseConfig {
  double epochs = 0;
  std::uint64_t batch_size = 0;
  std::uint64_t seq_len = 0;
};

struct TrainingPlan {
  std::vector<PhaseSpec> phases;
  std::vector<std::uint64_t> steps;
  std::uint64_t total_steps = 0;

  // {"phases":[{tokens,epochs,batch,seqlen,steps}...],"total_steps":N}
  std::string to_json() const;
};

// Throws ValidationError("invalid phase") unless every field is positive
// and finite.
std::uint64_t steps_for(const PhaseSpec& phase);

TrainingPlan make_plan(std::uint64_t tokens, std::span<const PhaseConfig> phases);

// Parses "epochs=40,batch=1024,seqlen=128".
PhaseConfig parse_phase(const std::string& spec);

// Parses a token count such as "3.7e9" or "5900000000".
std::uint64_t parse_token_count(const std::string& s);

}  // namespace bertprep::schedule
