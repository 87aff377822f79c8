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

// End-to-end run: dedup -> sample -> vocab -> pretrain-data -> schedule.
//
// Every stage records its parameters and the SHA-256 of its inputs and
// outputs in <output_dir>/manifest.json. A stage whose parameters and input
// hashes match the previous manifest, and whose outputs are still present
// and unchanged, is skipped.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bertprep/corpus.hpp"
#include "bertprep/error.hpp"
#include "bertprep/pretrain_data.hpp"
#include "bertprep/schedule.hpp"

namespace bertprep::pipeline {

inline constexpr std::string_view kToolName = "bertprep";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

struct LanguageConfig {
  std::string code;
  std::vector<std::string> corpus;  // as written in the config file
  std::uint64_t vocab_budget = 0;   // 0: use the whole deduplicated corpus
};

struct DedupConfig {
  std::size_t n = 9;
  double threshold = 0.9;
  Granularity granularity = Granularity::kSentence;
};

struct VocabConfig {
  std::size_t target_size = 30000;
  double tolerance = 0.02;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 4;
};

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string output_dir = "out";
  unsigned jobs = 1;
  std::vector<LanguageConfig> languages;
  DedupConfig dedup;
  VocabConfig vocab;
  // Sentence-granularity corpora are cut into documents of this many
  // consecutive sentences; paragraph corpora use one paragraph per document.
  std::size_t sentences_per_document = 16;
  std::vector<schedule::PhaseConfig> phases;
  pretrain::MaskingConfig masking;

  // Parses and validates (see config_schema_json). Throws ValidationError.
  static PipelineConfig from_json(std::string_view json, std::filesystem::path base_dir);
  static PipelineConfig load_file(const std::filesystem::path& path);

  // Value checks plus readability of every corpus file. Touches no files.
  void validate() const;

  std::filesystem::path resolve(const std::string& p) const;
};

// JSON Schema (draft 2020-12) for the configuration file.
std::string config_schema_json();

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  bool force = false;
  std::ostream* events = nullptr;   // JSON lines
  std::ostream* summary = nullptr;  // human-readable
};

struct StageOutcome {
  std::string name;
  bool skipped = false;
};

struct RunResult {
  std::vector<StageOutcome> stages;
  std::filesystem::path manifest_path;
};

// Validates, then runs every stage in order. Throws ValidationError before
// touching the filesystem when the config is invalid, and StageError naming
// the stage for failures after that.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

std::string version_info(bool json);

}  // namespace bertprep::pipeline
