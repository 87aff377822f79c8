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

#include "bertprep/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "bertprep/dedup.hpp"
#include "bertprep/hash.hpp"
#include "bertprep/io.hpp"
#include "bertprep/rng.hpp"
#include "bertprep/vocab.hpp"

namespace bertprep::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

void expect_object(const json& j, const std::string& where,
                   std::initializer_list<std::string_view> allowed,
                   std::initializer_list<std::string_view> required) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
  for (std::string_view key : required) {
    if (!j.contains(std::string(key))) {
      throw ValidationError(where + ": missing key '" + std::string(key) + "'");
    }
  }
}

std::uint64_t get_uint(const json& j, const std::string& key, const std::string& where,
                       std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ValidationError(where + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double get_number(const json& j, const std::string& key, const std::string& where,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

bool valid_code(const std::string& code) {
  return !code.empty() && code.size() <= 16 &&
         std::all_of(code.begin(), code.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_';
         });
}

}  // namespace

PipelineConfig PipelineConfig::from_json(std::string_view text, fs::path base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  expect_object(j, "config",
                {"schema_version", "output_dir", "jobs", "languages", "dedup", "vocab",
                 "documents", "phases", "masking"},
                {"schema_version", "languages", "phases"});
  if (!j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kConfigSchemaVersion) {
    throw ValidationError("config: schema_version must be " +
                          std::to_string(kConfigSchemaVersion));
  }

  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  c.output_dir = get_string(j, "output_dir", "config", c.output_dir);
  c.jobs = static_cast<unsigned>(get_uint(j, "jobs", "config", 1));

  if (!j["languages"].is_array()) throw ValidationError("config.languages: expected an array");
  for (std::size_t i = 0; i < j["languages"].size(); ++i) {
    const json& l = j["languages"][i];
    const std::string where = "config.languages[" + std::to_string(i) + "]";
    expect_object(l, where, {"code", "corpus", "vocab_budget"}, {"code", "corpus"});
    LanguageConfig lc;
    lc.code = get_string(l, "code", where, "");
    const json& corpus = l["corpus"];
    if (corpus.is_string()) {
      lc.corpus.push_back(corpus.get<std::string>());
    } else if (corpus.is_array()) {
      for (const json& p : corpus) {
        if (!p.is_string()) throw ValidationError(where + ".corpus: expected strings");
        lc.corpus.push_back(p.get<std::string>());
      }
    } else {
      throw ValidationError(where + ".corpus: expected a path or list of paths");
    }
    lc.vocab_budget = get_uint(l, "vocab_budget", where, 0);
    c.languages.push_back(std::move(lc));
  }

  if (j.contains("dedup")) {
    const json& d = j["dedup"];
    expect_object(d, "config.dedup", {"n", "threshold", "granularity"}, {});
    c.dedup.n = get_uint(d, "n", "config.dedup", c.dedup.n);
    c.dedup.threshold = get_number(d, "threshold", "config.dedup", c.dedup.threshold);
    c.dedup.granularity = parse_granularity(
        get_string(d, "granularity", "config.dedup", std::string(to_string(c.dedup.granularity))));
  }
  if (j.contains("vocab")) {
    const json& v = j["vocab"];
    expect_object(v, "config.vocab", {"target_size", "tolerance", "seed", "max_iterations"}, {});
    c.vocab.target_size = get_uint(v, "target_size", "config.vocab", c.vocab.target_size);
    c.vocab.tolerance = get_number(v, "tolerance", "config.vocab", c.vocab.tolerance);
    c.vocab.seed = get_uint(v, "seed", "config.vocab", c.vocab.seed);
    c.vocab.max_iterations = get_uint(v, "max_iterations", "config.vocab", c.vocab.max_iterations);
  }
  if (j.contains("documents")) {
    const json& d = j["documents"];
    expect_object(d, "config.documents", {"sentences_per_document"}, {});
    c.sentences_per_document =
        get_uint(d, "sentences_per_document", "config.documents", c.sentences_per_document);
  }

  if (!j["phases"].is_array()) throw ValidationError("config.phases: expected an array");
  for (std::size_t i = 0; i < j["phases"].size(); ++i) {
    const json& p = j["phases"][i];
    const std::string where = "config.phases[" + std::to_string(i) + "]";
    expect_object(p, where, {"epochs", "batch", "seqlen"}, {"epochs", "batch", "seqlen"});
    c.phases.push_back({get_number(p, "epochs", where, 0), get_uint(p, "batch", where, 0),
                        get_uint(p, "seqlen", where, 0)});
  }

  if (j.contains("masking")) {
    const json& m = j["masking"];
    expect_object(m, "config.masking",
                  {"mask_prob", "replace_mask", "replace_random", "keep_original",
                   "max_predictions_per_seq", "rng_seed", "dupe_factor", "random_next_prob"},
                  {});
    auto& mk = c.masking;
    mk.mask_prob = get_number(m, "mask_prob", "config.masking", mk.mask_prob);
    mk.replace_mask = get_number(m, "replace_mask", "config.masking", mk.replace_mask);
    mk.replace_random = get_number(m, "replace_random", "config.masking", mk.replace_random);
    mk.keep_original = get_number(m, "keep_original", "config.masking", mk.keep_original);
    mk.max_predictions_per_seq =
        get_uint(m, "max_predictions_per_seq", "config.masking", mk.max_predictions_per_seq);
    mk.rng_seed = get_uint(m, "rng_seed", "config.masking", mk.rng_seed);
    mk.dupe_factor = get_uint(m, "dupe_factor", "config.masking", mk.dupe_factor);
    mk.random_next_prob = get_number(m, "random_next_prob", "config.masking", mk.random_next_prob);
  }

  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load_file(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return from_json(text, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

fs::path PipelineConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

void PipelineConfig::validate() const {
  if (jobs == 0) throw ValidationError("config.jobs must be >= 1");
  if (output_dir.empty()) throw ValidationError("config.output_dir must not be empty");
  if (languages.empty()) throw ValidationError("config.languages must not be empty");

  std::set<std::string> codes;
  std::set<fs::path> paths;
  const fs::path out = fs::weakly_canonical(resolve(output_dir));
  for (const LanguageConfig& l : languages) {
    if (!valid_code(l.code)) throw ValidationError("invalid language code '" + l.code + "'");
    if (!codes.insert(l.code).second) {
      throw ValidationError("duplicate language code '" + l.code + "'");
    }
  }
  for (const LanguageConfig& l : languages) {
    if (l.corpus.empty()) throw ValidationError("language '" + l.code + "' has no corpus");
    for (const std::string& p : l.corpus) {
      const fs::path full = fs::weakly_canonical(resolve(p));
      if (!paths.insert(full).second) {
        throw ValidationError("corpus path listed twice: " + p);
      }
      if (full == out) throw ValidationError("corpus path equals output_dir: " + p);
      std::ifstream probe(full);
      if (!probe) throw ValidationError("cannot read corpus " + full.string());
    }
  }
  if (dedup.n == 0) throw ValidationError("config.dedup.n must be >= 1");
  if (!(dedup.threshold >= 0.0 && dedup.threshold <= 1.0)) {
    throw ValidationError("config.dedup.threshold must lie in [0, 1]");
  }
  if (vocab.target_size == 0) throw ValidationError("config.vocab.target_size must be >= 1");
  if (!(vocab.tolerance >= 0.0)) throw ValidationError("config.vocab.tolerance must be >= 0");
  if (vocab.max_iterations == 0) throw ValidationError("config.vocab.max_iterations must be >= 1");
  if (sentences_per_document == 0) {
    throw ValidationError("config.documents.sentences_per_document must be >= 1");
  }
  if (phases.empty()) throw ValidationError("config.phases must not be empty");
  for (const schedule::PhaseConfig& p : phases) {
    if (!(p.epochs > 0) || p.batch_size == 0 || p.seq_len == 0) {
      throw ValidationError("invalid phase");
    }
    if (p.seq_len < pretrain::kMinSeqLen) {
      throw ValidationError("phase seqlen must be >= " + std::to_string(pretrain::kMinSeqLen));
    }
  }
  masking.validate();
}

std::string config_schema_json() {
  static const char* kSchema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "bertprep pipeline configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["schema_version", "languages", "phases"],
  "properties": {
    "schema_version": {"const": 1},
    "output_dir": {"type": "string", "minLength": 1, "default": "out"},
    "jobs": {"type": "integer", "minimum": 1, "default": 1},
    "languages": {
      "type": "array",
      "minItems": 1,
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["code", "corpus"],
        "properties": {
          "code": {"type": "string", "pattern": "^[A-Za-z0-9_-]{1,16}$"},
          "corpus": {
            "oneOf": [
              {"type": "string"},
              {"type": "array", "minItems": 1, "items": {"type": "string"}}
            ]
          },
          "vocab_budget": {"type": "integer", "minimum": 0, "default": 0}
        }
      }
    },
    "dedup": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 1, "default": 9},
        "threshold": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.9},
        "granularity": {"enum": ["sentence", "paragraph"], "default": "sentence"}
      }
    },
    "vocab": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "target_size": {"type": "integer", "minimum": 1, "default": 30000},
        "tolerance": {"type": "number", "minimum": 0, "default": 0.02},
        "seed": {"type": "integer", "minimum": 0, "default": 1},
        "max_iterations": {"type": "integer", "minimum": 1, "default": 4}
      }
    },
    "documents": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "sentences_per_document": {"type": "integer", "minimum": 1, "default": 16}
      }
    },
    "phases": {
      "type": "array",
      "minItems": 1,
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["epochs", "batch", "seqlen"],
        "properties": {
          "epochs": {"type": "number", "exclusiveMinimum": 0},
          "batch": {"type": "integer", "minimum": 1},
          "seqlen": {"type": "integer", "minimum": 16}
        }
      }
    },
    "masking": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "mask_prob": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.15},
        "replace_mask": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.8},
        "replace_random": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.1},
        "keep_original": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.1},
        "max_predictions_per_seq": {"type": "integer", "minimum": 0, "default": 0},
        "rng_seed": {"type": "integer", "minimum": 0, "default": 12345},
        "dupe_factor": {"type": "integer", "minimum": 1, "default": 1},
        "random_next_prob": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.5}
      }
    }
  }
}
)";
  return kSchema;
}

std::string version_info(bool as_json) {
  if (as_json) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["config_schema_version"] = kConfigSchemaVersion;
    return j.dump() + "\n";
  }
  return std::string(kToolName) + " " + std::string(kToolVersion) + " (config schema " +
         std::to_string(kConfigSchemaVersion) + ")\n";
}

// ---------------------------------------------------------------------------
// Stages

namespace {

struct FileRef {
  std::string name;  // as recorded in the manifest
  fs::path path;     // on disk
};

ordered_json hash_list(const std::vector<FileRef>& files) {
  ordered_json arr = ordered_json::array();
  for (const FileRef& f : files) {
    arr.push_back({{"path", f.name}, {"sha256", sha256_file(f.path)}});
  }
  return arr;
}

class Runner {
 public:
  Runner(const PipelineConfig& config, const RunOptions& options)
      : config_(config), options_(options), out_dir_(config.resolve(config.output_dir)) {
    manifest_path_ = out_dir_ / "manifest.json";
    if (!options_.force && fs::exists(manifest_path_)) {
      try {
        const json prev = json::parse(read_file(manifest_path_));
        if (prev.contains("stages")) {
          for (const json& s : prev["stages"]) previous_[s.at("name").get<std::string>()] = s;
        }
      } catch (const std::exception&) {
        previous_.clear();  // unreadable manifest: rerun everything
      }
    }
    manifest_["schema_version"] = kConfigSchemaVersion;
    manifest_["tool"] = kToolName;
    manifest_["tool_version"] = kToolVersion;
    manifest_["stages"] = ordered_json::array();
  }

  FileRef artifact(const std::string& rel) const { return {rel, out_dir_ / rel}; }
  const fs::path& manifest_path() const { return manifest_path_; }

  void event(ordered_json e) {
    if (options_.events != nullptr) *options_.events << e.dump() << '\n';
  }

  // Runs `body` unless the previous manifest shows the stage up to date.
  void stage(const std::string& name, const ordered_json& params,
             const std::vector<FileRef>& inputs, const std::vector<FileRef>& outputs,
             const std::function<void()>& body) {
    event({{"event", "stage_start"}, {"stage", name}});
    bool skipped = false;
    ordered_json record;
    try {
      record["name"] = name;
      record["params"] = params;
      record["inputs"] = hash_list(inputs);
      skipped = up_to_date(name, record, outputs);
      if (!skipped) body();
      record["outputs"] = hash_list(outputs);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      event({{"event", "stage_failed"}, {"stage", name}, {"error", e.what()}});
      throw StageError(name, e.what());
    }
    manifest_["stages"].push_back(record);
    write_file_atomic(manifest_path_, manifest_.dump(2) + "\n");
    outcomes_.push_back({name, skipped});
    event({{"event", "stage_done"}, {"stage", name}, {"status", skipped ? "skipped" : "ran"}});
    if (options_.summary != nullptr) {
      *options_.summary << name << ": " << (skipped ? "skipped (up-to-date)" : "done") << "\n";
    }
  }

  std::vector<StageOutcome> outcomes() const { return outcomes_; }

 private:
  bool up_to_date(const std::string& name, const ordered_json& record,
                  const std::vector<FileRef>& outputs) const {
    auto it = previous_.find(name);
    if (it == previous_.end()) return false;
    const json& prev = it->second;
    if (json(record["params"]) != prev.value("params", json()) ||
        json(record["inputs"]) != prev.value("inputs", json())) {
      return false;
    }
    const json& prev_out = prev.value("outputs", json::array());
    if (prev_out.size() != outputs.size()) return false;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (prev_out[i].value("path", "") != outputs[i].name) return false;
      if (!fs::exists(outputs[i].path)) return false;
      if (prev_out[i].value("sha256", "") != sha256_file(outputs[i].path)) return false;
    }
    return true;
  }

  const PipelineConfig& config_;
  const RunOptions& options_;
  fs::path out_dir_;
  fs::path manifest_path_;
  std::map<std::string, json> previous_;
  ordered_json manifest_;
  std::vector<StageOutcome> outcomes_;
};

ordered_json masking_json(const pretrain::MaskingConfig& m) {
  return {{"mask_prob", m.mask_prob},
          {"replace_mask", m.replace_mask},
          {"replace_random", m.replace_random},
          {"keep_original", m.keep_original},
          {"max_predictions_per_seq", m.max_predictions_per_seq},
          {"rng_seed", m.rng_seed},
          {"dupe_factor", m.dupe_factor},
          {"random_next_prob", m.random_next_prob}};
}

ordered_json phases_json(const std::vector<schedule::PhaseConfig>& phases) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : phases) {
    arr.push_back({{"epochs", p.epochs}, {"batch", p.batch_size}, {"seqlen", p.seq_len}});
  }
  return arr;
}

std::vector<pretrain::Document> to_documents(std::span<const TextUnit> units,
                                             Granularity granularity,
                                             std::size_t sentences_per_document) {
  std::vector<pretrain::Document> docs;
  if (granularity == Granularity::kParagraph) {
    for (const TextUnit& u : units) {
      pretrain::Document d;
      std::stringstream ss(u.text);
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty()) d.push_back(line);
      }
      docs.push_back(std::move(d));
    }
    return docs;
  }
  for (std::size_t i = 0; i < units.size(); i += sentences_per_document) {
    pretrain::Document d;
    for (std::size_t j = i; j < std::min(units.size(), i + sentences_per_document); ++j) {
      d.push_back(units[j].text);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  config.validate();

  Runner run(config, options);
  const Granularity granularity = config.dedup.granularity;
  const unsigned jobs = config.jobs;

  std::vector<FileRef> corpus_inputs;
  std::vector<FileRef> dedup_texts, dedup_stats, dedup_outputs, sample_texts;
  for (const LanguageConfig& l : config.languages) {
    for (const std::string& p : l.corpus) corpus_inputs.push_back({p, config.resolve(p)});
    dedup_texts.push_back(run.artifact("dedup/" + l.code + ".txt"));
    dedup_stats.push_back(run.artifact("dedup/" + l.code + ".stats.json"));
    dedup_outputs.push_back(dedup_texts.back());
    dedup_outputs.push_back(dedup_stats.back());
    sample_texts.push_back(run.artifact("sample/" + l.code + ".txt"));
  }

  // dedup
  run.stage("dedup",
            {{"n", config.dedup.n},
             {"threshold", config.dedup.threshold},
             {"granularity", to_string(granularity)}},
            corpus_inputs, dedup_outputs, [&] {
              for (std::size_t i = 0; i < config.languages.size(); ++i) {
                const LanguageConfig& l = config.languages[i];
                std::vector<TextUnit> units;
                for (const std::string& p : l.corpus) {
                  auto more = read_units_file(config.resolve(p), l.code, granularity,
                                              units.empty() ? 0 : units.back().id + 1);
                  units.insert(units.end(), std::make_move_iterator(more.begin()),
                               std::make_move_iterator(more.end()));
                }
                const auto result = dedup::dedup_corpus(
                    units, {config.dedup.n, config.dedup.threshold, jobs});
                AtomicFile text_out(dedup_texts[i].path);
                write_units(text_out.stream(), result.kept, granularity);
                text_out.commit();
                const auto& s = result.stats;
                ordered_json stats = {{"units_in", s.units_in},
                                      {"units_kept", s.units_kept},
                                      {"units_dropped", s.units_dropped},
                                      {"tokens_in", s.tokens_in},
                                      {"tokens_kept", s.tokens_kept}};
                write_file_atomic(dedup_stats[i].path, stats.dump(2) + "\n");
                ordered_json e = {{"event", "dedup"}, {"lang", l.code}};
                e.update(stats);
                run.event(e);
              }
            });

  // sample
  ordered_json budgets = ordered_json::object();
  for (const LanguageConfig& l : config.languages) budgets[l.code] = l.vocab_budget;
  run.stage("sample", {{"budgets", budgets}, {"seed", config.vocab.seed}}, dedup_texts,
            sample_texts, [&] {
              for (std::size_t i = 0; i < config.languages.size(); ++i) {
                const LanguageConfig& l = config.languages[i];
                const auto units = read_units_file(dedup_texts[i].path, l.code, granularity);
                std::vector<TextUnit> picked;
                if (l.vocab_budget == 0) {
                  picked = units;
                } else {
                  vocab::SampleInfo info;
                  picked = vocab::sample_subset(units, {l.code, l.vocab_budget},
                                                derive_seed(config.vocab.seed, i), &info);
                  if (info.shortfall > 0) {
                    run.event({{"event", "sample_shortfall"},
                               {"lang", l.code},
                               {"budget", l.vocab_budget},
                               {"available", info.tokens}});
                  }
                }
                AtomicFile out(sample_texts[i].path);
                write_units(out.stream(), picked, granularity);
                out.commit();
              }
            });

  // vocab
  const FileRef vocab_file = run.artifact("vocab.txt");
  run.stage("vocab",
            {{"target_size", config.vocab.target_size},
             {"tolerance", config.vocab.tolerance},
             {"max_iterations", config.vocab.max_iterations}},
            sample_texts, {vocab_file}, [&] {
              std::vector<std::vector<TextUnit>> subsets;
              for (std::size_t i = 0; i < config.languages.size(); ++i) {
                subsets.push_back(read_units_file(sample_texts[i].path,
                                                  config.languages[i].code, granularity));
              }
              const auto counts = vocab::count_words(subsets, jobs);
              vocab::LearnOptions opts;
              opts.target_size = config.vocab.target_size;
              opts.size_tolerance = config.vocab.tolerance;
              opts.max_iterations = config.vocab.max_iterations;
              vocab::LearnInfo info;
              const auto v = vocab::learn_wordpieces(counts, opts, &info);
              AtomicFile out(vocab_file.path);
              v.save(out.stream());
              out.commit();
              run.event({{"event", "vocab"},
                         {"size", v.size()},
                         {"target", opts.target_size},
                         {"min_count", info.min_count}});
            });

  // Token count of the deduplicated corpora; feeds both plan and schedule.
  auto kept_tokens = [&] {
    std::uint64_t total = 0;
    for (const FileRef& f : dedup_stats) {
      total += json::parse(read_file(f.path)).at("tokens_kept").get<std::uint64_t>();
    }
    return total;
  };

  // pretrain-data
  std::vector<FileRef> pretrain_inputs = dedup_texts;
  pretrain_inputs.push_back(vocab_file);
  std::vector<FileRef> pretrain_outputs;
  for (std::size_t i = 0; i < config.phases.size(); ++i) {
    pretrain_outputs.push_back(run.artifact("pretrain/phase" + std::to_string(i) + ".bin"));
    pretrain_outputs.push_back(
        run.artifact("pretrain/phase" + std::to_string(i) + ".schema.json"));
  }
  run.stage("pretrain-data",
            {{"masking", masking_json(config.masking)},
             {"phases", phases_json(config.phases)},
             {"sentences_per_document", config.sentences_per_document}},
            pretrain_inputs, pretrain_outputs, [&] {
              const auto v = vocab::Vocab::load_file(vocab_file.path);
              std::vector<pretrain::Document> docs;
              for (std::size_t i = 0; i < config.languages.size(); ++i) {
                const auto units =
                    read_units_file(dedup_texts[i].path, config.languages[i].code, granularity);
                auto more = to_documents(units, granularity, config.sentences_per_document);
                docs.insert(docs.end(), std::make_move_iterator(more.begin()),
                            std::make_move_iterator(more.end()));
              }
              const auto plan = schedule::make_plan(std::max<std::uint64_t>(kept_tokens(), 1),
                                                    config.phases);
              std::vector<std::unique_ptr<AtomicFile>> files;
              for (std::size_t i = 0; i < config.phases.size(); ++i) {
                files.push_back(std::make_unique<AtomicFile>(pretrain_outputs[2 * i].path));
              }
              const auto stats = pretrain::phase_datasets(
                  docs, v, plan, config.masking,
                  [&](std::size_t phase) -> pretrain::InstanceSink {
                    std::ostream* os = &files[phase]->stream();
                    return [os](const pretrain::TrainingInstance& inst) {
                      pretrain::write_instance(*os, inst);
                    };
                  },
                  jobs);
              for (std::size_t i = 0; i < config.phases.size(); ++i) {
                files[i]->commit();
                write_file_atomic(pretrain_outputs[2 * i + 1].path,
                                  pretrain::instance_schema_json());
                run.event({{"event", "pretrain_phase"},
                           {"phase", i},
                           {"seqlen", config.phases[i].seq_len},
                           {"instances", stats[i].instances},
                           {"documents_skipped", stats[i].documents_skipped}});
              }
            });

  // schedule
  const FileRef schedule_file = run.artifact("schedule.json");
  run.stage("schedule", {{"phases", phases_json(config.phases)}}, dedup_stats, {schedule_file},
            [&] {
              const auto plan = schedule::make_plan(kept_tokens(), config.phases);
              write_file_atomic(schedule_file.path, plan.to_json() + "\n");
            });

  return {run.outcomes(), run.manifest_path()};
}

}  // namespace bertprep::pipeline
