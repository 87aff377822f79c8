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

// bertprep: corpus preparation, vocabulary, pretraining data and evaluation.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "bertprep/dedup.hpp"
#include "bertprep/eval/ner.hpp"
#include "bertprep/eval/report.hpp"
#include "bertprep/eval/ud.hpp"
#include "bertprep/io.hpp"
#include "bertprep/rng.hpp"
#include "bertprep/pipeline.hpp"
#include "bertprep/pretrain_data.hpp"
#include "bertprep/schedule.hpp"
#include "bertprep/text.hpp"
#include "bertprep/vocab.hpp"

namespace {

using namespace bertprep;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void log_event(const ordered_json& e) { std::cerr << e.dump() << '\n'; }

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file_atomic(path, content);
  }
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw ValidationError(std::string(what) + " must look like lang=value, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// ---------------------------------------------------------------------------

struct DedupArgs {
  std::size_t n = dedup::kDefaultOrder;
  double threshold = dedup::kDefaultThreshold;
  std::string granularity = "sentence";
  std::string lang = "xx";
  unsigned jobs = 1;
  std::string input, output, stats;
};

int run_dedup(const DedupArgs& a) {
  const Granularity g = parse_granularity(a.granularity);
  const auto units = read_units_file(a.input, a.lang, g);
  const auto result = dedup::dedup_corpus(units, {a.n, a.threshold, a.jobs});
  AtomicFile out(a.output);
  write_units(out.stream(), result.kept, g);
  out.commit();
  const auto& s = result.stats;
  ordered_json stats = {{"units_in", s.units_in},
                        {"units_kept", s.units_kept},
                        {"units_dropped", s.units_dropped},
                        {"tokens_in", s.tokens_in},
                        {"tokens_kept", s.tokens_kept}};
  if (!a.stats.empty()) write_file_atomic(a.stats, stats.dump(2) + "\n");
  std::cout << stats.dump(2) << "\n";
  return 0;
}

struct VocabBuildArgs {
  std::size_t target_size = 30000;
  double tolerance = 0.02;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 4;
  std::string granularity = "sentence";
  std::vector<std::string> budgets;
  std::vector<std::string> inputs;  // lang=path
  unsigned jobs = 1;
  std::string output;
};

int run_vocab_build(const VocabBuildArgs& a) {
  const Granularity g = parse_granularity(a.granularity);
  std::map<std::string, std::uint64_t> budget;
  for (const std::string& b : a.budgets) {
    const auto [lang, value] = split_assignment(b, "--budget");
    budget[lang] = schedule::parse_token_count(value);
  }
  std::vector<std::vector<TextUnit>> subsets;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const auto [lang, path] = split_assignment(a.inputs[i], "input");
    auto units = read_units_file(path, lang, g);
    auto it = budget.find(lang);
    if (it != budget.end()) {
      vocab::SampleInfo info;
      units = vocab::sample_subset(units, {lang, it->second}, derive_seed(a.seed, i), &info);
      if (info.shortfall > 0) {
        log_event({{"event", "sample_shortfall"},
                   {"lang", lang},
                   {"budget", it->second},
                   {"available", info.tokens}});
      }
    }
    subsets.push_back(std::move(units));
  }
  const auto counts = vocab::count_words(subsets, a.jobs);
  vocab::LearnOptions opts;
  opts.target_size = a.target_size;
  opts.size_tolerance = a.tolerance;
  opts.max_iterations = a.max_iterations;
  vocab::LearnInfo info;
  const auto v = vocab::learn_wordpieces(counts, opts, &info);
  AtomicFile out(a.output);
  v.save(out.stream());
  out.commit();
  log_event({{"event", "vocab"},
             {"size", v.size()},
             {"target", a.target_size},
             {"alphabet_chars", info.alphabet_chars},
             {"min_count", info.min_count}});
  std::cout << "vocab: " << v.size() << " pieces -> " << a.output << "\n";
  return 0;
}

struct TokenizeArgs {
  std::string vocab, input, output;
  bool ids = false;
};

int run_vocab_tokenize(const TokenizeArgs& a) {
  const auto v = vocab::Vocab::load_file(a.vocab);
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!a.input.empty() && a.input != "-") {
    file = open_input(a.input);
    in = &file;
  }
  std::ostringstream out;
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string norm = text::nfc(line);
    bool first = true;
    for (std::string_view word : text::split_whitespace(norm)) {
      if (a.ids) {
        for (std::uint32_t id : v.tokenize_ids(word)) {
          out << (first ? "" : " ") << id;
          first = false;
        }
      } else {
        for (const std::string& p : v.tokenize(word)) {
          out << (first ? "" : " ") << p;
          first = false;
        }
      }
    }
    out << '\n';
  }
  emit(a.output, out.str());
  return 0;
}

struct PretrainArgs {
  std::string vocab, input, output;
  std::size_t max_seq_len = 128;
  pretrain::MaskingConfig masking;
  unsigned jobs = 1;
};

int run_pretrain(const PretrainArgs& a) {
  a.masking.validate();
  const auto v = vocab::Vocab::load_file(a.vocab);
  std::ifstream in = open_input(a.input);
  const auto docs = pretrain::read_documents(in);
  AtomicFile out(a.output);
  const auto stats = pretrain::build_instances(
      docs, v, a.max_seq_len, a.masking,
      [&](const pretrain::TrainingInstance& inst) { pretrain::write_instance(out.stream(), inst); },
      a.jobs);
  out.commit();
  write_file_atomic(fs::path(a.output).replace_extension(".schema.json"),
                    pretrain::instance_schema_json());
  log_event({{"event", "pretrain_data"},
             {"documents", stats.documents},
             {"documents_skipped", stats.documents_skipped},
             {"instances", stats.instances}});
  std::cout << "pretrain-data: " << stats.instances << " instances -> " << a.output << "\n";
  return 0;
}

struct ScheduleArgs {
  std::string tokens;
  std::vector<std::string> phases;
  std::string output;
};

int run_schedule(const ScheduleArgs& a) {
  std::vector<schedule::PhaseConfig> phases;
  for (const std::string& p : a.phases) phases.push_back(schedule::parse_phase(p));
  const auto plan = schedule::make_plan(schedule::parse_token_count(a.tokens), phases);
  emit(a.output, plan.to_json() + "\n");
  return 0;
}

struct EvalArgs {
  std::string gold, pred, output;
  std::string label_map, pred_label_map;
  std::string train_lang, test_lang, model;
  bool span = false;
  bool strip_subtypes = false;
};

eval::LabelMap load_map(const std::string& path) {
  return path.empty() ? eval::LabelMap::identity() : eval::LabelMap::load_file(path);
}

int finish_eval(eval::EvalReport r, const EvalArgs& a) {
  r.train_lang = a.train_lang;
  r.test_lang = a.test_lang;
  r.model_name = a.model;
  emit(a.output, eval::to_json(r) + "\n");
  return 0;
}

int run_eval_ner(const EvalArgs& a) {
  const auto gold_map = load_map(a.label_map);
  const auto pred_map = a.pred_label_map.empty() ? gold_map : load_map(a.pred_label_map);
  const auto gold = eval::harmonize(eval::parse_ner_file(a.gold), gold_map);
  const auto pred = eval::harmonize(eval::parse_ner_file(a.pred), pred_map);
  return finish_eval(
      eval::ner_scores(gold, pred, a.span ? eval::NerScoring::kSpan : eval::NerScoring::kToken),
      a);
}

int run_eval_pos(const EvalArgs& a) {
  const auto gold = eval::parse_conllu_file(a.gold);
  const auto pred = eval::parse_conllu_file(a.pred, {.require_heads = false});
  return finish_eval(eval::upos_accuracy(gold, pred), a);
}

int run_eval_dp(const EvalArgs& a) {
  const auto gold = eval::parse_conllu_file(a.gold);
  const auto pred = eval::parse_conllu_file(a.pred, {.require_heads = false});
  return finish_eval(eval::attachment_scores(gold, pred, {a.strip_subtypes}), a);
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string baseline, task, output, json_output;
};

int run_report(const ReportArgs& a) {
  std::vector<eval::EvalReport> reports;
  for (const std::string& path : a.inputs) {
    auto more = eval::reports_from_json(read_file(path));
    reports.insert(reports.end(), more.begin(), more.end());
  }
  if (!a.task.empty()) {
    const eval::Task task = eval::parse_task(a.task);
    std::erase_if(reports, [&](const eval::EvalReport& r) { return r.task != task; });
  }
  if (reports.empty()) throw ValidationError("no reports to render");
  const auto matrix = eval::transfer_matrix(
      reports, a.baseline.empty() ? std::nullopt : std::optional<std::string>(a.baseline));
  emit(a.output, eval::render_markdown(matrix));
  if (!a.json_output.empty()) write_file_atomic(a.json_output, eval::to_json(reports) + "\n");
  return 0;
}

struct PipelineArgs {
  std::string config;
  bool force = false;
  unsigned jobs = 0;  // 0: take the config value
  std::string output_dir;
};

int run_pipeline_cmd(const PipelineArgs& a) {
  auto config = pipeline::PipelineConfig::load_file(a.config);
  if (a.jobs > 0) config.jobs = a.jobs;
  if (!a.output_dir.empty()) {
    config.output_dir = fs::absolute(a.output_dir).string();
    config.validate();
  }
  pipeline::RunOptions opts;
  opts.force = a.force;
  opts.events = &std::cerr;
  opts.summary = &std::cout;
  const auto result = pipeline::run_pipeline(config, opts);
  std::cout << "manifest: " << result.manifest_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus deduplication, wordpiece vocabularies, masked-LM data and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pipeline::kToolVersion));

  std::function<int()> action;

  // dedup
  DedupArgs dd;
  auto* dedup_cmd = app.add_subcommand("dedup", "Drop near-duplicate sentences or paragraphs");
  dedup_cmd->add_option("--n", dd.n, "Shingle length in tokens")->capture_default_str();
  dedup_cmd->add_option("--threshold", dd.threshold, "Drop at this duplicate fraction")
      ->capture_default_str();
  dedup_cmd->add_option("--granularity", dd.granularity, "sentence or paragraph")
      ->capture_default_str();
  dedup_cmd->add_option("--lang", dd.lang, "Language code")->capture_default_str();
  dedup_cmd->add_option("--jobs", dd.jobs)->capture_default_str();
  dedup_cmd->add_option("--stats", dd.stats, "Also write stats JSON here");
  dedup_cmd->add_option("input", dd.input)->required();
  dedup_cmd->add_option("output", dd.output)->required();
  dedup_cmd->callback([&] { action = [&] { return run_dedup(dd); }; });

  // vocab
  auto* vocab_cmd = app.add_subcommand("vocab", "Build or apply wordpiece vocabularies");
  vocab_cmd->require_subcommand(1);
  VocabBuildArgs vb;
  auto* build_cmd = vocab_cmd->add_subcommand("build", "Learn a vocabulary");
  build_cmd->add_option("--target-size", vb.target_size)->capture_default_str();
  build_cmd->add_option("--tolerance", vb.tolerance)->capture_default_str();
  build_cmd->add_option("--seed", vb.seed)->capture_default_str();
  build_cmd->add_option("--max-iterations", vb.max_iterations)->capture_default_str();
  build_cmd->add_option("--granularity", vb.granularity)->capture_default_str();
  build_cmd->add_option("--budget", vb.budgets, "lang=tokens, repeatable");
  build_cmd->add_option("--jobs", vb.jobs)->capture_default_str();
  build_cmd->add_option("-o,--output", vb.output)->required();
  build_cmd->add_option("inputs", vb.inputs, "lang=path, one or more")->required();
  build_cmd->callback([&] { action = [&] { return run_vocab_build(vb); }; });

  TokenizeArgs tk;
  auto* tok_cmd = vocab_cmd->add_subcommand("tokenize", "Segment text into pieces");
  tok_cmd->add_option("--vocab", tk.vocab)->required();
  tok_cmd->add_flag("--ids", tk.ids, "Print ids instead of pieces");
  tok_cmd->add_option("-o,--output", tk.output);
  tok_cmd->add_option("input", tk.input, "Text file; stdin when absent");
  tok_cmd->callback([&] { action = [&] { return run_vocab_tokenize(tk); }; });

  // pretrain-data
  PretrainArgs pd;
  auto* pd_cmd = app.add_subcommand("pretrain-data", "Write masked-LM training instances");
  pd_cmd->add_option("--vocab", pd.vocab)->required();
  pd_cmd->add_option("--max-seq-len", pd.max_seq_len)->capture_default_str();
  pd_cmd->add_option("--mask-prob", pd.masking.mask_prob)->capture_default_str();
  pd_cmd->add_option("--max-predictions", pd.masking.max_predictions_per_seq,
                     "0: ceil(mask_prob * max_seq_len)")
      ->capture_default_str();
  pd_cmd->add_option("--dupe-factor", pd.masking.dupe_factor)->capture_default_str();
  pd_cmd->add_option("--seed", pd.masking.rng_seed)->capture_default_str();
  pd_cmd->add_option("--jobs", pd.jobs)->capture_default_str();
  pd_cmd->add_option("input", pd.input, "Documents: one sentence per line, blank line between")
      ->required();
  pd_cmd->add_option("output", pd.output)->required();
  pd_cmd->callback([&] { action = [&] { return run_pretrain(pd); }; });

  // schedule
  ScheduleArgs sc;
  auto* sc_cmd = app.add_subcommand("schedule", "Training steps per phase");
  sc_cmd->add_option("--tokens", sc.tokens, "Corpus size in tokens, e.g. 3.7e9")->required();
  sc_cmd->add_option("--phase", sc.phases, "epochs=E,batch=B,seqlen=L, repeatable")->required();
  sc_cmd->add_option("-o,--output", sc.output);
  sc_cmd->callback([&] { action = [&] { return run_schedule(sc); }; });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold data");
  eval_cmd->require_subcommand(1);
  EvalArgs ev;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--gold", ev.gold)->required();
    cmd->add_option("--pred", ev.pred)->required();
    cmd->add_option("--train-lang", ev.train_lang)->required();
    cmd->add_option("--test-lang", ev.test_lang)->required();
    cmd->add_option("--model", ev.model)->required();
    cmd->add_option("-o,--output", ev.output);
  };
  auto* ner_cmd = eval_cmd->add_subcommand("ner", "Token-level PER/LOC/ORG F1");
  add_common(ner_cmd);
  ner_cmd->add_option("--label-map", ev.label_map, "JSON tag map for the gold file");
  ner_cmd->add_option("--pred-label-map", ev.pred_label_map, "Defaults to --label-map");
  ner_cmd->add_flag("--span", ev.span, "Score entity spans instead of tokens");
  ner_cmd->callback([&] { action = [&] { return run_eval_ner(ev); }; });
  auto* pos_cmd = eval_cmd->add_subcommand("pos", "UPOS accuracy");
  add_common(pos_cmd);
  pos_cmd->callback([&] { action = [&] { return run_eval_pos(ev); }; });
  auto* dp_cmd = eval_cmd->add_subcommand("dp", "UAS and LAS");
  add_common(dp_cmd);
  dp_cmd->add_flag("--strip-subtypes", ev.strip_subtypes, "Compare base relations only");
  dp_cmd->callback([&] { action = [&] { return run_eval_dp(ev); }; });

  // report
  ReportArgs rp;
  auto* rp_cmd = app.add_subcommand("report", "Render reports as a transfer-matrix table");
  rp_cmd->add_option("--baseline", rp.baseline, "Model the delta columns compare against");
  rp_cmd->add_option("--task", rp.task, "Keep only reports of this task");
  rp_cmd->add_option("-o,--output", rp.output);
  rp_cmd->add_option("--json", rp.json_output, "Also write the merged reports here");
  rp_cmd->add_option("inputs", rp.inputs, "Report JSON files")->required();
  rp_cmd->callback([&] { action = [&] { return run_report(rp); }; });

  // pipeline
  auto* pl_cmd = app.add_subcommand("pipeline", "Run every stage from a config file");
  pl_cmd->require_subcommand(1);
  PipelineArgs pl;
  auto* run_cmd = pl_cmd->add_subcommand("run", "dedup, sample, vocab, pretrain-data, schedule");
  run_cmd->add_option("config", pl.config)->required();
  run_cmd->add_flag("--force", pl.force, "Rerun stages even when up to date");
  run_cmd->add_option("--jobs", pl.jobs, "Override the config's jobs");
  run_cmd->add_option("--output-dir", pl.output_dir, "Override the config's output_dir");
  run_cmd->callback([&] { action = [&] { return run_pipeline_cmd(pl); }; });
  auto* schema_cmd = pl_cmd->add_subcommand("schema", "Print the config JSON Schema");
  schema_cmd->callback([&] {
    action = [] {
      std::cout << pipeline::config_schema_json();
      return 0;
    };
  });

  // version
  bool version_json = false;
  auto* ver_cmd = app.add_subcommand("version", "Tool and config schema versions");
  ver_cmd->add_flag("--json", version_json);
  ver_cmd->callback([&] {
    action = [&] {
      std::cout << pipeline::version_info(version_json);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    return action();
  } catch (const pipeline::StageError& e) {
    log_event({{"event", "error"}, {"kind", "stage"}, {"stage", e.stage()}, {"message", e.what()}});
    std::cout << "failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ValidationError& e) {
    log_event({{"event", "error"}, {"kind", "validation"}, {"message", e.what()}});
    return kExitValidation;
  } catch (const ParseError& e) {
    ordered_json ev = {{"event", "error"}, {"kind", "parse"}, {"message", e.what()}};
    if (e.line() != 0) ev["line"] = e.line();
    log_event(ev);
    return kExitRuntime;
  } catch (const std::exception& e) {
    log_event({{"event", "error"}, {"kind", "runtime"}, {"message", e.what()}});
    return kExitRuntime;
  }
}
