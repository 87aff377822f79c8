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

#include "bertprep/eval/ner.hpp"

#include <istream>
#include <json.hpp>
#include <set>
#include <tuple>

#include "bertprep/error.hpp"
#include "bertprep/io.hpp"

namespace bertprep::eval {

std::string_view to_string(NerLabel label) {
  switch (label) {
    case NerLabel::kPer: return "PER";
    case NerLabel::kLoc: return "LOC";
    case NerLabel::kOrg: return "ORG";
    case NerLabel::kO: return "O";
  }
  return "O";
}

std::optional<NerLabel> parse_label(std::string_view s) {
  if (s == "PER") return NerLabel::kPer;
  if (s == "LOC") return NerLabel::kLoc;
  if (s == "ORG") return NerLabel::kOrg;
  if (s == "O") return NerLabel::kO;
  return std::nullopt;
}

std::vector<RawNerSentence> parse_ner(std::istream& in) {
  std::vector<RawNerSentence> out;
  RawNerSentence current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.tokens.empty()) out.push_back(std::move(current));
      current = {};
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected FORM<TAB>TAG", lineno);
    }
    if (tab == 0 || tab + 1 == line.size()) throw ParseError("empty FORM or TAG", lineno);
    current.tokens.push_back(line.substr(0, tab));
    current.tags.push_back(line.substr(tab + 1));
  }
  if (!current.tokens.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<RawNerSentence> parse_ner_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_ner(in);
}

LabelMap LabelMap::identity() {
  LabelMap m;
  for (NerLabel l : {NerLabel::kPer, NerLabel::kLoc, NerLabel::kOrg, NerLabel::kO}) {
    m.map.emplace(std::string(to_string(l)), l);
  }
  m.bio_handling = BioHandling::kPassthrough;
  return m;
}

LabelMap LabelMap::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("label map: ") + e.what());
  }
  if (!j.is_object() || !j.contains("map") || !j["map"].is_object()) {
    throw ValidationError("label map: expected an object with a \"map\" object");
  }
  LabelMap m;
  for (const auto& [raw, target] : j["map"].items()) {
    if (!target.is_string()) throw ValidationError("label map: value for '" + raw + "' is not a string");
    const auto label = parse_label(target.get<std::string>());
    if (!label) {
      throw ValidationError("label map: '" + raw + "' maps to '" + target.get<std::string>() +
                            "', expected PER, LOC, ORG or O");
    }
    m.map.emplace(raw, *label);
  }
  const std::string bio = j.value("bio_handling", std::string("strip_prefix"));
  if (bio == "strip_prefix") {
    m.bio_handling = BioHandling::kStripPrefix;
  } else if (bio == "passthrough") {
    m.bio_handling = BioHandling::kPassthrough;
  } else {
    throw ValidationError("label map: bio_handling must be strip_prefix or passthrough");
  }
  return m;
}

LabelMap LabelMap::load_file(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

std::optional<NerLabel> LabelMap::lookup(std::string_view tag) const {
  if (auto it = map.find(std::string(tag)); it != map.end()) return it->second;
  if (bio_handling == BioHandling::kStripPrefix && tag.size() > 2 && tag[1] == '-' &&
      std::string_view("BIESLU").find(tag[0]) != std::string_view::npos) {
    if (auto it = map.find(std::string(tag.substr(2))); it != map.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<NerSentence> harmonize(std::span<const RawNerSentence> sentences,
                                   const LabelMap& map) {
  std::vector<NerSentence> out;
  out.reserve(sentences.size());
  for (const RawNerSentence& s : sentences) {
    NerSentence h;
    h.tokens = s.tokens;
    h.labels.reserve(s.tags.size());
    for (const std::string& tag : s.tags) {
      const auto label = map.lookup(tag);
      if (!label) throw ValidationError("unmapped tag '" + tag + "'");
      h.labels.push_back(*label);
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<NerSentence> harmonize(std::span<const NerSentence> sentences,
                                   const LabelMap& map) {
  std::vector<RawNerSentence> raw;
  raw.reserve(sentences.size());
  for (const NerSentence& s : sentences) {
    RawNerSentence r{s.tokens, {}};
    for (NerLabel l : s.labels) r.tags.emplace_back(to_string(l));
    raw.push_back(std::move(r));
  }
  return harmonize(raw, map);
}

namespace {

void check_aligned(std::span<const NerSentence> gold, std::span<const NerSentence> pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold has " + std::to_string(gold.size()) + " sentences, pred has " +
                          std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].labels.size() != pred[i].labels.size() ||
        gold[i].tokens.size() != gold[i].labels.size()) {
      throw ValidationError("sentence " + std::to_string(i) + ": token counts differ");
    }
  }
}

using Span = std::tuple<std::size_t, std::size_t, std::size_t, NerLabel>;

std::set<Span> entity_spans(std::span<const NerSentence> sentences) {
  std::set<Span> spans;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& labels = sentences[s].labels;
    std::size_t i = 0;
    while (i < labels.size()) {
      if (labels[i] == NerLabel::kO) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < labels.size() && labels[j] == labels[i]) ++j;
      spans.emplace(s, i, j, labels[i]);
      i = j;
    }
  }
  return spans;
}

ClassScores score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassScores c;
  c.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  c.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  c.f1 = c.precision + c.recall == 0.0
             ? 0.0
             : 2.0 * c.precision * c.recall / (c.precision + c.recall);
  return c;
}

}  // namespace

EvalReport ner_scores(std::span<const NerSentence> gold, std::span<const NerSentence> pred,
                      NerScoring scoring) {
  check_aligned(gold, pred);
  std::array<std::uint64_t, 3> tp{}, fp{}, fn{};
  if (scoring == NerScoring::kToken) {
    for (std::size_t s = 0; s < gold.size(); ++s) {
      for (std::size_t t = 0; t < gold[s].labels.size(); ++t) {
        const NerLabel g = gold[s].labels[t];
        const NerLabel p = pred[s].labels[t];
        if (g == p) {
          if (g != NerLabel::kO) ++tp[static_cast<int>(g)];
          continue;
        }
        if (p != NerLabel::kO) ++fp[static_cast<int>(p)];
        if (g != NerLabel::kO) ++fn[static_cast<int>(g)];
      }
    }
  } else {
    const auto gold_spans = entity_spans(gold);
    const auto pred_spans = entity_spans(pred);
    for (const Span& sp : pred_spans) {
      const int c = static_cast<int>(std::get<3>(sp));
      if (gold_spans.contains(sp)) {
        ++tp[c];
      } else {
        ++fp[c];
      }
    }
    for (const Span& sp : gold_spans) {
      if (!pred_spans.contains(sp)) ++fn[static_cast<int>(std::get<3>(sp))];
    }
  }

  EvalReport report;
  report.task = Task::kNer;
  double macro = 0;
  for (NerLabel l : kEntityLabels) {
    const int c = static_cast<int>(l);
    const ClassScores cs = score(tp[c], fp[c], fn[c]);
    std::string suffix(to_string(l));
    for (char& ch : suffix) ch = static_cast<char>(ch - 'A' + 'a');
    report.metrics["precision_" + suffix] = cs.precision;
    report.metrics["recall_" + suffix] = cs.recall;
    report.metrics["f1_" + suffix] = cs.f1;
    macro += cs.f1;
  }
  report.metrics["macro_f1"] = macro / 3.0;
  return report;
}

CorpusStats ner_stats(std::span<const NerSentence> sentences) {
  CorpusStats st;
  for (const NerSentence& s : sentences) {
    for (NerLabel l : s.labels) {
      switch (l) {
        case NerLabel::kPer: ++st.per; break;
        case NerLabel::kLoc: ++st.loc; break;
        case NerLabel::kOrg: ++st.org; break;
        case NerLabel::kO: break;
      }
      ++st.n;
    }
  }
  return st;
}

}  // namespace bertprep::eval
