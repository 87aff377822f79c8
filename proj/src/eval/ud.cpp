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

#include "bertprep/eval/ud.hpp"

#include <charconv>
#include <istream>
#include <string_view>

#include "bertprep/error.hpp"
#include "bertprep/io.hpp"

namespace bertprep::eval {
namespace {

constexpr std::size_t kConlluFields = 10;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct Pending {
  UdSentence tokens;
  std::vector<std::size_t> lines;
};

void finish(Pending& p, std::vector<UdSentence>& out) {
  if (p.tokens.empty()) return;
  const int n = static_cast<int>(p.tokens.size());
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    if (p.tokens[i].head > n) throw ParseError("HEAD out of range", p.lines[i]);
  }
  out.push_back(std::move(p.tokens));
  p = {};
}

std::string_view base_relation(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

void check_aligned(std::span<const UdSentence> gold, std::span<const UdSentence> pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold has " + std::to_string(gold.size()) + " sentences, pred has " +
                          std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw ValidationError("sentence " + std::to_string(i) + ": token counts differ");
    }
  }
}

}  // namespace

std::vector<UdSentence> parse_conllu(std::istream& in, const ConlluOptions& options) {
  std::vector<UdSentence> out;
  Pending pending;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish(pending, out);
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != kConlluFields) {
      throw ParseError("expected 10 tab-separated fields, got " + std::to_string(fields.size()),
                       lineno);
    }
    const std::string_view id = fields[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
      continue;
    }
    UdToken tok;
    if (!parse_int(id, tok.id) || tok.id < 1) throw ParseError("invalid ID '" + std::string(id) + "'", lineno);
    if (tok.id != static_cast<int>(pending.tokens.size()) + 1) {
      throw ParseError("ID " + std::string(id) + " out of sequence", lineno);
    }
    tok.form = fields[1];
    tok.upos = fields[3];
    const std::string_view head = fields[6];
    if (head == "_" && !options.require_heads) {
      tok.head = kNoHead;
    } else if (!parse_int(head, tok.head) || tok.head < 0) {
      throw ParseError("non-integer HEAD '" + std::string(head) + "'", lineno);
    }
    tok.deprel = fields[7];
    pending.tokens.push_back(std::move(tok));
    pending.lines.push_back(lineno);
  }
  finish(pending, out);
  return out;
}

std::vector<UdSentence> parse_conllu_file(const std::filesystem::path& path,
                                          const ConlluOptions& options) {
  std::ifstream in = open_input(path);
  return parse_conllu(in, options);
}

EvalReport upos_accuracy(std::span<const UdSentence> gold, std::span<const UdSentence> pred) {
  check_aligned(gold, pred);
  std::uint64_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      ++total;
      if (gold[s][t].upos == pred[s][t].upos) ++correct;
    }
  }
  EvalReport r;
  r.task = Task::kPos;
  r.metrics["upos_acc"] = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  return r;
}

EvalReport attachment_scores(std::span<const UdSentence> gold, std::span<const UdSentence> pred,
                             const AttachmentOptions& options) {
  check_aligned(gold, pred);
  std::uint64_t total = 0, head_ok = 0, label_ok = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const UdToken& g = gold[s][t];
      const UdToken& p = pred[s][t];
      if (p.head == kNoHead || p.deprel.empty() || p.deprel == "_") {
        throw ValidationError("sentence " + std::to_string(s) + ", token " +
                              std::to_string(t + 1) + ": prediction lacks head or deprel");
      }
      ++total;
      if (g.head != p.head) continue;
      ++head_ok;
      const bool same = options.strip_subtypes
                            ? base_relation(g.deprel) == base_relation(p.deprel)
                            : g.deprel == p.deprel;
      if (same) ++label_ok;
    }
  }
  EvalReport r;
  r.task = Task::kDp;
  const double n = static_cast<double>(total);
  r.metrics["uas"] = total == 0 ? 0.0 : static_cast<double>(head_ok) / n;
  r.metrics["las"] = total == 0 ? 0.0 : static_cast<double>(label_ok) / n;
  return r;
}

}  // namespace bertprep::eval
