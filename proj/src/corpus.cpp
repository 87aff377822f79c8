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

#include "bertprep/corpus.hpp"

#include <istream>
#include <ostream>

#include "bertprep/error.hpp"
#include "bertprep/io.hpp"
#include "bertprep/text.hpp"

namespace bertprep {

Granularity parse_granularity(std::string_view s) {
  if (s == "sentence") return Granularity::kSentence;
  if (s == "paragraph") return Granularity::kParagraph;
  throw ValidationError("granularity must be 'sentence' or 'paragraph', got '" +
                        std::string(s) + "'");
}

std::string_view to_string(Granularity g) {
  return g == Granularity::kSentence ? "sentence" : "paragraph";
}

std::vector<TextUnit> read_units(std::istream& in, std::string_view lang,
                                 Granularity granularity,
                                 std::uint64_t first_id) {
  std::vector<TextUnit> units;
  std::uint64_t next_id = first_id;
  std::string paragraph;

  auto flush = [&]() {
    if (paragraph.empty()) return;
    units.push_back({next_id++, std::string(lang), std::move(paragraph), granularity});
    paragraph.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string norm = text::collapse_whitespace(text::nfc(line));
    if (granularity == Granularity::kSentence) {
      if (!norm.empty()) {
        units.push_back({next_id++, std::string(lang), std::move(norm), granularity});
      }
      continue;
    }
    if (norm.empty()) {
      flush();
    } else {
      if (!paragraph.empty()) paragraph.push_back('\n');
      paragraph += norm;
    }
  }
  flush();
  return units;
}

std::vector<TextUnit> read_units_file(const std::filesystem::path& path,
                                      std::string_view lang,
                                      Granularity granularity,
                                      std::uint64_t first_id) {
  std::ifstream in = open_input(path);
  return read_units(in, lang, granularity, first_id);
}

void write_units(std::ostream& out, std::span<const TextUnit> units,
                 Granularity granularity) {
  bool first = true;
  for (const TextUnit& u : units) {
    if (granularity == Granularity::kParagraph && !first) out << '\n';
    out << u.text << '\n';
    first = false;
  }
}

std::uint64_t count_tokens(std::span<const TextUnit> units) {
  std::uint64_t n = 0;
  for (const TextUnit& u : units) n += text::count_tokens(u.text);
  return n;
}

}  // namespace bertprep
