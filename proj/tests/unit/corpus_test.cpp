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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "bertprep/error.hpp"
#include "bertprep/io.hpp"

namespace bertprep {
namespace {

TEST(Corpus, SentenceModeOneUnitPerNonBlankLine) {
  std::istringstream in("first  line\r\n\n  second\tline \n");
  const auto units = read_units(in, "hr", Granularity::kSentence, 10);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].text, "first line");
  EXPECT_EQ(units[0].id, 10u);
  EXPECT_EQ(units[1].text, "second line");
  EXPECT_EQ(units[1].id, 11u);
  EXPECT_EQ(units[1].lang, "hr");
}

TEST(Corpus, ParagraphModeJoinsLines) {
  std::istringstream in("a b\nc\n\n\nd\n");
  const auto units = read_units(in, "sl", Granularity::kParagraph);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].text, "a b\nc");
  EXPECT_EQ(units[1].text, "d");
  EXPECT_EQ(count_tokens(units), 4u);
}

TEST(Corpus, NormalizesToNfc) {
  std::istringstream in("c\xCC\x8C" "evapi\n");
  const auto units = read_units(in, "hr", Granularity::kSentence);
  ASSERT_EQ(units.size(), 1u);
  EXPECT_EQ(units[0].text, "\xC4\x8D" "evapi");
}

TEST(Corpus, WriteThenReadRoundTrips) {
  for (Granularity g : {Granularity::kSentence, Granularity::kParagraph}) {
    std::istringstream in("x y\nz\n\nw\n");
    const auto units = read_units(in, "en", g);
    std::ostringstream out;
    write_units(out, units, g);
    std::istringstream again(out.str());
    const auto back = read_units(again, "en", g);
    ASSERT_EQ(back.size(), units.size());
    for (std::size_t i = 0; i < units.size(); ++i) EXPECT_EQ(back[i].text, units[i].text);
  }
}

TEST(Corpus, GranularityParsing) {
  EXPECT_EQ(parse_granularity("paragraph"), Granularity::kParagraph);
  EXPECT_EQ(to_string(Granularity::kSentence), "sentence");
  EXPECT_THROW(parse_granularity("document"), ValidationError);
}

TEST(Io, AtomicFileLeavesOnlyTmpWhenNotCommitted) {
  const auto dir = std::filesystem::temp_directory_path() / "bertprep_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "out.txt";
  {
    AtomicFile f(path);
    f.stream() << "partial";
  }
  EXPECT_FALSE(std::filesystem::exists(path));
  {
    AtomicFile f(path);
    f.stream() << "complete";
    f.commit();
  }
  EXPECT_EQ(read_file(path), "complete");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  EXPECT_THROW(read_file(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace bertprep
