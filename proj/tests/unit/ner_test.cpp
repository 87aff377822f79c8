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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bertprep/error.hpp"
#include "bertprep/rng.hpp"
#include "oracles.hpp"

namespace bertprep::eval {
namespace {

std::vector<NerSentence> random_sentences(Rng& rng, std::size_t count) {
  std::vector<NerSentence> out(count);
  for (auto& s : out) {
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back("w" + std::to_string(i));
      // O-heavy with runs, like real tags.
      const auto r = rng.below(10);
      s.labels.push_back(r < 6 ? NerLabel::kO : static_cast<NerLabel>(r % 3));
    }
  }
  return out;
}

std::vector<NerSentence> perturb(Rng& rng, std::vector<NerSentence> s, std::uint64_t pct) {
  for (auto& x : s) {
    for (auto& l : x.labels) {
      if (rng.below(100) < pct) l = static_cast<NerLabel>(rng.below(4));
    }
  }
  return s;
}

void expect_close(const std::map<std::string, double>& want,
                  const std::map<std::string, double>& got) {
  ASSERT_EQ(want.size(), got.size());
  for (const auto& [k, v] : want) {
    ASSERT_TRUE(got.contains(k)) << k;
    EXPECT_LE(std::abs(v - got.at(k)), 1e-12 * std::max(1.0, std::abs(v))) << k;
  }
}

TEST(NerParse, ReadsSentences) {
  std::istringstream in("Ivo\tB-PER\nje\tO\r\n\n\nZagreb\tB-LOC\n");
  const auto s = parse_ner(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].tokens, (std::vector<std::string>{"Ivo", "je"}));
  EXPECT_EQ(s[0].tags, (std::vector<std::string>{"B-PER", "O"}));
  EXPECT_EQ(s[1].tags, (std::vector<std::string>{"B-LOC"}));
}

TEST(NerParse, ReportsLineOfBadRow) {
  std::istringstream in("a\tO\nb\tO\textra\n");
  try {
    parse_ner(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream none("a O\n");
  EXPECT_THROW(parse_ner(none), ParseError);
  std::istringstream empty_tag("a\t\n");
  EXPECT_THROW(parse_ner(empty_tag), ParseError);
}

TEST(LabelMap, StripsBioPrefixes) {
  const auto m = LabelMap::from_json(
      R"({"map":{"PER":"PER","LOC":"LOC","ORG":"ORG","MISC":"O","O":"O","deriv-per":"PER"}})");
  EXPECT_EQ(m.lookup("B-PER"), NerLabel::kPer);
  EXPECT_EQ(m.lookup("I-ORG"), NerLabel::kOrg);
  EXPECT_EQ(m.lookup("S-LOC"), NerLabel::kLoc);
  EXPECT_EQ(m.lookup("B-MISC"), NerLabel::kO);
  EXPECT_EQ(m.lookup("deriv-per"), NerLabel::kPer);
  EXPECT_EQ(m.lookup("X-PER"), std::nullopt);
  EXPECT_EQ(m.lookup("EVENT"), std::nullopt);
}

TEST(LabelMap, PassthroughKeepsPrefixes) {
  const auto m = LabelMap::from_json(R"({"map":{"PER":"PER"},"bio_handling":"passthrough"})");
  EXPECT_EQ(m.lookup("PER"), NerLabel::kPer);
  EXPECT_EQ(m.lookup("B-PER"), std::nullopt);
}

TEST(LabelMap, RejectsBadMaps) {
  EXPECT_THROW(LabelMap::from_json("[]"), ValidationError);
  EXPECT_THROW(LabelMap::from_json(R"({"map":{"X":"MISC"}})"), ValidationError);
  EXPECT_THROW(LabelMap::from_json(R"({"map":{"X":1}})"), ValidationError);
  EXPECT_THROW(LabelMap::from_json(R"({"map":{},"bio_handling":"iob"})"), ValidationError);
  EXPECT_THROW(LabelMap::from_json("{"), ValidationError);
}

TEST(Harmonize, NamesUnmappedTag) {
  const std::vector<RawNerSentence> raw = {{{"a", "b"}, {"B-PER", "B-EVT"}}};
  const auto m = LabelMap::from_json(R"({"map":{"PER":"PER","O":"O"}})");
  try {
    harmonize(std::span<const RawNerSentence>(raw), m);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("B-EVT"), std::string::npos);
  }
}

TEST(Harmonize, IdentityIsIdempotent) {
  Rng rng(3);
  const auto s = random_sentences(rng, 50);
  const auto once = harmonize(std::span<const NerSentence>(s), LabelMap::identity());
  EXPECT_EQ(once, s);
  EXPECT_EQ(harmonize(std::span<const NerSentence>(once), LabelMap::identity()), once);
}

TEST(NerScores, HandExample) {
  // gold: PER PER O LOC ; pred: PER O O ORG
  const std::vector<NerSentence> gold = {
      {{"a", "b", "c", "d"}, {NerLabel::kPer, NerLabel::kPer, NerLabel::kO, NerLabel::kLoc}}};
  const std::vector<NerSentence> pred = {
      {{"a", "b", "c", "d"}, {NerLabel::kPer, NerLabel::kO, NerLabel::kO, NerLabel::kOrg}}};
  const auto r = ner_scores(gold, pred);
  EXPECT_DOUBLE_EQ(r.metrics.at("precision_per"), 1.0);
  EXPECT_DOUBLE_EQ(r.metrics.at("recall_per"), 0.5);
  EXPECT_DOUBLE_EQ(r.metrics.at("f1_per"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.metrics.at("f1_loc"), 0.0);
  EXPECT_DOUBLE_EQ(r.metrics.at("f1_org"), 0.0);
  EXPECT_DOUBLE_EQ(r.metrics.at("macro_f1"), 2.0 / 9.0);

  // Span mode: gold PER span [0,2) is not matched by pred [0,1).
  const auto sp = ner_scores(gold, pred, NerScoring::kSpan);
  EXPECT_DOUBLE_EQ(sp.metrics.at("f1_per"), 0.0);
}

TEST(NerScores, PerfectPredictionAndEmptyClasses) {
  Rng rng(8);
  const auto g = random_sentences(rng, 20);
  const auto r = ner_scores(g, g);
  EXPECT_DOUBLE_EQ(r.metrics.at("macro_f1"), 1.0);
  std::vector<NerSentence> all_o = {{{"x"}, {NerLabel::kO}}};
  EXPECT_DOUBLE_EQ(ner_scores(all_o, all_o).metrics.at("macro_f1"), 0.0);
}

TEST(NerScores, MatchesOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gold = random_sentences(rng, 1 + rng.below(30));
    const auto pred = perturb(rng, gold, rng.below(60));
    expect_close(oracle::ner_token(gold, pred), ner_scores(gold, pred).metrics);
    expect_close(oracle::ner_span(gold, pred),
                 ner_scores(gold, pred, NerScoring::kSpan).metrics);
  }
}

TEST(NerScores, RejectsMisalignment) {
  const std::vector<NerSentence> a = {{{"x"}, {NerLabel::kO}}};
  const std::vector<NerSentence> b = {{{"x", "y"}, {NerLabel::kO, NerLabel::kO}}};
  EXPECT_THROW(ner_scores(a, b), ValidationError);
  EXPECT_THROW(ner_scores(a, {}), ValidationError);
}

TEST(NerStats, CountsAndDensity) {
  const std::vector<NerSentence> s = {
      {{"a", "b", "c", "d"}, {NerLabel::kPer, NerLabel::kPer, NerLabel::kO, NerLabel::kLoc}},
      {{"e", "f"}, {NerLabel::kOrg, NerLabel::kO}}};
  const auto st = ner_stats(s);
  EXPECT_EQ(st.per, 2u);
  EXPECT_EQ(st.loc, 1u);
  EXPECT_EQ(st.org, 1u);
  EXPECT_EQ(st.n, 6u);
  EXPECT_DOUBLE_EQ(st.density(), 4.0 / 6.0);
  EXPECT_EQ(CorpusStats{}.density(), 0.0);
}

}  // namespace
}  // namespace bertprep::eval
