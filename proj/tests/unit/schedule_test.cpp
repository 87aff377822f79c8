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

#include <gtest/gtest.h>

#include <json.hpp>

#include "bertprep/error.hpp"
#include "bertprep/rng.hpp"

namespace bertprep::schedule {
namespace {

TEST(Steps, PublishedPhases) {
  const std::vector<PhaseConfig> finest = {{40, 1024, 128}, {4, 256, 512}};
  const auto a = make_plan(3'700'000'000ULL, finest);
  EXPECT_EQ(a.steps, (std::vector<std::uint64_t>{1'129'150, 112'915}));
  EXPECT_EQ(a.total_steps, 1'242'065u);

  const std::vector<PhaseConfig> csl = {{40, 512, 128}, {4, 128, 512}};
  const auto b = make_plan(5'900'000'000ULL, csl);
  EXPECT_EQ(b.steps, (std::vector<std::uint64_t>{3'601'074, 360'107}));
  EXPECT_EQ(b.total_steps, 3'961'181u);
}

TEST(Steps, MatchesExactIntegerArithmetic) {
  Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t tokens = 1 + rng.below(20'000'000'000ULL);
    const std::uint64_t epochs = 1 + rng.below(100);
    const std::uint64_t batch = 1 + rng.below(4096);
    const std::uint64_t seq = 1 + rng.below(1024);
    const auto exact = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(tokens) * epochs) / (batch * seq));
    ASSERT_EQ(steps_for({tokens, static_cast<double>(epochs), batch, seq}), exact);
  }
}

TEST(Steps, FloorsPartialSteps) {
  EXPECT_EQ(steps_for({1000, 1, 10, 11}), 9u);
  EXPECT_EQ(steps_for({1000, 1, 10, 100}), 1u);
  EXPECT_EQ(steps_for({999, 1, 10, 100}), 0u);
  EXPECT_EQ(steps_for({1000, 0.5, 10, 10}), 5u);
}

TEST(Steps, RejectsNonPositiveFields) {
  EXPECT_THROW(steps_for({0, 1, 1, 1}), ValidationError);
  EXPECT_THROW(steps_for({1, 0, 1, 1}), ValidationError);
  EXPECT_THROW(steps_for({1, -1, 1, 1}), ValidationError);
  EXPECT_THROW(steps_for({1, 1, 0, 1}), ValidationError);
  EXPECT_THROW(steps_for({1, 1, 1, 0}), ValidationError);
  EXPECT_THROW(steps_for({1, std::nan(""), 1, 1}), ValidationError);
  EXPECT_THROW(make_plan(10, std::vector<PhaseConfig>{}), ValidationError);
}

TEST(Steps, MonotoneInTokensAndEpochs) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t t = 1 + rng.below(1'000'000'000);
    const double e = 1 + static_cast<double>(rng.below(50));
    const std::uint64_t b = 1 + rng.below(2048), l = 1 + rng.below(512);
    const auto s = steps_for({t, e, b, l});
    EXPECT_LE(s, steps_for({t + 1 + rng.below(1000), e, b, l}));
    EXPECT_LE(s, steps_for({t, e + 1, b, l}));
  }
}

TEST(Parse, PhaseSpec) {
  const auto p = parse_phase("epochs=40,batch=1024,seqlen=128");
  EXPECT_EQ(p.epochs, 40);
  EXPECT_EQ(p.batch_size, 1024u);
  EXPECT_EQ(p.seq_len, 128u);
  EXPECT_EQ(parse_phase("seqlen=512,epochs=0.5,batch=8").epochs, 0.5);
  EXPECT_THROW(parse_phase("epochs=40,batch=1024"), ValidationError);
  EXPECT_THROW(parse_phase("epochs=40,batch=10.5,seqlen=128"), ValidationError);
  EXPECT_THROW(parse_phase("epochs=-1,batch=1,seqlen=1"), ValidationError);
  EXPECT_THROW(parse_phase("epochs=1,batch=1,seqlen=1,lr=3"), ValidationError);
  EXPECT_THROW(parse_phase("epochs"), ValidationError);
}

TEST(Parse, TokenCount) {
  EXPECT_EQ(parse_token_count("3.7e9"), 3'700'000'000ULL);
  EXPECT_EQ(parse_token_count("5900000000"), 5'900'000'000ULL);
  EXPECT_THROW(parse_token_count("0"), ValidationError);
  EXPECT_THROW(parse_token_count("abc"), ValidationError);
  EXPECT_THROW(parse_token_count("1e30"), ValidationError);
  EXPECT_THROW(parse_token_count("12x"), ValidationError);
}

TEST(Plan, JsonShape) {
  const std::vector<PhaseConfig> phases = {{40, 1024, 128}, {4, 256, 512}};
  const auto j = nlohmann::json::parse(make_plan(3'700'000'000ULL, phases).to_json());
  EXPECT_EQ(j["total_steps"], 1'242'065);
  ASSERT_EQ(j["phases"].size(), 2u);
  EXPECT_EQ(j["phases"][1]["steps"], 112'915);
  EXPECT_EQ(j["phases"][1]["seqlen"], 512);
  EXPECT_EQ(j["phases"][0]["tokens"], 3'700'000'000ULL);
}

}  // namespace
}  // namespace bertprep::schedule
