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

// Masked-LM training instances with whole-word masking.
//
// Documents are packed into [CLS] A [SEP] B [SEP] pairs, half of them with a
// random B segment from another document. Masking picks whole words (a
// piece plus its "##" continuations) and replaces each of their pieces by
// [MASK], a random non-reserved id, or the original id.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bertprep/schedule.hpp"
#include "bertprep/vocab.hpp"

namespace bertprep::pretrain {

// A document is a list of sentences; sentences are whitespace-tokenized.
using Document = std::vector<std::string>;

struct TrainingInstance {
  std::vector<std::uint32_t> token_ids;
  std::vector<std::uint8_t> input_mask;
  std::vector<std::uint8_t> segment_ids;
  std::vector<std::uint32_t> masked_positions;
  std::vector<std::uint32_t> masked_labels;
  bool is_next = false;

  bool operator==(const TrainingInstance&) const = default;
};

struct MaskingConfig {
  double mask_prob = 0.15;
  double replace_mask = 0.8;
  double replace_random = 0.1;
  double keep_original = 0.1;
  // 0 selects ceil(mask_prob * max_seq_len).
  std::size_t max_predictions_per_seq = 0;
  std::uint64_t rng_seed = 12345;
  // Number of passes over the documents, each with fresh randomness.
  std::size_t dupe_factor = 1;
  double random_next_prob = 0.5;

  // Throws ValidationError when the invariants do not hold.
  void validate() const;
  std::size_t predictions_for(std::size_t max_seq_len) const;
};

inline constexpr std::size_t kMinSeqLen = 16;

struct BuildStats {
  std::uint64_t documents = 0;
  std::uint64_t documents_skipped = 0;
  std::uint64_t instances = 0;
};

using InstanceSink = std::function<void(const TrainingInstance&)>;

// Streams instances to `sink` in document order. Work is spread over `jobs`
// threads; each document draws from its own generator seeded by
// (rng_seed, pass, document ordinal), so output does not depend on `jobs`.
BuildStats build_instances(std::span<const Document> documents, const vocab::Vocab& vocab,
                           std::size_t max_seq_len, const MaskingConfig& cfg,
                           const InstanceSink& sink, unsigned jobs = 1);

std::vector<TrainingInstance> build_instances(std::span<const Document> documents,
                                              const vocab::Vocab& vocab,
                                              std::size_t max_seq_len,
                                              const MaskingConfig& cfg,
                                              BuildStats* stats = nullptr,
                                              unsigned jobs = 1);

// One stream per plan phase, at that phase's sequence length. Phase i uses
// seed derive_seed(cfg.rng_seed, i).
using PhaseSinkFactory = std::function<InstanceSink(std::size_t phase)>;
std::vector<BuildStats> phase_datasets(std::span<const Document> documents,
                                       const vocab::Vocab& vocab,
                                       const schedule::TrainingPlan& plan,
                                       const MaskingConfig& cfg,
                                       const PhaseSinkFactory& sinks, unsigned jobs = 1);

// Record format, little-endian:
//   u32 payload_bytes
//   u32 L; L x u32 token_ids; L x u8 input_mask; L x u8 segment_ids
//   u32 M; M x u32 masked_positions; M x u32 masked_labels
//   u8 is_next
void write_instance(std::ostream& out, const TrainingInstance& inst);
// Returns nullopt at clean end of stream; throws ParseError on truncation.
std::optional<TrainingInstance> read_instance(std::istream& in);

// JSON sidecar describing the record layout.
std::string instance_schema_json();

// Groups text into documents: blank lines separate documents, every other
// line is one sentence.
std::vector<Document> read_documents(std::istream& in);

}  // namespace bertprep::pretrain
