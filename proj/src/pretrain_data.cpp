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

#include "bertprep/pretrain_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <unordered_map>

#include "bertprep/error.hpp"
#include "bertprep/rng.hpp"
#include "bertprep/text.hpp"

namespace bertprep::pretrain {

void MaskingConfig::validate() const {
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) {
    throw ValidationError("mask_prob must lie in (0, 1)");
  }
  for (double p : {replace_mask, replace_random, keep_original}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("replacement probabilities must lie in [0, 1]");
    }
  }
  if (std::abs(replace_mask + replace_random + keep_original - 1.0) > 1e-9) {
    throw ValidationError("replace_mask + replace_random + keep_original must equal 1");
  }
  if (dupe_factor == 0) throw ValidationError("dupe_factor must be >= 1");
  if (!(random_next_prob >= 0.0 && random_next_prob <= 1.0)) {
    throw ValidationError("random_next_prob must lie in [0, 1]");
  }
}

std::size_t MaskingConfig::predictions_for(std::size_t max_seq_len) const {
  if (max_predictions_per_seq > 0) return max_predictions_per_seq;
  return static_cast<std::size_t>(std::ceil(mask_prob * static_cast<double>(max_seq_len)));
}

namespace {

struct Piece {
  std::uint32_t id;
  bool word_start;
};
using Sentence = std::vector<Piece>;
using TokenizedDoc = std::vector<Sentence>;

struct SpecialIds {
  std::uint32_t cls;
  std::uint32_t sep;
  std::uint32_t mask;
  std::uint32_t first_regular;
  std::uint32_t vocab_size;
};

TokenizedDoc tokenize_document(const Document& doc, const vocab::Vocab& vocab,
                               std::unordered_map<std::string, std::vector<std::uint32_t>>& cache) {
  TokenizedDoc out;
  for (const std::string& sentence : doc) {
    Sentence s;
    for (std::string_view word : text::split_whitespace(sentence)) {
      auto it = cache.find(std::string(word));
      if (it == cache.end()) {
        it = cache.emplace(std::string(word), vocab.tokenize_ids(word)).first;
      }
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        s.push_back({it->second[i], i == 0});
      }
    }
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

// Trims the longer segment from its end; ties alternate, starting with A.
void truncate_pair(std::vector<Piece>& a, std::vector<Piece>& b, std::size_t max_tokens) {
  bool tie_trims_a = true;
  while (a.size() + b.size() > max_tokens) {
    std::vector<Piece>* side;
    if (a.size() != b.size()) {
      side = a.size() > b.size() ? &a : &b;
    } else {
      side = tie_trims_a ? &a : &b;
      tie_trims_a = !tie_trims_a;
    }
    side->pop_back();
  }
}

TrainingInstance mask_instance(const std::vector<Piece>& a, const std::vector<Piece>& b,
                               bool is_next, std::size_t max_predictions,
                               const MaskingConfig& cfg, const SpecialIds& ids, Rng& rng) {
  TrainingInstance inst;
  inst.is_next = is_next;
  const std::size_t len = a.size() + b.size() + 3;
  inst.token_ids.reserve(len);
  inst.segment_ids.reserve(len);

  // Whole-word candidates: a word-start piece plus following continuations.
  std::vector<std::vector<std::uint32_t>> words;
  auto append = [&](const std::vector<Piece>& seg, std::uint8_t segment_id) {
    for (const Piece& p : seg) {
      const auto pos = static_cast<std::uint32_t>(inst.token_ids.size());
      if (!p.word_start && !words.empty() && words.back().back() + 1 == pos) {
        words.back().push_back(pos);
      } else {
        words.push_back({pos});
      }
      inst.token_ids.push_back(p.id);
      inst.segment_ids.push_back(segment_id);
    }
    inst.token_ids.push_back(ids.sep);
    inst.segment_ids.push_back(segment_id);
  };
  inst.token_ids.push_back(ids.cls);
  inst.segment_ids.push_back(0);
  append(a, 0);
  append(b, 1);
  inst.input_mask.assign(inst.token_ids.size(), 1);

  const std::size_t usable = a.size() + b.size();
  const auto wanted = static_cast<std::size_t>(std::floor(cfg.mask_prob * static_cast<double>(usable)));
  const std::size_t num_to_predict = std::min(max_predictions, std::max<std::size_t>(1, wanted));

  rng.shuffle(std::span<std::vector<std::uint32_t>>(words));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> masked;  // (position, label)
  for (const auto& word : words) {
    if (masked.size() >= num_to_predict) break;
    if (masked.size() + word.size() > num_to_predict) continue;
    for (std::uint32_t pos : word) {
      const std::uint32_t original = inst.token_ids[pos];
      masked.emplace_back(pos, original);
      const double u = rng.unit();
      if (u < cfg.replace_mask) {
        inst.token_ids[pos] = ids.mask;
      } else if (u < cfg.replace_mask + cfg.replace_random) {
        inst.token_ids[pos] = ids.first_regular +
            static_cast<std::uint32_t>(rng.below(ids.vocab_size - ids.first_regular));
      }
    }
  }
  std::sort(masked.begin(), masked.end());
  for (const auto& [pos, label] : masked) {
    inst.masked_positions.push_back(pos);
    inst.masked_labels.push_back(label);
  }
  return inst;
}

void instances_from_document(std::span<const TokenizedDoc> docs, std::size_t doc_index,
                             std::size_t max_seq_len, std::size_t max_predictions,
                             const MaskingConfig& cfg, const SpecialIds& ids, Rng& rng,
                             std::vector<TrainingInstance>& out) {
  const TokenizedDoc& doc = docs[doc_index];
  const std::size_t max_tokens = max_seq_len - 3;
  const std::size_t target_len = max_tokens;

  std::vector<const Sentence*> chunk;
  std::size_t chunk_len = 0;
  std::size_t i = 0;
  while (i < doc.size()) {
    chunk.push_back(&doc[i]);
    chunk_len += doc[i].size();
    if (i + 1 == doc.size() || chunk_len >= target_len) {
      std::size_t a_end = 1;
      if (chunk.size() >= 2) a_end = 1 + rng.below(chunk.size() - 1);
      std::vector<Piece> a;
      for (std::size_t j = 0; j < a_end; ++j) a.insert(a.end(), chunk[j]->begin(), chunk[j]->end());

      std::vector<Piece> b;
      bool is_next = true;
      if (chunk.size() == 1 || rng.unit() < cfg.random_next_prob) {
        is_next = false;
        const std::size_t target_b = target_len > a.size() ? target_len - a.size() : 1;
        std::size_t other = doc_index;
        if (docs.size() > 1) {
          other = rng.below(docs.size() - 1);
          if (other >= doc_index) ++other;
        }
        const TokenizedDoc& random_doc = docs[other];
        for (std::size_t j = rng.below(random_doc.size()); j < random_doc.size(); ++j) {
          b.insert(b.end(), random_doc[j].begin(), random_doc[j].end());
          if (b.size() >= target_b) break;
        }
        // Segments after a_end were not used; revisit them.
        i -= chunk.size() - a_end;
      } else {
        for (std::size_t j = a_end; j < chunk.size(); ++j) {
          b.insert(b.end(), chunk[j]->begin(), chunk[j]->end());
        }
      }
      truncate_pair(a, b, max_tokens);
      out.push_back(mask_instance(a, b, is_next, max_predictions, cfg, ids, rng));
      chunk.clear();
      chunk_len = 0;
    }
    ++i;
  }
}

template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::future<void>> parts;
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (std::size_t b = 0; b < n; b += chunk) {
    const std::size_t e = std::min(n, b + chunk);
    parts.push_back(std::async(std::launch::async, [&f, b, e] {
      for (std::size_t i = b; i < e; ++i) f(i);
    }));
  }
  for (auto& p : parts) p.get();
}

}  // namespace

BuildStats build_instances(std::span<const Document> documents, const vocab::Vocab& vocab,
                           std::size_t max_seq_len, const MaskingConfig& cfg,
                           const InstanceSink& sink, unsigned jobs) {
  cfg.validate();
  if (max_seq_len < kMinSeqLen) {
    throw ValidationError("max sequence length must be >= " + std::to_string(kMinSeqLen));
  }
  vocab.id(vocab::kUnk);
  const SpecialIds ids{vocab.id(vocab::kCls), vocab.id(vocab::kSep), vocab.id(vocab::kMask),
                       static_cast<std::uint32_t>(vocab.num_reserved()),
                       static_cast<std::uint32_t>(vocab.size())};
  if (ids.vocab_size <= ids.first_regular) {
    throw ValidationError("vocabulary has no non-reserved pieces");
  }
  jobs = std::max(1u, jobs);

  // Tokenize everything up front: random B segments may come from any document.
  std::vector<TokenizedDoc> tokenized(documents.size());
  {
    const std::size_t chunk = (documents.size() + jobs - 1) / jobs;
    parallel_for((documents.size() + chunk - 1) / std::max<std::size_t>(chunk, 1), jobs,
                 [&](std::size_t part) {
                   std::unordered_map<std::string, std::vector<std::uint32_t>> cache;
                   const std::size_t e = std::min(documents.size(), (part + 1) * chunk);
                   for (std::size_t d = part * chunk; d < e; ++d) {
                     tokenized[d] = tokenize_document(documents[d], vocab, cache);
                   }
                 });
  }

  BuildStats stats;
  stats.documents = documents.size();
  std::vector<std::size_t> ordinals;  // original ordinal of each usable document
  std::vector<TokenizedDoc> usable;
  for (std::size_t d = 0; d < tokenized.size(); ++d) {
    if (tokenized[d].empty()) {
      ++stats.documents_skipped;
      continue;
    }
    ordinals.push_back(d);
    usable.push_back(std::move(tokenized[d]));
  }

  const std::size_t max_predictions = cfg.predictions_for(max_seq_len);
  const std::size_t block = std::max<std::size_t>(64, 16 * jobs);
  for (std::size_t pass = 0; pass < cfg.dupe_factor; ++pass) {
    const std::uint64_t pass_seed = derive_seed(cfg.rng_seed, pass);
    for (std::size_t begin = 0; begin < usable.size(); begin += block) {
      const std::size_t end = std::min(usable.size(), begin + block);
      std::vector<std::vector<TrainingInstance>> produced(end - begin);
      parallel_for(end - begin, jobs, [&](std::size_t k) {
        Rng rng(derive_seed(pass_seed, ordinals[begin + k]));
        instances_from_document(usable, begin + k, max_seq_len, max_predictions, cfg, ids,
                                rng, produced[k]);
      });
      for (const auto& per_doc : produced) {
        for (const TrainingInstance& inst : per_doc) {
          sink(inst);
          ++stats.instances;
        }
      }
    }
  }
  return stats;
}

std::vector<TrainingInstance> build_instances(std::span<const Document> documents,
                                              const vocab::Vocab& vocab,
                                              std::size_t max_seq_len,
                                              const MaskingConfig& cfg, BuildStats* stats,
                                              unsigned jobs) {
  std::vector<TrainingInstance> out;
  const BuildStats s = build_instances(
      documents, vocab, max_seq_len, cfg,
      [&](const TrainingInstance& inst) { out.push_back(inst); }, jobs);
  if (stats != nullptr) *stats = s;
  return out;
}

std::vector<BuildStats> phase_datasets(std::span<const Document> documents,
                                       const vocab::Vocab& vocab,
                                       const schedule::TrainingPlan& plan,
                                       const MaskingConfig& cfg,
                                       const PhaseSinkFactory& sinks, unsigned jobs) {
  if (plan.phases.empty()) throw ValidationError("a plan needs at least one phase");
  std::vector<BuildStats> out;
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    MaskingConfig phase_cfg = cfg;
    phase_cfg.rng_seed = derive_seed(cfg.rng_seed, i);
    out.push_back(build_instances(documents, vocab, plan.phases[i].seq_len, phase_cfg,
                                  sinks(i), jobs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw ParseError("truncated instance record", 0);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

std::uint8_t get_u8(std::string_view buf, std::size_t& pos) {
  if (pos >= buf.size()) throw ParseError("truncated instance record", 0);
  return static_cast<std::uint8_t>(buf[pos++]);
}

}  // namespace

void write_instance(std::ostream& out, const TrainingInstance& inst) {
  std::string payload;
  const auto len = static_cast<std::uint32_t>(inst.token_ids.size());
  const auto masked = static_cast<std::uint32_t>(inst.masked_positions.size());
  put_u32(payload, len);
  for (std::uint32_t id : inst.token_ids) put_u32(payload, id);
  for (std::uint8_t m : inst.input_mask) payload.push_back(static_cast<char>(m));
  for (std::uint8_t s : inst.segment_ids) payload.push_back(static_cast<char>(s));
  put_u32(payload, masked);
  for (std::uint32_t p : inst.masked_positions) put_u32(payload, p);
  for (std::uint32_t l : inst.masked_labels) put_u32(payload, l);
  payload.push_back(inst.is_next ? 1 : 0);

  std::string header;
  put_u32(header, static_cast<std::uint32_t>(payload.size()));
  out.write(header.data(), 4);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

std::optional<TrainingInstance> read_instance(std::istream& in) {
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  if (in.gcount() == 0) return std::nullopt;
  if (in.gcount() != 4) throw ParseError("truncated instance header", 0);
  std::size_t pos = 0;
  const std::uint32_t size = get_u32(std::string_view(head.data(), 4), pos);
  std::string payload(size, '\0');
  in.read(payload.data(), size);
  if (static_cast<std::uint32_t>(in.gcount()) != size) {
    throw ParseError("truncated instance record", 0);
  }

  TrainingInstance inst;
  pos = 0;
  const std::uint32_t len = get_u32(payload, pos);
  if (static_cast<std::uint64_t>(len) * 6 > payload.size()) {
    throw ParseError("instance length exceeds record", 0);
  }
  inst.token_ids.resize(len);
  for (auto& id : inst.token_ids) id = get_u32(payload, pos);
  inst.input_mask.resize(len);
  for (auto& m : inst.input_mask) m = get_u8(payload, pos);
  inst.segment_ids.resize(len);
  for (auto& s : inst.segment_ids) s = get_u8(payload, pos);
  const std::uint32_t masked = get_u32(payload, pos);
  if (static_cast<std::uint64_t>(masked) * 8 > payload.size() - pos) {
    throw ParseError("masked count exceeds record", 0);
  }
  inst.masked_positions.resize(masked);
  for (auto& p : inst.masked_positions) p = get_u32(payload, pos);
  inst.masked_labels.resize(masked);
  for (auto& l : inst.masked_labels) l = get_u32(payload, pos);
  inst.is_next = get_u8(payload, pos) != 0;
  if (pos != payload.size()) throw ParseError("trailing bytes in instance record", 0);
  return inst;
}

std::string instance_schema_json() {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "bertprep.training_instance";
  j["version"] = 1;
  j["byte_order"] = "little";
  j["record_header"] = {{"name", "payload_bytes"}, {"type", "u32"}};
  j["fields"] = ordered_json::array({
      {{"name", "length"}, {"type", "u32"}},
      {{"name", "token_ids"}, {"type", "u32"}, {"count", "length"}},
      {{"name", "input_mask"}, {"type", "u8"}, {"count", "length"}},
      {{"name", "segment_ids"}, {"type", "u8"}, {"count", "length"}},
      {{"name", "num_masked"}, {"type", "u32"}},
      {{"name", "masked_positions"}, {"type", "u32"}, {"count", "num_masked"}},
      {{"name", "masked_labels"}, {"type", "u32"}, {"count", "num_masked"}},
      {{"name", "is_next"}, {"type", "u8"}},
  });
  return j.dump(2) + "\n";
}

std::vector<Document> read_documents(std::istream& in) {
  std::vector<Document> docs;
  Document current;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string norm = text::collapse_whitespace(text::nfc(line));
    if (norm.empty()) {
      if (!current.empty()) docs.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(std::move(norm));
    }
  }
  if (!current.empty()) docs.push_back(std::move(current));
  return docs;
}

}  // namespace bertprep::pretrain
