// Copyright 2026 The ibspan Authors.
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

#ifndef IBSPAN_MODEL_H_
#define IBSPAN_MODEL_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ibspan/checkpoint.h"
#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/encoder.h"
#include "ibspan/heads.h"

namespace ibspan {

// Encoder plus one head, with the label set and character vocabulary the
// parameters were built against.
class SpanModel {
 public:
  SpanModel(const EncoderConfig& config, HeadKind head, LabelSet labels,
            CharVocab chars, const EmbeddingTable& words, std::uint64_t seed);

  HeadKind head() const { return head_; }
  const LabelSet& labels() const { return labels_; }
  const CharVocab& chars() const { return chars_; }
  const EncoderConfig& config() const { return encoder_.config(); }
  Encoder& encoder() { return encoder_; }
  // Present only for the classifier head.
  ClassifierParams* classifier() {
    return classifier_ ? &*classifier_ : nullptr;
  }

  std::vector<Parameter*> parameters();
  std::vector<Tensor> SnapshotValues();
  void RestoreValues(const std::vector<Tensor>& values);

  // Copies with character ids indexed against this model's vocabulary.
  Sentence Prepare(const Sentence& sentence) const;
  Corpus Prepare(const Corpus& corpus) const;

  // Eval-mode span representations, one row per span. `sentence` must be
  // prepared.
  Tensor SpanReprs(const Sentence& sentence, std::span<const Span> spans);

  Checkpoint ToCheckpoint(const std::string& digest,
                          const std::string& config_echo);
  // Rebuilds a model from a checkpoint written by ToCheckpoint.
  static SpanModel FromCheckpoint(const Checkpoint& checkpoint,
                                  const EncoderConfig& config,
                                  const EmbeddingTable& words);

 private:
  SpanModel(const EncoderConfig& config, HeadKind head, LabelSet labels,
            CharVocab chars, const EmbeddingTable& words, std::mt19937_64 rng);

  HeadKind head_;
  LabelSet labels_;
  CharVocab chars_;
  Encoder encoder_;
  std::optional<ClassifierParams> classifier_;
};

}  // namespace ibspan

#endif  // IBSPAN_MODEL_H_
