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

#ifndef IBSPAN_SYNTHETIC_H_
#define IBSPAN_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"

namespace ibspan {

// Pattern-grammar corpora with injected entity lexicons. The flat variant
// has PER/LOC/ORG entities (some surface forms ambiguous between types);
// the nested variant has protein/DNA/cell_type entities where DNA and
// cell_type mentions often contain protein mentions.
struct SyntheticOptions {
  int train_sentences = 240;
  int dev_sentences = 60;
  int test_sentences = 60;
  int word_dim = 50;
  std::uint64_t seed = 7;
  bool nested = false;
  // Fraction of vocabulary left out of the embedding table (exercises the
  // unk path).
  double oov_rate = 0.05;
};

struct SyntheticDataset {
  Corpus train;
  Corpus dev;
  Corpus test;
  EmbeddingTable embeddings;
};

SyntheticDataset GenerateSynthetic(const SyntheticOptions& options);

// Writes train/dev/test (CoNLL columns for flat, JSON lines for nested)
// and embeddings.txt into `dir`.
void WriteSynthetic(const std::filesystem::path& dir,
                    const SyntheticDataset& dataset, bool nested);

}  // namespace ibspan

#endif  // IBSPAN_SYNTHETIC_H_
