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

#ifndef IBSPAN_EMBEDDINGS_H_
#define IBSPAN_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ibspan/corpus.h"

namespace ibspan {

// Frozen pretrained word vectors. Lookup tries the exact form, then the
// lowercased form, then falls back to a fixed random unk vector.
class EmbeddingTable {
 public:
  static constexpr std::uint64_t kDefaultUnkSeed = 0x5eed0f0bULL;

  EmbeddingTable() = default;
  EmbeddingTable(int dim, std::uint64_t unk_seed = kDefaultUnkSeed);

  // Adds or replaces a vector. Returns false when `word` was already present.
  bool Insert(const std::string& word, std::span<const double> vector);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(words_.size()); }
  bool Contains(std::string_view word) const;
  std::span<const double> Lookup(std::string_view word) const;
  std::span<const double> unk_vector() const { return unk_; }
  // Duplicate words seen while loading; the last occurrence is kept.
  int duplicate_count() const { return duplicates_; }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::span<const double> Row(int index) const;

  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> unk_;
  int duplicates_ = 0;
};

// Text format: one "word v1 ... vD" line per word, space separated.
EmbeddingTable LoadEmbeddings(std::istream& in, int expected_dim,
                              std::uint64_t unk_seed =
                                  EmbeddingTable::kDefaultUnkSeed);
EmbeddingTable LoadEmbeddings(const std::filesystem::path& path,
                              int expected_dim,
                              std::uint64_t unk_seed =
                                  EmbeddingTable::kDefaultUnkSeed);
void WriteEmbeddings(std::ostream& out, const EmbeddingTable& table);

// Mean of the token embeddings.
std::vector<double> SentenceVector(const Sentence& sentence,
                                   const EmbeddingTable& table);

// Cosine similarity; 0 when either vector has zero norm.
double Cosine(std::span<const double> lhs, std::span<const double> rhs);

}  // namespace ibspan

#endif  // IBSPAN_EMBEDDINGS_H_
