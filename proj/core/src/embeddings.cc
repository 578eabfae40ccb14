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

#include "ibspan/embeddings.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "ibspan/error.h"

namespace ibspan {
namespace {

std::string Lowercase(std::string_view word) {
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower;
}

}  // namespace

EmbeddingTable::EmbeddingTable(int dim, std::uint64_t unk_seed) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorCode::kBadShape, "embedding dim must be > 0");
  std::mt19937_64 rng(unk_seed);
  const double bound = 0.5 / dim;
  std::uniform_real_distribution<double> uniform(-bound, bound);
  unk_.resize(dim);
  for (double& v : unk_) v = uniform(rng);
}

bool EmbeddingTable::Insert(const std::string& word,
                            std::span<const double> vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "'" + word + "' has " + std::to_string(vector.size()) +
                    " values, expected " + std::to_string(dim_));
  }
  auto it = index_.find(word);
  if (it != index_.end()) {
    std::copy(vector.begin(), vector.end(),
              values_.begin() + static_cast<std::ptrdiff_t>(it->second) * dim_);
    ++duplicates_;
    return false;
  }
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
  values_.insert(values_.end(), vector.begin(), vector.end());
  return true;
}

bool EmbeddingTable::Contains(std::string_view word) const {
  return index_.contains(std::string(word));
}

std::span<const double> EmbeddingTable::Row(int index) const {
  return std::span<const double>(values_).subspan(
      static_cast<size_t>(index) * dim_, dim_);
}

std::span<const double> EmbeddingTable::Lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return Row(it->second);
  it = index_.find(Lowercase(word));
  if (it != index_.end()) return Row(it->second);
  return unk_;
}

EmbeddingTable LoadEmbeddings(std::istream& in, int expected_dim,
                              std::uint64_t unk_seed) {
  EmbeddingTable table(expected_dim, unk_seed);
  std::string line;
  std::vector<double> values;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      throw Error(ErrorCode::kDimMismatch,
                  "line " + std::to_string(line_number) + " has no values");
    }
    std::string word = line.substr(0, space);
    values.clear();
    const char* cursor = line.data() + space;
    const char* const end = line.data() + line.size();
    while (cursor < end) {
      while (cursor < end && *cursor == ' ') ++cursor;
      if (cursor == end) break;
      double value = 0;
      auto [next, ec] = std::from_chars(cursor, end, value);
      if (ec != std::errc()) {
        throw Error(ErrorCode::kDimMismatch,
                    "line " + std::to_string(line_number) +
                        ": non-numeric value");
      }
      values.push_back(value);
      cursor = next;
    }
    if (static_cast<int>(values.size()) != expected_dim) {
      throw Error(ErrorCode::kDimMismatch,
                  "line " + std::to_string(line_number) + ": '" + word +
                      "' has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(expected_dim));
    }
    table.Insert(word, values);
  }
  return table;
}

EmbeddingTable LoadEmbeddings(const std::filesystem::path& path,
                              int expected_dim, std::uint64_t unk_seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return LoadEmbeddings(in, expected_dim, unk_seed);
}

void WriteEmbeddings(std::ostream& out, const EmbeddingTable& table) {
  char buffer[32];
  for (const std::string& word : table.words()) {
    out << word;
    for (double v : table.Lookup(word)) {
      auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
      out << ' ' << std::string_view(buffer, end - buffer);
    }
    out << '\n';
  }
}

std::vector<double> SentenceVector(const Sentence& sentence,
                                   const EmbeddingTable& table) {
  std::vector<double> mean(table.dim(), 0.0);
  for (const std::string& token : sentence.tokens) {
    std::span<const double> v = table.Lookup(token);
    for (int k = 0; k < table.dim(); ++k) mean[k] += v[k];
  }
  const double count = std::max(1, sentence.size());
  for (double& v : mean) v /= count;
  return mean;
}

double Cosine(std::span<const double> lhs, std::span<const double> rhs) {
  if (lhs.size() != rhs.size()) {
    throw Error(ErrorCode::kShapeMismatch, "cosine of unequal-length vectors");
  }
  double dot = 0, lhs_norm = 0, rhs_norm = 0;
  for (size_t k = 0; k < lhs.size(); ++k) {
    dot += lhs[k] * rhs[k];
    lhs_norm += lhs[k] * lhs[k];
    rhs_norm += rhs[k] * rhs[k];
  }
  if (lhs_norm == 0 || rhs_norm == 0) return 0.0;
  return dot / (std::sqrt(lhs_norm) * std::sqrt(rhs_norm));
}

}  // namespace ibspan
