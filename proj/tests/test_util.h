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

#ifndef IBSPAN_TESTS_TEST_UTIL_H_
#define IBSPAN_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/encoder.h"
#include "ibspan/evaluator.h"

namespace ibspan::testing {

inline Sentence MakeSentence(int id, const std::string& text,
                             std::vector<LabeledSpan> spans = {}) {
  Sentence s;
  s.id = id;
  std::istringstream in(text);
  for (std::string w; in >> w;) s.tokens.push_back(w);
  s.gold_spans = std::move(spans);
  return s;
}

inline Corpus MakeCorpus(std::vector<Sentence> sentences,
                         Split split = Split::kTrain) {
  Corpus c;
  c.sentences = std::move(sentences);
  c.split = split;
  return c;
}

// Five short sentences with PER/LOC/ORG spans, T <= 6.
inline Corpus ToyCorpus() {
  return MakeCorpus({
      MakeSentence(0, "Franz Kafka is a novelist", {{{1, 2}, "PER"}}),
      MakeSentence(1, "Kafka lived in Prague", {{{1, 1}, "PER"}, {{4, 4}, "LOC"}}),
      MakeSentence(2, "Acme Corp hired Anna", {{{1, 2}, "ORG"}, {{4, 4}, "PER"}}),
      MakeSentence(3, "it rained in Oslo today", {{{4, 4}, "LOC"}}),
      MakeSentence(4, "nothing happened here", {}),
  });
}

// Gaussian vectors for every token of `corpora` (plus lowercase forms
// left out, so case fallback and unk both get exercised).
inline EmbeddingTable RandomEmbeddings(const std::vector<const Corpus*>& corpora,
                                       int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  EmbeddingTable table(dim);
  std::vector<double> v(dim);
  for (const Corpus* c : corpora) {
    for (const Sentence& s : c->sentences) {
      for (const std::string& t : s.tokens) {
        if (table.Contains(t)) continue;
        for (double& x : v) x = normal(rng);
        table.Insert(t, v);
      }
    }
  }
  return table;
}

inline EncoderConfig MiniEncoder(FeatureMode mode = FeatureMode::kFlat) {
  EncoderConfig c;
  c.word_dim = 8;
  c.char_dim = 4;
  c.char_filters = 4;
  c.char_window = 3;
  c.lstm_layers = 2;
  c.lstm_hidden = 8;
  c.span_dim = 8;
  c.max_span_width = 6;
  c.mode = mode;
  return c;
}

// Gold and predicted span lists over `sentences` ids; predictions copy
// some gold spans, perturb others and add noise, so every count is hit.
struct SpanCorpora {
  std::vector<SentenceSpans> gold;
  std::vector<SentenceSpans> predicted;
};

inline SpanCorpora RandomSpanCorpora(std::mt19937_64& rng, int sentences) {
  static const std::vector<std::string> kLabels = {"PER", "LOC", "ORG"};
  std::uniform_int_distribution<int> start(1, 12), width(0, 3), label(0, 2),
      count(0, 5), coin(0, 3);
  auto random_span = [&] {
    const int a = start(rng);
    return LabeledSpan{{a, a + width(rng)}, kLabels[label(rng)]};
  };
  SpanCorpora out;
  for (int id = 0; id < sentences; ++id) {
    SentenceSpans gold{id, {}}, predicted{id, {}};
    for (int i = count(rng); i > 0; --i) gold.spans.push_back(random_span());
    for (const LabeledSpan& g : gold.spans) {
      switch (coin(rng)) {
        case 0: break;  // missed
        case 1: predicted.spans.push_back({g.span, kLabels[label(rng)]}); break;
        default: predicted.spans.push_back(g);
      }
    }
    for (int i = coin(rng); i > 1; --i) predicted.spans.push_back(random_span());
    out.gold.push_back(std::move(gold));
    out.predicted.push_back(std::move(predicted));
  }
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ibspan_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ibspan::testing

#endif  // IBSPAN_TESTS_TEST_UTIL_H_
