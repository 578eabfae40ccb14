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

#ifndef IBSPAN_INFERENCE_H_
#define IBSPAN_INFERENCE_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/evaluator.h"
#include "ibspan/heads.h"
#include "ibspan/model.h"

namespace ibspan {

enum class Decoding { kFlat, kNested };

struct Prediction {
  int sentence_id = 0;
  Span span;
  LabelDistribution distribution;
  LabelId label = LabelSet::kNullId;

  double probability() const { return distribution.at(label); }
};

// Ids of the k training sentences with the highest cosine similarity
// between mean word vectors, best first, ties to the smaller id.
std::vector<int> RetrieveSupportKnn(const Sentence& query, const Corpus& train,
                                    int k, const EmbeddingTable& words);

// Keeps non-NULL predictions, then greedily accepts spans in decreasing
// argmax probability that do not overlap an accepted span. Equal
// probabilities go to the earlier (start, end). Output sorted by span.
std::vector<LabeledSpan> DecodeFlat(std::span<const Prediction> predictions,
                                    const LabelSet& labels);
// Every non-NULL argmax span; nesting and crossing allowed.
std::vector<LabeledSpan> DecodeNested(std::span<const Prediction> predictions,
                                      const LabelSet& labels);
std::vector<LabeledSpan> Decode(std::span<const Prediction> predictions,
                                const LabelSet& labels, Decoding decoding);

struct Neighbor {
  SupportSpan source;
  std::string text;
  // Source sentence with the span bracketed, clipped to +-5 tokens.
  std::string context;
  double score = 0;
  double probability = 0;
};

struct Explanation {
  int sentence_id = 0;
  Span query;
  std::string query_text;
  LabelId predicted = LabelSet::kNullId;
  LabelDistribution distribution;
  int support_size = 0;
  std::vector<Neighbor> neighbors;  // by probability, descending
};

// Text report with a fixed field order.
std::string RenderExplanation(const Explanation& explanation,
                              const LabelSet& labels);
std::string BracketedContext(const Sentence& sentence, const Span& span,
                             int window = 5);

// Test-time predictor. For the instance head every query sentence gets
// the k nearest training sentences as support; training-sentence span
// representations are computed once and cached.
class Predictor {
 public:
  Predictor(SpanModel& model, const Corpus& train, int k);

  SpanModel& model() { return *model_; }
  const Corpus& train() const { return train_; }

  // Support (with representation rows) for a query sentence.
  SupportSet SupportFor(const Sentence& sentence);
  std::vector<Prediction> PredictSentence(const Sentence& sentence);
  // Same, against an explicit support whose reprs are filled.
  std::vector<Prediction> PredictSentence(const Sentence& sentence,
                                          const SupportSet& support);
  std::vector<SentenceSpans> PredictCorpus(const Corpus& corpus,
                                           Decoding decoding);
  Explanation Explain(const Sentence& sentence, const Span& span, int top_k);

 private:
  const Tensor& TrainReprs(int sentence_id);
  void FillReprs(SupportSet& support);

  SpanModel* model_;
  Corpus train_;
  int k_;
  std::vector<std::vector<double>> train_vectors_;
  std::map<int, Tensor> train_reprs_;
};

Metrics EvaluateCorpus(Predictor& predictor, const Corpus& corpus,
                       Decoding decoding);

// One JSON line per decoded span: sentence_id, start, end, label,
// probability, and with `with_distribution` the full label distribution.
void WritePredictions(std::ostream& out, const Corpus& corpus,
                      Predictor& predictor, Decoding decoding,
                      bool with_distribution);
std::vector<SentenceSpans> ReadPredictions(std::istream& in,
                                           const Corpus& corpus);

// One JSON line per gold span: sentence_id, start, end, label, text,
// split, vector (span_dim values).
void DumpFeatures(std::ostream& out, const Corpus& corpus, SpanModel& model);
void DumpFeatures(const std::filesystem::path& path, const Corpus& corpus,
                  SpanModel& model);

}  // namespace ibspan

#endif  // IBSPAN_INFERENCE_H_
