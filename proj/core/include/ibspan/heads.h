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

#ifndef IBSPAN_HEADS_H_
#define IBSPAN_HEADS_H_

#include <random>
#include <span>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/graph.h"
#include "ibspan/tensor.h"

namespace ibspan {

enum class HeadKind { kClassifier, kInstance };

std::string_view HeadName(HeadKind head);
HeadKind ParseHead(std::string_view name);

// Probability per label id, NULL included.
using LabelDistribution = std::vector<double>;

// ---------------------------------------------------------------------------
// Classifier head: one weight vector and bias per non-NULL label, NULL
// scored 0.
//
// The bias matters with the flat LSTM-minus features: without it a span's
// score is Phi(b) - Phi(a-1) for some per-label potential, so a multi-word
// span scores exactly the sum of its pieces and cannot beat them all.

struct ClassifierParams {
  ClassifierParams() = default;
  ClassifierParams(int num_labels, int span_dim, std::mt19937_64& rng);

  Parameter label_weights;  // [num_labels - 1, span_dim]; row k is label k+1
  Parameter label_bias;     // [1, num_labels - 1], zero at init
};

// score(s, y) = w_y . h_s + c_y for y != NULL, 0 for NULL.
std::vector<double> ClassifierScores(std::span<const double> span_repr,
                                     const ClassifierParams& params);
LabelDistribution ClassifierDistribution(std::span<const double> span_repr,
                                         const ClassifierParams& params);
// Per-span label scores [N, num_labels] with column 0 pinned at zero.
Var ClassifierLogits(Graph& graph, Var span_reprs, Var label_weights,
                     Var label_bias);
// -sum log P(gold | s) over the rows of span_reprs.
Var ClassifierLoss(Graph& graph, Var span_reprs, ClassifierParams& params,
                   std::span<const LabelId> gold);

// ---------------------------------------------------------------------------
// Instance-based head.

struct SupportSpan {
  int sentence_id = 0;
  Span span;
  LabelId label = LabelSet::kNullId;
};

// Candidate training spans. `reprs` holds one row per span once encoded.
struct SupportSet {
  std::vector<int> sentence_ids;
  std::vector<SupportSpan> spans;
  Tensor reprs;

  int size() const { return static_cast<int>(spans.size()); }
  bool empty() const { return spans.empty(); }
  std::vector<LabelId> labels() const;
};

// Every span of width <= max_width of the given sentences, labeled with its
// gold label (NULL for non-entities).
SupportSet SupportFromSentences(const Corpus& train,
                                std::span<const int> sentence_ids,
                                int max_width, const LabelSet& labels);

// Uniformly samples min(k, eligible) sentences without replacement from the
// training sentences whose ids are not in `exclude`. Throws EmptySupport
// when none is eligible.
SupportSet SampleSupport(const Corpus& train, int k,
                         std::span<const int> exclude, int max_width,
                         const LabelSet& labels, std::mt19937_64& rng);

// P(s_j | s_i) = softmax_j(h_i . h_j) over the rows of support_reprs.
std::vector<double> NeighborScores(std::span<const double> query,
                                   const Tensor& support_reprs);
std::vector<double> NeighborProbs(std::span<const double> query,
                                  const Tensor& support_reprs);
// Softmax of raw scores with max-shift stabilization.
std::vector<double> SoftmaxOf(std::span<const double> scores);

// P(y | s_i) = sum of neighbor probabilities with label y.
LabelDistribution MarginalLabelProbs(std::span<const double> neighbor_probs,
                                     std::span<const LabelId> support_labels,
                                     int num_labels);

// -sum_i log max(P(y_i | s_i), floor) for the rows of query_reprs against
// support_reprs.
Var NcaLoss(Var query_reprs, Var support_reprs,
            std::span<const LabelId> support_labels,
            std::span<const LabelId> gold, double floor);

// Argmax with ties going to the smallest label id.
LabelId PredictLabel(std::span<const double> distribution);

}  // namespace ibspan

#endif  // IBSPAN_HEADS_H_
