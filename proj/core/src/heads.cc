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

#include "ibspan/heads.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ibspan/error.h"
#include "ibspan/optim.h"

namespace ibspan {

std::string_view HeadName(HeadKind head) {
  return head == HeadKind::kInstance ? "instance" : "classifier";
}

HeadKind ParseHead(std::string_view name) {
  if (name == "instance") return HeadKind::kInstance;
  if (name == "classifier") return HeadKind::kClassifier;
  throw Error(ErrorCode::kConfigError,
              "train.head must be classifier or instance, got '" +
                  std::string(name) + "'");
}

ClassifierParams::ClassifierParams(int num_labels, int span_dim,
                                   std::mt19937_64& rng) {
  if (num_labels < 2) {
    throw Error(ErrorCode::kBadShape,
                "classifier needs at least one non-NULL label");
  }
  label_weights = Parameter("classifier.label_weights",
                            InitGlorot({num_labels - 1, span_dim}, rng));
  label_bias = Parameter("classifier.label_bias",
                         Tensor::Zeros(1, num_labels - 1));
}

std::vector<double> ClassifierScores(std::span<const double> span_repr,
                                     const ClassifierParams& params) {
  const Tensor& label_weights = params.label_weights.value;
  if (label_weights.cols() != static_cast<int>(span_repr.size())) {
    throw Error(ErrorCode::kShapeMismatch,
                "span repr has " + std::to_string(span_repr.size()) +
                    " dims, label weights " + label_weights.ShapeString());
  }
  std::vector<double> scores(label_weights.rows() + 1, 0.0);
  for (int y = 0; y < label_weights.rows(); ++y) {
    auto w = label_weights.row(y);
    double dot = 0;
    for (std::size_t k = 0; k < w.size(); ++k) dot += w[k] * span_repr[k];
    scores[y + 1] = dot + params.label_bias.value[y];
  }
  return scores;
}

LabelDistribution ClassifierDistribution(std::span<const double> span_repr,
                                         const ClassifierParams& params) {
  return SoftmaxOf(ClassifierScores(span_repr, params));
}

Var ClassifierLogits(Graph& graph, Var span_reprs, Var label_weights,
                     Var label_bias) {
  Var scores = ops::AddRow(ops::MatMulNT(span_reprs, label_weights), label_bias);
  const Var parts[] = {graph.Constant(Tensor::Zeros(span_reprs.rows(), 1)),
                       scores};
  return ops::ConcatCols(parts);
}

Var ClassifierLoss(Graph& graph, Var span_reprs, ClassifierParams& params,
                   std::span<const LabelId> gold) {
  Var logits = ClassifierLogits(graph, span_reprs,
                                graph.Param(params.label_weights),
                                graph.Param(params.label_bias));
  return ops::SoftmaxCrossEntropy(logits, gold);
}

std::vector<LabelId> SupportSet::labels() const {
  std::vector<LabelId> out;
  out.reserve(spans.size());
  for (const SupportSpan& s : spans) out.push_back(s.label);
  return out;
}

SupportSet SupportFromSentences(const Corpus& train,
                                std::span<const int> sentence_ids,
                                int max_width, const LabelSet& labels) {
  SupportSet support;
  support.sentence_ids.assign(sentence_ids.begin(), sentence_ids.end());
  for (int id : sentence_ids) {
    const Sentence* sentence = train.FindById(id);
    if (sentence == nullptr) {
      throw Error(ErrorCode::kMisalignedCorpora,
                  "support sentence " + std::to_string(id) + " not in corpus");
    }
    for (const Span& span : EnumerateSpans(*sentence, max_width)) {
      support.spans.push_back(
          {id, span, labels.IdOrNull(sentence->LabelOf(span))});
    }
  }
  return support;
}

SupportSet SampleSupport(const Corpus& train, int k,
                         std::span<const int> exclude, int max_width,
                         const LabelSet& labels, std::mt19937_64& rng) {
  const std::set<int> excluded(exclude.begin(), exclude.end());
  std::vector<int> eligible;
  for (const Sentence& sentence : train.sentences) {
    if (!excluded.contains(sentence.id)) eligible.push_back(sentence.id);
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::kEmptySupport,
                "no training sentence left after exclusion");
  }
  const int take = std::min<int>(k, static_cast<int>(eligible.size()));
  // Partial Fisher-Yates: the first `take` slots are a uniform sample.
  for (int i = 0; i < take; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(eligible.size()) - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(take);
  return SupportFromSentences(train, eligible, max_width, labels);
}

std::vector<double> NeighborScores(std::span<const double> query,
                                   const Tensor& support_reprs) {
  if (support_reprs.rows() == 0) {
    throw Error(ErrorCode::kEmptySupport, "empty support");
  }
  if (support_reprs.cols() != static_cast<int>(query.size())) {
    throw Error(ErrorCode::kShapeMismatch,
                "query has " + std::to_string(query.size()) +
                    " dims, support " + support_reprs.ShapeString());
  }
  std::vector<double> scores(support_reprs.rows());
  for (int j = 0; j < support_reprs.rows(); ++j) {
    auto h = support_reprs.row(j);
    double dot = 0;
    for (std::size_t k = 0; k < h.size(); ++k) dot += query[k] * h[k];
    scores[j] = dot;
  }
  return scores;
}

std::vector<double> SoftmaxOf(std::span<const double> scores) {
  std::vector<double> probs(scores.begin(), scores.end());
  if (probs.empty()) return probs;
  const double peak = *std::max_element(probs.begin(), probs.end());
  double total = 0;
  for (double& p : probs) {
    p = std::exp(p - peak);
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::vector<double> NeighborProbs(std::span<const double> query,
                                  const Tensor& support_reprs) {
  return SoftmaxOf(NeighborScores(query, support_reprs));
}

LabelDistribution MarginalLabelProbs(std::span<const double> neighbor_probs,
                                     std::span<const LabelId> support_labels,
                                     int num_labels) {
  if (neighbor_probs.size() != support_labels.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "one neighbor probability per support span required");
  }
  LabelDistribution dist(num_labels, 0.0);
  for (std::size_t j = 0; j < neighbor_probs.size(); ++j) {
    dist.at(support_labels[j]) += neighbor_probs[j];
  }
  return dist;
}

Var NcaLoss(Var query_reprs, Var support_reprs,
            std::span<const LabelId> support_labels,
            std::span<const LabelId> gold, double floor) {
  Var scores = ops::MatMulNT(query_reprs, support_reprs);
  return ops::NcaNll(scores, support_labels, gold, floor);
}

LabelId PredictLabel(std::span<const double> distribution) {
  LabelId best = 0;
  for (std::size_t y = 1; y < distribution.size(); ++y) {
    if (distribution[y] > distribution[best]) best = static_cast<LabelId>(y);
  }
  return best;
}

}  // namespace ibspan
