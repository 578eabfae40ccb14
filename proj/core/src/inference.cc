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

#include "ibspan/inference.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "ibspan/error.h"
#include "json.hpp"

namespace ibspan {
namespace {

// Indices into `vectors` ranked by cosine with `query`, best first, ties to
// the smaller sentence id.
std::vector<int> RankByCosine(std::span<const double> query,
                              const std::vector<std::vector<double>>& vectors,
                              const Corpus& train, int k) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    scored.emplace_back(Cosine(query, vectors[i]), train.sentences[i].id);
  }
  const std::size_t keep =
      std::min<std::size_t>(std::max(k, 0), scored.size());
  auto better = [](const auto& lhs, const auto& rhs) {
    if (lhs.first != rhs.first) return lhs.first > rhs.first;
    return lhs.second < rhs.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    better);
  std::vector<int> ids;
  ids.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(scored[i].second);
  return ids;
}

void CheckSpan(const Sentence& sentence, const Span& span) {
  if (span.start < 1 || span.start > span.end || span.end > sentence.size()) {
    throw Error(ErrorCode::kSpanOutOfRange,
                "span (" + std::to_string(span.start) + "," +
                    std::to_string(span.end) + ") on a " +
                    std::to_string(sentence.size()) + "-token sentence");
  }
}

}  // namespace

std::vector<int> RetrieveSupportKnn(const Sentence& query, const Corpus& train,
                                    int k, const EmbeddingTable& words) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(train.sentences.size());
  for (const Sentence& s : train.sentences) {
    vectors.push_back(SentenceVector(s, words));
  }
  return RankByCosine(SentenceVector(query, words), vectors, train, k);
}

std::vector<LabeledSpan> DecodeFlat(std::span<const Prediction> predictions,
                                    const LabelSet& labels) {
  std::vector<const Prediction*> candidates;
  for (const Prediction& p : predictions) {
    if (p.label != labels.null_id()) candidates.push_back(&p);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Prediction* lhs, const Prediction* rhs) {
                     if (lhs->probability() != rhs->probability()) {
                       return lhs->probability() > rhs->probability();
                     }
                     return lhs->span < rhs->span;
                   });
  std::vector<LabeledSpan> accepted;
  for (const Prediction* p : candidates) {
    const bool clashes =
        std::any_of(accepted.begin(), accepted.end(),
                    [&](const LabeledSpan& a) { return a.span.Overlaps(p->span); });
    if (!clashes) accepted.push_back({p->span, labels.name(p->label)});
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::vector<LabeledSpan> DecodeNested(std::span<const Prediction> predictions,
                                      const LabelSet& labels) {
  std::vector<LabeledSpan> out;
  for (const Prediction& p : predictions) {
    if (p.label != labels.null_id()) out.push_back({p.span, labels.name(p.label)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LabeledSpan> Decode(std::span<const Prediction> predictions,
                                const LabelSet& labels, Decoding decoding) {
  return decoding == Decoding::kNested ? DecodeNested(predictions, labels)
                                       : DecodeFlat(predictions, labels);
}

std::string BracketedContext(const Sentence& sentence, const Span& span,
                             int window) {
  const int first = std::max(1, span.start - window);
  const int last = std::min(sentence.size(), span.end + window);
  std::string out;
  if (first > 1) out += "... ";
  for (int i = first; i <= last; ++i) {
    if (i > first) out += ' ';
    if (i == span.start) out += '[';
    out += sentence.tokens[i - 1];
    if (i == span.end) out += ']';
  }
  if (last < sentence.size()) out += " ...";
  return out;
}

std::string RenderExplanation(const Explanation& e, const LabelSet& labels) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "query: sentence %d span (%d,%d) \"",
                e.sentence_id, e.query.start, e.query.end);
  out += line + e.query_text + "\"\n";
  std::snprintf(line, sizeof(line), "prediction: %s p=%.6f\n",
                labels.name(e.predicted).c_str(),
                e.distribution.at(e.predicted));
  out += line;
  out += "distribution:";
  for (int y = 0; y < labels.size(); ++y) {
    std::snprintf(line, sizeof(line), " %s=%.6f", labels.name(y).c_str(),
                  e.distribution.at(y));
    out += line;
  }
  std::snprintf(line, sizeof(line), "\nneighbors: %zu of %d support spans\n",
                e.neighbors.size(), e.support_size);
  out += line;
  int rank = 1;
  for (const Neighbor& n : e.neighbors) {
    std::snprintf(line, sizeof(line),
                  "%3d  %-10s p=%.6f  score=%+.6f  sentence %d (%d,%d)  ",
                  rank++, labels.name(n.source.label).c_str(), n.probability,
                  n.score, n.source.sentence_id, n.source.span.start,
                  n.source.span.end);
    out += line + n.context + "\n";
  }
  return out;
}

Predictor::Predictor(SpanModel& model, const Corpus& train, int k)
    : model_(&model), train_(model.Prepare(train)), k_(k) {
  if (train_.sentences.empty()) {
    throw Error(ErrorCode::kEmptySupport, "predictor needs training sentences");
  }
  train_vectors_.reserve(train_.sentences.size());
  for (const Sentence& s : train_.sentences) {
    train_vectors_.push_back(SentenceVector(s, model.encoder().words()));
  }
}

const Tensor& Predictor::TrainReprs(int sentence_id) {
  auto it = train_reprs_.find(sentence_id);
  if (it != train_reprs_.end()) return it->second;
  const Sentence* sentence = train_.FindById(sentence_id);
  if (sentence == nullptr) {
    throw Error(ErrorCode::kMisalignedCorpora,
                "unknown training sentence " + std::to_string(sentence_id));
  }
  const std::vector<Span> spans =
      EnumerateSpans(*sentence, model_->config().max_span_width);
  return train_reprs_.emplace(sentence_id, model_->SpanReprs(*sentence, spans))
      .first->second;
}

void Predictor::FillReprs(SupportSet& support) {
  const int dim = model_->config().span_dim;
  support.reprs = Tensor::Zeros(support.size(), dim);
  int row = 0;
  for (int id : support.sentence_ids) {
    const Tensor& reprs = TrainReprs(id);
    std::copy(reprs.values().begin(), reprs.values().end(),
              support.reprs.data() + static_cast<std::size_t>(row) * dim);
    row += reprs.rows();
  }
  if (row != support.size()) {
    throw Error(ErrorCode::kShapeMismatch, "support rows do not match spans");
  }
}

SupportSet Predictor::SupportFor(const Sentence& sentence) {
  std::vector<int> ids = RankByCosine(
      SentenceVector(sentence, model_->encoder().words()), train_vectors_,
      train_, k_);
  SupportSet support = SupportFromSentences(
      train_, ids, model_->config().max_span_width, model_->labels());
  if (support.empty()) {
    throw Error(ErrorCode::kEmptySupport, "retrieved support has no spans");
  }
  FillReprs(support);
  return support;
}

std::vector<Prediction> Predictor::PredictSentence(const Sentence& sentence) {
  if (model_->head() == HeadKind::kInstance) {
    return PredictSentence(sentence, SupportFor(sentence));
  }
  return PredictSentence(sentence, SupportSet{});
}

std::vector<Prediction> Predictor::PredictSentence(const Sentence& sentence,
                                                   const SupportSet& support) {
  const Sentence prepared = model_->Prepare(sentence);
  const std::vector<Span> spans =
      EnumerateSpans(prepared, model_->config().max_span_width);
  const Tensor reprs = model_->SpanReprs(prepared, spans);
  const std::vector<LabelId> support_labels = support.labels();
  const int num_labels = model_->labels().size();
  std::vector<Prediction> out;
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Prediction p{.sentence_id = sentence.id, .span = spans[i]};
    auto query = reprs.row(static_cast<int>(i));
    if (model_->head() == HeadKind::kInstance) {
      if (support.empty()) throw Error(ErrorCode::kEmptySupport, "empty support");
      p.distribution = MarginalLabelProbs(NeighborProbs(query, support.reprs),
                                          support_labels, num_labels);
    } else {
      p.distribution = ClassifierDistribution(query,
                                              *model_->classifier());
    }
    p.label = PredictLabel(p.distribution);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SentenceSpans> Predictor::PredictCorpus(const Corpus& corpus,
                                                    Decoding decoding) {
  std::vector<SentenceSpans> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence& sentence : corpus.sentences) {
    std::vector<Prediction> predictions = PredictSentence(sentence);
    out.push_back(
        {sentence.id, Decode(predictions, model_->labels(), decoding)});
  }
  return out;
}

Explanation Predictor::Explain(const Sentence& sentence, const Span& span,
                               int top_k) {
  CheckSpan(sentence, span);
  const Sentence prepared = model_->Prepare(sentence);
  const std::vector<Span> spans =
      EnumerateSpans(prepared, model_->config().max_span_width);
  auto where = std::find(spans.begin(), spans.end(), span);
  // Spans wider than the enumeration limit are still explainable.
  const Tensor reprs = where == spans.end()
                           ? model_->SpanReprs(prepared, std::span(&span, 1))
                           : model_->SpanReprs(prepared, spans);
  auto query = reprs.row(where == spans.end()
                             ? 0
                             : static_cast<int>(where - spans.begin()));

  SupportSet support = SupportFor(sentence);
  const std::vector<double> scores = NeighborScores(query, support.reprs);
  const std::vector<double> probs = SoftmaxOf(scores);

  Explanation e;
  e.sentence_id = sentence.id;
  e.query = span;
  e.query_text = sentence.Text(span);
  e.support_size = support.size();
  if (model_->head() == HeadKind::kInstance) {
    e.distribution = MarginalLabelProbs(probs, support.labels(),
                                        model_->labels().size());
  } else {
    e.distribution = ClassifierDistribution(query, *model_->classifier());
  }
  e.predicted = PredictLabel(e.distribution);

  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  const int shown = std::min<int>(std::max(top_k, 0), support.size());
  for (int r = 0; r < shown; ++r) {
    const SupportSpan& source = support.spans[order[r]];
    const Sentence* origin = train_.FindById(source.sentence_id);
    e.neighbors.push_back({.source = source,
                           .text = origin->Text(source.span),
                           .context = BracketedContext(*origin, source.span),
                           .score = scores[order[r]],
                           .probability = probs[order[r]]});
  }
  return e;
}

Metrics EvaluateCorpus(Predictor& predictor, const Corpus& corpus,
                       Decoding decoding) {
  const std::vector<SentenceSpans> predicted =
      predictor.PredictCorpus(corpus, decoding);
  const std::vector<SentenceSpans> gold = GoldSpans(corpus);
  return SpanF1(gold, predicted);
}

void WritePredictions(std::ostream& out, const Corpus& corpus,
                      Predictor& predictor, Decoding decoding,
                      bool with_distribution) {
  const LabelSet& labels = predictor.model().labels();
  for (const Sentence& sentence : corpus.sentences) {
    std::vector<Prediction> predictions = predictor.PredictSentence(sentence);
    for (const LabeledSpan& decoded : Decode(predictions, labels, decoding)) {
      auto it = std::find_if(
          predictions.begin(), predictions.end(),
          [&](const Prediction& p) { return p.span == decoded.span; });
      nlohmann::json record = {{"sentence_id", sentence.id},
                               {"start", decoded.span.start},
                               {"end", decoded.span.end},
                               {"label", decoded.label},
                               {"probability", it->probability()}};
      if (with_distribution) {
        nlohmann::json dist = nlohmann::json::object();
        for (int y = 0; y < labels.size(); ++y) {
          dist[labels.name(y)] = it->distribution[y];
        }
        record["distribution"] = dist;
      }
      out << record.dump() << '\n';
    }
  }
}

std::vector<SentenceSpans> ReadPredictions(std::istream& in,
                                           const Corpus& corpus) {
  std::vector<SentenceSpans> out;
  std::map<int, std::size_t> slot;
  for (const Sentence& s : corpus.sentences) {
    slot[s.id] = out.size();
    out.push_back({s.id, {}});
  }
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json record = nlohmann::json::parse(line);
      const int id = record.at("sentence_id").get<int>();
      auto it = slot.find(id);
      if (it == slot.end()) {
        throw Error(ErrorCode::kMisalignedCorpora,
                    "line " + std::to_string(line_number) +
                        ": prediction for unknown sentence " +
                        std::to_string(id));
      }
      out[it->second].spans.push_back(
          {{record.at("start").get<int>(), record.at("end").get<int>()},
           record.at("label").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

void DumpFeatures(std::ostream& out, const Corpus& corpus, SpanModel& model) {
  for (const Sentence& sentence : corpus.sentences) {
    if (sentence.gold_spans.empty()) continue;
    const Sentence prepared = model.Prepare(sentence);
    std::vector<Span> spans;
    for (const LabeledSpan& gold : sentence.gold_spans) spans.push_back(gold.span);
    const Tensor reprs = model.SpanReprs(prepared, spans);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      auto row = reprs.row(static_cast<int>(i));
      nlohmann::json record = {
          {"sentence_id", sentence.id},
          {"split", std::string(SplitName(corpus.split))},
          {"start", spans[i].start},
          {"end", spans[i].end},
          {"label", sentence.gold_spans[i].label},
          {"text", sentence.Text(spans[i])},
          {"vector", std::vector<double>(row.begin(), row.end())}};
      out << record.dump() << '\n';
    }
  }
}

void DumpFeatures(const std::filesystem::path& path, const Corpus& corpus,
                  SpanModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  DumpFeatures(out, corpus, model);
}

}  // namespace ibspan
