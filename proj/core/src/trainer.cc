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

#include "ibspan/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "ibspan/error.h"
#include "ibspan/optim.h"
#include "json.hpp"

namespace ibspan {
namespace {

constexpr std::uint64_t kTrainStream = 0x9e3779b97f4a7c15ULL;

void CheckExclusion(const SupportSet& support, const Corpus& train,
                    std::span<const int> batch_indices) {
  std::set<int> batch_ids;
  for (int index : batch_indices) batch_ids.insert(train.sentences[index].id);
  for (int id : support.sentence_ids) {
    if (batch_ids.contains(id)) {
      throw Error(ErrorCode::kEmptySupport,
                  "support contains batch sentence " + std::to_string(id));
    }
  }
}

}  // namespace

void TrainConfig::Validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kConfigError, "train." + field + " " + why);
  };
  if (support_sentences < 1) fail("support_sentences", "must be positive");
  if (batch_size < 1) fail("batch_size", "must be positive");
  if (epochs < 0) fail("epochs", "must be >= 0");
  if (!(eta0 > 0)) fail("eta0", "must be positive");
  if (rho < 0) fail("rho", "must be >= 0");
  if (!(clip > 0)) fail("clip", "must be positive");
  if (dropout < 0 || dropout >= 1) fail("dropout", "must be in [0, 1)");
  if (!(train_fraction > 0 && train_fraction <= 1)) {
    fail("train_fraction", "must be in (0, 1]");
  }
  if (!(prob_floor > 0 && prob_floor < 1)) fail("prob_floor", "must be in (0, 1)");
}

Corpus SubsampleTraining(const Corpus& corpus, double fraction,
                         std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 1)) {
    throw Error(ErrorCode::kConfigError, "train_fraction must be in (0, 1]");
  }
  if (fraction == 1.0) return corpus;
  const int n = corpus.size();
  const int keep = std::clamp(static_cast<int>(std::lround(fraction * n)), 1,
                              std::max(1, n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(keep, n));
  std::sort(order.begin(), order.end());
  Corpus out;
  out.split = corpus.split;
  for (int i : order) out.sentences.push_back(corpus.sentences[i]);
  return out;
}

std::vector<std::vector<int>> MakeBatches(const Corpus& corpus, int batch_size,
                                          std::mt19937_64& rng) {
  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  constexpr int kBucketWidth = 5;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return corpus.sentences[a].size() / kBucketWidth <
           corpus.sentences[b].size() / kBucketWidth;
  });
  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

Var BatchLoss(Graph& graph, SpanModel& model, const Corpus& prepared_train,
              std::span<const int> batch_indices, const SupportSet& support,
              const TrainConfig& config, std::mt19937_64& rng) {
  Encoder& encoder = model.encoder();
  const int max_width = model.config().max_span_width;
  const LabelSet& labels = model.labels();

  std::vector<Var> query_rows;
  std::vector<LabelId> gold;
  for (int index : batch_indices) {
    const Sentence& sentence = prepared_train.sentences.at(index);
    const std::vector<Span> spans = EnumerateSpans(sentence, max_width);
    query_rows.push_back(encoder.SpanReprs(graph, sentence, spans, true,
                                           config.dropout, rng));
    for (const Span& span : spans) {
      gold.push_back(labels.IdOrNull(sentence.LabelOf(span)));
    }
  }
  Var queries = ops::ConcatRows(query_rows);

  if (model.head() == HeadKind::kClassifier) {
    return ClassifierLoss(graph, queries, *model.classifier(),
                          gold);
  }
  if (support.empty()) {
    throw Error(ErrorCode::kEmptySupport, "instance head needs support spans");
  }
  std::vector<Var> support_rows;
  for (int id : support.sentence_ids) {
    const Sentence* sentence = prepared_train.FindById(id);
    if (sentence == nullptr) {
      throw Error(ErrorCode::kMisalignedCorpora,
                  "support sentence " + std::to_string(id) + " not in corpus");
    }
    const std::vector<Span> spans = EnumerateSpans(*sentence, max_width);
    support_rows.push_back(encoder.SpanReprs(graph, *sentence, spans, true,
                                             config.dropout, rng));
  }
  Var support_reprs = ops::ConcatRows(support_rows);
  return NcaLoss(queries, support_reprs, support.labels(), gold,
                 config.prob_floor);
}

TrainResult Train(const EncoderConfig& encoder_config,
                  const TrainConfig& config, const Corpus& train,
                  const Corpus& dev, const EmbeddingTable& words,
                  const EpochCallback& on_epoch) {
  config.Validate();
  if (train.sentences.empty()) {
    throw Error(ErrorCode::kConfigError, "training corpus is empty");
  }
  const Corpus subset = SubsampleTraining(train, config.train_fraction,
                                          config.seed);
  SpanModel model(encoder_config, config.head, train.Labels(),
                  CharVocab::Build(subset), words, config.seed);
  const Corpus prepared = model.Prepare(subset);
  std::vector<Parameter*> params = model.parameters();
  AdamState adam = MakeAdamState(params);
  std::mt19937_64 rng(config.seed ^ kTrainStream);

  TrainReport report;
  std::vector<Tensor> best = model.SnapshotValues();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = LrSchedule(epoch, config.eta0, config.rho);
    double epoch_loss = 0;
    for (const std::vector<int>& batch :
         MakeBatches(prepared, config.batch_size, rng)) {
      SupportSet support;
      if (model.head() == HeadKind::kInstance) {
        std::vector<int> exclude;
        for (int index : batch) exclude.push_back(prepared.sentences[index].id);
        support = SampleSupport(prepared, config.support_sentences, exclude,
                                encoder_config.max_span_width, model.labels(),
                                rng);
        CheckExclusion(support, prepared, batch);
      }
      ZeroGrads(params);
      Graph graph;
      Var loss = BatchLoss(graph, model, prepared, batch, support, config, rng);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::kDivergedLoss,
                    "non-finite loss at epoch " + std::to_string(epoch));
      }
      graph.Backward(loss);
      ClipGlobalNorm(params, config.clip);
      AdamStep(params, adam, lr);
      epoch_loss += value;
    }

    Predictor predictor(model, subset, config.support_sentences);
    EpochRecord record{.epoch = epoch,
                       .train_loss = epoch_loss,
                       .lr = lr,
                       .dev = EvaluateCorpus(predictor, dev, config.decoding)};
    if (report.best_epoch < 0 || record.dev.f1 > report.best_dev_f1) {
      report.best_epoch = epoch;
      report.best_dev_f1 = record.dev.f1;
      best = model.SnapshotValues();
    }
    report.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  model.RestoreValues(best);
  return TrainResult{std::move(model), std::move(report), subset};
}

void WriteReport(std::ostream& out, const TrainReport& report) {
  for (const EpochRecord& r : report.epochs) {
    nlohmann::json line = {{"epoch", r.epoch},
                           {"loss", r.train_loss},
                           {"lr", r.lr},
                           {"dev_precision", r.dev.precision},
                           {"dev_recall", r.dev.recall},
                           {"dev_f1", r.dev.f1}};
    out << line.dump() << '\n';
  }
  nlohmann::json summary = {{"best_epoch", report.best_epoch},
                            {"best_dev_f1", report.best_dev_f1},
                            {"checkpoint", report.checkpoint_path}};
  out << summary.dump() << '\n';
}

}  // namespace ibspan
