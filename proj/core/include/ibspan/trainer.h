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

#ifndef IBSPAN_TRAINER_H_
#define IBSPAN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/encoder.h"
#include "ibspan/evaluator.h"
#include "ibspan/heads.h"
#include "ibspan/inference.h"
#include "ibspan/model.h"

namespace ibspan {

struct TrainConfig {
  HeadKind head = HeadKind::kInstance;
  int support_sentences = 50;  // K, for both random and nearest support
  int batch_size = 8;
  int epochs = 100;
  double eta0 = 0.001;
  double rho = 0.05;
  double clip = 5.0;
  double dropout = 0.3;
  std::uint64_t seed = 1;
  double train_fraction = 1.0;
  double prob_floor = 1e-12;
  Decoding decoding = Decoding::kFlat;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double lr = 0;
  Metrics dev;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;  // -1 when no epoch ran
  double best_dev_f1 = 0;
  std::string checkpoint_path;
};

struct TrainResult {
  SpanModel model;  // parameters of the best dev epoch
  TrainReport report;
  Corpus train;     // the (possibly subsampled) sentences trained on
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Each epoch shuffles length-bucketed mini-batches; the instance head
// samples K support sentences per batch, excluding the batch's own
// sentences. Loss is summed over spans, grads are clipped to the global
// norm `clip` and Adam steps with eta0 / (1 + rho * epoch). The returned
// model holds the parameters with the best dev F1 (earliest on ties).
TrainResult Train(const EncoderConfig& encoder_config,
                  const TrainConfig& config, const Corpus& train,
                  const Corpus& dev, const EmbeddingTable& words,
                  const EpochCallback& on_epoch = {});

// Uniform sentence sample without replacement of round(fraction * size)
// sentences (at least 1), kept in corpus order.
Corpus SubsampleTraining(const Corpus& corpus, double fraction,
                         std::uint64_t seed);

// Mini-batches of sentence indices.
std::vector<std::vector<int>> MakeBatches(const Corpus& corpus, int batch_size,
                                          std::mt19937_64& rng);

// Summed loss of one mini-batch under the current parameters; records the
// gradient into every parameter when `graph` records. The support for the
// instance head is passed in explicitly.
Var BatchLoss(Graph& graph, SpanModel& model, const Corpus& prepared_train,
              std::span<const int> batch_indices, const SupportSet& support,
              const TrainConfig& config, std::mt19937_64& rng);

// One JSON object per epoch, then a summary line.
void WriteReport(std::ostream& out, const TrainReport& report);

}  // namespace ibspan

#endif  // IBSPAN_TRAINER_H_
