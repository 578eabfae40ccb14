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

#ifndef IBSPAN_EXPERIMENTS_H_
#define IBSPAN_EXPERIMENTS_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/encoder.h"
#include "ibspan/evaluator.h"
#include "ibspan/heads.h"
#include "ibspan/trainer.h"

namespace ibspan {

// Test-set F1 of one head over several seeds.
struct HeadComparison {
  HeadKind head = HeadKind::kClassifier;
  std::vector<std::uint64_t> seeds;
  std::vector<Metrics> test;
  Summary f1;
};

// Trains both heads `runs` times with seeds base.seed, base.seed + 1, ...
// and evaluates each best-dev model on `test`. Classifier row first.
std::vector<HeadComparison> CompareHeads(const EncoderConfig& encoder_config,
                                         const TrainConfig& base,
                                         const Corpus& train, const Corpus& dev,
                                         const Corpus& test,
                                         const EmbeddingTable& words, int runs);

struct AblationRow {
  HeadKind head = HeadKind::kClassifier;
  double fraction = 1.0;
  int train_sentences = 0;
  Metrics dev;  // best-epoch dev metrics
};

// One training run per (head, fraction); rows ordered head-major in the
// given fraction order.
std::vector<AblationRow> SizeAblation(const EncoderConfig& encoder_config,
                                      const TrainConfig& base,
                                      const Corpus& train, const Corpus& dev,
                                      const EmbeddingTable& words,
                                      std::span<const double> fractions);

std::string FormatComparison(std::span<const HeadComparison> rows);
std::string FormatAblation(std::span<const AblationRow> rows);
std::string ComparisonToJsonLines(std::span<const HeadComparison> rows);
std::string AblationToJsonLines(std::span<const AblationRow> rows);

}  // namespace ibspan

#endif  // IBSPAN_EXPERIMENTS_H_
