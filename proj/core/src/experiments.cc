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

#include "ibspan/experiments.h"

#include <cstdio>

#include "ibspan/error.h"
#include "ibspan/inference.h"
#include "json.hpp"

namespace ibspan {

std::vector<HeadComparison> CompareHeads(const EncoderConfig& encoder_config,
                                         const TrainConfig& base,
                                         const Corpus& train, const Corpus& dev,
                                         const Corpus& test,
                                         const EmbeddingTable& words,
                                         int runs) {
  if (runs < 1) throw Error(ErrorCode::kConfigError, "runs must be >= 1");
  std::vector<HeadComparison> rows;
  for (HeadKind head : {HeadKind::kClassifier, HeadKind::kInstance}) {
    HeadComparison row;
    row.head = head;
    std::vector<double> f1s;
    for (int r = 0; r < runs; ++r) {
      TrainConfig config = base;
      config.head = head;
      config.seed = base.seed + static_cast<std::uint64_t>(r);
      TrainResult result = Train(encoder_config, config, train, dev, words);
      Predictor predictor(result.model, result.train, config.support_sentences);
      Metrics metrics = EvaluateCorpus(predictor, test, config.decoding);
      row.seeds.push_back(config.seed);
      row.test.push_back(metrics);
      f1s.push_back(metrics.f1);
    }
    row.f1 = Summarize(f1s);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AblationRow> SizeAblation(const EncoderConfig& encoder_config,
                                      const TrainConfig& base,
                                      const Corpus& train, const Corpus& dev,
                                      const EmbeddingTable& words,
                                      std::span<const double> fractions) {
  for (double f : fractions) {
    if (!(f > 0 && f <= 1)) {
      throw Error(ErrorCode::kConfigError, "ablation fractions must be in (0, 1]");
    }
  }
  std::vector<AblationRow> rows;
  for (HeadKind head : {HeadKind::kClassifier, HeadKind::kInstance}) {
    for (double fraction : fractions) {
      TrainConfig config = base;
      config.head = head;
      config.train_fraction = fraction;
      TrainResult result = Train(encoder_config, config, train, dev, words);
      AblationRow row{.head = head,
                      .fraction = fraction,
                      .train_sentences = result.train.size()};
      if (result.report.best_epoch >= 0) {
        row.dev = result.report.epochs[result.report.best_epoch].dev;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string FormatComparison(std::span<const HeadComparison> rows) {
  std::string out = "head        runs   test F1 (mean +- sd)\n";
  char line[128];
  for (const HeadComparison& row : rows) {
    std::snprintf(line, sizeof(line), "%-10s  %4zu   %6.2f +- %5.2f\n",
                  std::string(HeadName(row.head)).c_str(), row.test.size(),
                  row.f1.mean, row.f1.stddev);
    out += line;
  }
  return out;
}

std::string FormatAblation(std::span<const AblationRow> rows) {
  std::string out = "head        fraction  sentences  dev F1\n";
  char line[128];
  for (const AblationRow& row : rows) {
    std::snprintf(line, sizeof(line), "%-10s  %8.4f  %9d  %6.2f\n",
                  std::string(HeadName(row.head)).c_str(), row.fraction,
                  row.train_sentences, row.dev.f1);
    out += line;
  }
  return out;
}

std::string ComparisonToJsonLines(std::span<const HeadComparison> rows) {
  std::string out;
  for (const HeadComparison& row : rows) {
    nlohmann::json f1s = nlohmann::json::array();
    for (const Metrics& m : row.test) f1s.push_back(m.f1);
    nlohmann::json line = {{"head", std::string(HeadName(row.head))},
                           {"seeds", row.seeds},
                           {"test_f1", f1s},
                           {"mean_f1", row.f1.mean},
                           {"stddev_f1", row.f1.stddev}};
    out += line.dump() + "\n";
  }
  return out;
}

std::string AblationToJsonLines(std::span<const AblationRow> rows) {
  std::string out;
  for (const AblationRow& row : rows) {
    nlohmann::json line = {{"head", std::string(HeadName(row.head))},
                           {"fraction", row.fraction},
                           {"train_sentences", row.train_sentences},
                           {"dev_f1", row.dev.f1}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace ibspan
