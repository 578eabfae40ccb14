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

#include "ibspan/evaluator.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "ibspan/error.h"
#include "json.hpp"

namespace ibspan {

Metrics MetricsFromCounts(long tp, long fp, long fn) {
  Metrics m;
  m.true_positives = tp;
  m.false_positives = fp;
  m.false_negatives = fn;
  m.precision = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics SpanF1(std::span<const SentenceSpans> gold,
               std::span<const SentenceSpans> predicted) {
  using Key = std::tuple<int, int, std::string>;
  std::map<int, std::set<Key>> gold_by_id, pred_by_id;
  auto collect = [](std::span<const SentenceSpans> side,
                    std::map<int, std::set<Key>>& out, const char* name) {
    for (const SentenceSpans& s : side) {
      if (out.contains(s.sentence_id)) {
        throw Error(ErrorCode::kMisalignedCorpora,
                    std::string(name) + " lists sentence " +
                        std::to_string(s.sentence_id) + " twice");
      }
      auto& keys = out[s.sentence_id];
      for (const LabeledSpan& span : s.spans) {
        keys.emplace(span.span.start, span.span.end, span.label);
      }
    }
  };
  collect(gold, gold_by_id, "gold");
  collect(predicted, pred_by_id, "prediction");
  if (gold_by_id.size() != pred_by_id.size()) {
    throw Error(ErrorCode::kMisalignedCorpora,
                std::to_string(gold_by_id.size()) + " gold sentences vs " +
                    std::to_string(pred_by_id.size()) + " predicted");
  }
  long tp = 0, fp = 0, fn = 0;
  for (const auto& [id, gold_keys] : gold_by_id) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) {
      throw Error(ErrorCode::kMisalignedCorpora,
                  "no prediction for sentence " + std::to_string(id));
    }
    long matched = 0;
    for (const Key& key : it->second) matched += gold_keys.count(key);
    tp += matched;
    fp += static_cast<long>(it->second.size()) - matched;
    fn += static_cast<long>(gold_keys.size()) - matched;
  }
  return MetricsFromCounts(tp, fp, fn);
}

std::vector<SentenceSpans> GoldSpans(const Corpus& corpus) {
  std::vector<SentenceSpans> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    out.push_back({s.id, s.gold_spans});
  }
  return out;
}

std::string MetricsToJson(const Metrics& m) {
  nlohmann::json j = {{"tp", m.true_positives}, {"fp", m.false_positives},
                      {"fn", m.false_negatives}, {"precision", m.precision},
                      {"recall", m.recall},      {"f1", m.f1}};
  return j.dump();
}

Metrics MetricsFromJson(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  Metrics m;
  m.true_positives = j.at("tp").get<long>();
  m.false_positives = j.at("fp").get<long>();
  m.false_negatives = j.at("fn").get<long>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  return m;
}

std::string FormatMetrics(const Metrics& m) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "P %6.2f  R %6.2f  F1 %6.2f  (tp %ld, fp %ld, fn %ld)",
                m.precision, m.recall, m.f1, m.true_positives,
                m.false_positives, m.false_negatives);
  return buffer;
}

Summary Summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double squares = 0;
    for (double v : values) squares += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(squares / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace ibspan
