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

#ifndef IBSPAN_EVALUATOR_H_
#define IBSPAN_EVALUATOR_H_

#include <span>
#include <string>
#include <vector>

#include "ibspan/corpus.h"

namespace ibspan {

// Exact-match span counts micro-averaged over a corpus. Rates are percent.
struct Metrics {
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Fills precision/recall/f1 from the counts; 0 wherever a denominator is 0.
Metrics MetricsFromCounts(long tp, long fp, long fn);

struct SentenceSpans {
  int sentence_id = 0;
  std::vector<LabeledSpan> spans;
};

// A match is an identical (sentence id, start, end, label). Sentences are
// paired by id; the two sides must list the same ids, in any order.
Metrics SpanF1(std::span<const SentenceSpans> gold,
               std::span<const SentenceSpans> predicted);
std::vector<SentenceSpans> GoldSpans(const Corpus& corpus);

std::string MetricsToJson(const Metrics& metrics);
Metrics MetricsFromJson(const std::string& json);
// "P 91.20  R 90.10  F1 90.65" style summary, two decimals.
std::string FormatMetrics(const Metrics& metrics);

// Mean and sample standard deviation (0 for a single value).
struct Summary {
  double mean = 0;
  double stddev = 0;
};
Summary Summarize(std::span<const double> values);

}  // namespace ibspan

#endif  // IBSPAN_EVALUATOR_H_
