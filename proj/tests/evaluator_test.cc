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

#include <random>

#include <gtest/gtest.h>

#include "ibspan/error.h"
#include "ibspan/evaluator.h"
#include "oracle/reference.h"
#include "test_util.h"

namespace ibspan {
namespace {

std::vector<SentenceSpans> One(std::vector<LabeledSpan> spans, int id = 0) {
  return {{id, std::move(spans)}};
}

TEST(SpanF1, PerfectPrediction) {
  const auto gold = One({{{1, 2}, "PER"}, {{4, 4}, "LOC"}});
  const Metrics m = SpanF1(gold, gold);
  EXPECT_EQ(m.precision, 100);
  EXPECT_EQ(m.recall, 100);
  EXPECT_EQ(m.f1, 100);
}

TEST(SpanF1, OneCorrectOneSpurious) {
  const auto gold = One({{{1, 2}, "PER"}, {{4, 4}, "LOC"}});
  const auto pred = One({{{1, 2}, "PER"}, {{5, 5}, "LOC"}});
  const Metrics m = SpanF1(gold, pred);
  EXPECT_EQ(m.precision, 50);
  EXPECT_EQ(m.recall, 50);
  EXPECT_EQ(m.f1, 50);
  EXPECT_EQ(m.true_positives, 1);
}

TEST(SpanF1, LabelMustMatchExactly) {
  const Metrics m = SpanF1(One({{{1, 2}, "PER"}}), One({{{1, 2}, "ORG"}}));
  EXPECT_EQ(m.f1, 0);
  EXPECT_EQ(m.false_positives, 1);
  EXPECT_EQ(m.false_negatives, 1);
}

TEST(SpanF1, AsymmetricDenominators) {
  // 1 of 4 predictions right, 1 of 2 gold spans found.
  const auto gold = One({{{1, 1}, "A"}, {{2, 2}, "A"}});
  const auto pred = One({{{1, 1}, "A"}, {{3, 3}, "A"}, {{4, 4}, "A"}, {{5, 5}, "A"}});
  const Metrics m = SpanF1(gold, pred);
  EXPECT_DOUBLE_EQ(m.precision, 25);
  EXPECT_DOUBLE_EQ(m.recall, 50);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 25.0 * 50 / 75);
}

TEST(SpanF1, EmptySidesGiveZeroNotNan) {
  const Metrics m = SpanF1(One({}), One({}));
  EXPECT_EQ(m.f1, 0);
  EXPECT_EQ(SpanF1(One({{{1, 1}, "A"}}), One({})).f1, 0);
}

TEST(SpanF1, MisalignedSentenceIdsThrow) {
  try {
    SpanF1(One({}, 0), One({}, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMisalignedCorpora);
  }
  std::vector<SentenceSpans> twice = {{0, {}}, {0, {}}};
  EXPECT_THROW(SpanF1(twice, twice), Error);
  EXPECT_THROW(SpanF1(One({}), std::vector<SentenceSpans>{}), Error);
}

TEST(SpanF1, MatchesSetArithmeticExactly) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const testing::SpanCorpora c = testing::RandomSpanCorpora(rng, 1 + trial % 20);
    EXPECT_EQ(SpanF1(c.gold, c.predicted), oracle::SetArithmeticF1(c.gold, c.predicted));
  }
}

TEST(SpanF1, InvariantToSentenceAndSpanOrder) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    testing::SpanCorpora c = testing::RandomSpanCorpora(rng, 10);
    const Metrics before = SpanF1(c.gold, c.predicted);
    std::shuffle(c.gold.begin(), c.gold.end(), rng);
    std::shuffle(c.predicted.begin(), c.predicted.end(), rng);
    for (auto& s : c.predicted) std::shuffle(s.spans.begin(), s.spans.end(), rng);
    EXPECT_EQ(SpanF1(c.gold, c.predicted), before);
  }
}

TEST(Metrics, JsonRoundTripIsExact) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    testing::SpanCorpora c = testing::RandomSpanCorpora(rng, 7);
    const Metrics m = SpanF1(c.gold, c.predicted);
    EXPECT_EQ(MetricsFromJson(MetricsToJson(m)), m);
  }
}

TEST(Metrics, TextUsesTwoDecimals) {
  const Metrics m = MetricsFromCounts(2, 1, 0);
  EXPECT_EQ(FormatMetrics(m), "P  66.67  R 100.00  F1  80.00  (tp 2, fp 1, fn 0)");
}

TEST(Summarize, SampleStddevAndSingleRun) {
  const std::vector<double> one = {90.5};
  EXPECT_EQ(Summarize(one).mean, 90.5);
  EXPECT_EQ(Summarize(one).stddev, 0);
  const std::vector<double> three = {1, 2, 3};
  EXPECT_DOUBLE_EQ(Summarize(three).mean, 2);
  EXPECT_DOUBLE_EQ(Summarize(three).stddev, 1);
}

TEST(GoldSpans, CopiesCorpusSpans) {
  const Corpus c = testing::ToyCorpus();
  const auto gold = GoldSpans(c);
  ASSERT_EQ(gold.size(), 5u);
  EXPECT_EQ(gold[2].spans, c.sentences[2].gold_spans);
}

}  // namespace
}  // namespace ibspan
