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


// Acceptance suite. Each criterion prints one "criterion N: PASS|FAIL"
// line with the measured values. With no arguments every criterion runs;
// otherwise only the listed numbers. Exit status is 0 iff all passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.h"
#include "ibspan/error.h"
#include "ibspan/evaluator.h"
#include "ibspan/experiments.h"
#include "ibspan/heads.h"
#include "ibspan/inference.h"
#include "ibspan/model.h"
#include "ibspan/optim.h"
#include "ibspan/synthetic.h"
#include "ibspan/trainer.h"
#include "oracle/finite_diff.h"
#include "oracle/reference.h"
#include "test_util.h"

namespace ibspan {
namespace {

// Pinned tolerances and thresholds.
constexpr double kGradEps = 1e-5;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradDenominatorFloor = 1e-5;
constexpr double kGradSeconds = 120;
constexpr double kSumTolerance = 1e-9;
constexpr double kShiftTolerance = 1e-12;
constexpr double kOracleTolerance = 1e-9;
constexpr double kMinTestF1 = 90.0;
constexpr double kMaxHeadGap = 3.0;
constexpr double kParitySeconds = 15 * 60;
constexpr double kMinNestedRecovery = 0.90;
constexpr double kMinAblationDrop = 2.0;
constexpr double kAblationBand = 2.0;
constexpr double kTopNeighborThreshold = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Fixed(double v, int digits = 2) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

std::string Sci(double v) {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(2);
  out << v;
  return out.str();
}

// Configuration shared by the synthetic-corpus criteria: reduced
// dimensions so three seeds of both heads finish on one CPU.
EncoderConfig SyntheticEncoder(FeatureMode mode) {
  EncoderConfig c;
  c.word_dim = 50;
  c.lstm_hidden = 50;
  c.span_dim = 64;
  c.mode = mode;
  return c;
}

TrainConfig SyntheticTraining(HeadKind head, Decoding decoding) {
  TrainConfig c;
  c.head = head;
  c.decoding = decoding;
  c.support_sentences = 20;
  c.batch_size = 8;
  c.epochs = 25;
  c.eta0 = 0.01;
  c.dropout = 0.3;
  c.seed = 1;
  return c;
}

SyntheticDataset SyntheticData(bool nested) {
  SyntheticOptions options;
  options.nested = nested;
  return GenerateSynthetic(options);
}

// ---------------------------------------------------------------------------

Outcome GradientCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  const Corpus train = testing::ToyCorpus();
  const EmbeddingTable words = testing::RandomEmbeddings({&train}, 8, 11);
  double worst = 0;
  long checked = 0;
  std::string where;
  for (HeadKind head : {HeadKind::kClassifier, HeadKind::kInstance}) {
    for (FeatureMode mode : {FeatureMode::kFlat, FeatureMode::kNested}) {
      SpanModel model(testing::MiniEncoder(mode), head, train.Labels(),
                      CharVocab::Build(train), words, 5);
      const Corpus prepared = model.Prepare(train);
      TrainConfig config;
      config.head = head;
      config.dropout = 0;
      const std::vector<int> batch = {0, 1};
      const std::vector<int> support_ids = {2, 3, 4};  // K = 3
      const SupportSet support =
          SupportFromSentences(prepared, support_ids,
                               model.config().max_span_width, model.labels());
      auto loss = [&](bool backward) {
        std::mt19937_64 rng(3);
        Graph graph(backward);
        Var l = BatchLoss(graph, model, prepared, batch, support, config, rng);
        if (backward) graph.Backward(l);
        return l.value()[0];
      };
      std::vector<Parameter*> params = model.parameters();
      ZeroGrads(params);
      loss(true);
      const oracle::GradCheck check = oracle::CompareWithFiniteDifferences(
          params, [&] { return loss(false); }, kGradEps, kGradDenominatorFloor);
      checked += check.checked;
      if (check.max_relative_error >= worst) {
        worst = check.max_relative_error;
        where = std::string(HeadName(head)) + "/" +
                std::string(FeatureModeName(mode)) + " " + check.worst;
      }
    }
  }
  const double seconds = Seconds(start);
  return {worst < kGradTolerance && checked > 0 && seconds < kGradSeconds,
          "max rel err " + Sci(worst) + " at " + where + " over " +
              std::to_string(checked) + " elements, " + Fixed(seconds, 1) +
              " s"};
}

Outcome ProbabilityInvariants() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 16), rows(1, 40), labels(2, 6);
  std::uniform_real_distribution<double> scale(0.01, 10.0), shift(-100, 100);
  double worst_sum = 0, worst_shift = 0;
  bool in_range = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng), n = rows(rng), num_labels = labels(rng);
    std::normal_distribution<double> normal(0.0, scale(rng));
    std::vector<double> query(d);
    for (double& x : query) x = normal(rng);
    Tensor support = Tensor::Zeros(n, d);
    for (double& x : support.values()) x = normal(rng);
    std::vector<LabelId> support_labels(n);
    for (LabelId& y : support_labels) {
      y = static_cast<LabelId>(rng() % num_labels);
    }
    const std::vector<double> probs = NeighborProbs(query, support);
    const LabelDistribution marginal =
        MarginalLabelProbs(probs, support_labels, num_labels);
    double sum_probs = 0, sum_marginal = 0;
    for (double p : probs) {
      sum_probs += p;
      in_range = in_range && p >= 0 && p <= 1;
    }
    for (double p : marginal) sum_marginal += p;
    worst_sum = std::max({worst_sum, std::abs(sum_probs - 1),
                          std::abs(sum_marginal - 1)});

    const std::vector<double> scores = NeighborScores(query, support);
    std::vector<double> shifted = scores;
    const double c = shift(rng);
    for (double& s : shifted) s += c;
    const std::vector<double> a = SoftmaxOf(scores), b = SoftmaxOf(shifted);
    for (int j = 0; j < n; ++j) {
      worst_shift = std::max(worst_shift, std::abs(a[j] - b[j]));
    }
  }
  return {worst_sum <= kSumTolerance && worst_shift <= kShiftTolerance &&
              in_range,
          "1000 cases, max |sum - 1| " + Sci(worst_sum) +
              ", max shift deviation " + Sci(worst_shift)};
}

Outcome BruteForceEquivalence() {
  const Corpus train = testing::ToyCorpus();
  const EmbeddingTable words = testing::RandomEmbeddings({&train}, 8, 11);
  double worst = 0;
  long compared = 0;
  bool labels_agree = true;
  for (FeatureMode mode : {FeatureMode::kFlat, FeatureMode::kNested}) {
    TrainConfig config;
    config.head = HeadKind::kInstance;
    config.support_sentences = 3;
    config.batch_size = 2;
    config.epochs = 5;
    config.eta0 = 0.01;
    config.decoding = mode == FeatureMode::kNested ? Decoding::kNested
                                                   : Decoding::kFlat;
    TrainResult trained =
        Train(testing::MiniEncoder(mode), config, train, train, words);
    Predictor predictor(trained.model, train, 3);
    for (const Sentence& query : train.sentences) {
      const SupportSet support = predictor.SupportFor(query);
      std::vector<const Sentence*> sources;
      for (int id : support.sentence_ids) sources.push_back(train.FindById(id));
      const std::vector<oracle::Vec> expected =
          oracle::MonolithicInstanceDistributions(trained.model, query, sources);
      const std::vector<Prediction> actual = predictor.PredictSentence(query);
      if (actual.size() != expected.size()) {
        return {false, "span count mismatch in sentence " +
                           std::to_string(query.id)};
      }
      for (std::size_t i = 0; i < actual.size(); ++i) {
        for (std::size_t y = 0; y < expected[i].size(); ++y) {
          worst = std::max(worst,
                           std::abs(actual[i].distribution[y] - expected[i][y]));
          ++compared;
        }
        labels_agree = labels_agree &&
                       actual[i].label == PredictLabel(actual[i].distribution);
      }
    }
  }
  return {worst <= kOracleTolerance && labels_agree && compared > 0,
          "max |diff| " + Sci(worst) + " over " + std::to_string(compared) +
              " probabilities (flat and nested features)"};
}

Corpus SmallVocabularyCorpus(int n, int first_id, std::mt19937_64& rng) {
  // A tiny vocabulary makes repeated sentences, and hence exact cosine
  // ties, frequent.
  static const std::vector<std::string> kVocab = {
      "a", "b", "c", "d", "e", "f", "g", "h", "Oslo", "Kafka", "ran", "sat"};
  std::vector<Sentence> sentences;
  for (int i = 0; i < n; ++i) {
    std::string text;
    const int length = 1 + static_cast<int>(rng() % 4);
    for (int t = 0; t < length; ++t) text += kVocab[rng() % kVocab.size()] + " ";
    sentences.push_back(testing::MakeSentence(first_id + i, text));
  }
  return testing::MakeCorpus(sentences);
}

Outcome KnnExactness() {
  std::mt19937_64 rng(4);
  const Corpus train = SmallVocabularyCorpus(200, 0, rng);
  const Corpus fresh = SmallVocabularyCorpus(20, 1000, rng);
  const EmbeddingTable words = testing::RandomEmbeddings({&train, &fresh}, 10, 5);
  Corpus shuffled = train;
  std::shuffle(shuffled.sentences.begin(), shuffled.sentences.end(), rng);

  std::vector<const Sentence*> queries;
  for (const Sentence& s : train.sentences) queries.push_back(&s);
  for (const Sentence& s : fresh.sentences) queries.push_back(&s);
  long mismatches = 0, rankings = 0, ties = 0;
  for (int k : {1, 5, 50}) {
    for (const Sentence* q : queries) {
      const std::vector<int> expected = oracle::ExhaustiveKnn(*q, train, k, words);
      if (RetrieveSupportKnn(*q, train, k, words) != expected) ++mismatches;
      if (RetrieveSupportKnn(*q, shuffled, k, words) != expected) ++mismatches;
      rankings += 2;
      const std::vector<double> qv = SentenceVector(*q, words);
      for (std::size_t i = 1; i < expected.size(); ++i) {
        const double a = Cosine(qv, SentenceVector(*train.FindById(expected[i - 1]), words));
        const double b = Cosine(qv, SentenceVector(*train.FindById(expected[i]), words));
        if (a == b) ++ties;
      }
    }
  }
  return {mismatches == 0 && ties > 0,
          std::to_string(rankings) + " rankings for K in {1,5,50}, " +
              std::to_string(mismatches) + " mismatches, " +
              std::to_string(ties) + " tied adjacent pairs"};
}

Outcome SyntheticParity() {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticDataset data = SyntheticData(false);
  const std::vector<HeadComparison> rows = CompareHeads(
      SyntheticEncoder(FeatureMode::kFlat),
      SyntheticTraining(HeadKind::kInstance, Decoding::kFlat), data.train,
      data.dev, data.test, data.embeddings, 3);
  const double seconds = Seconds(start);
  double classifier = 0, instance = 0;
  for (const HeadComparison& row : rows) {
    (row.head == HeadKind::kInstance ? instance : classifier) = row.f1.mean;
  }
  const double gap = std::abs(instance - classifier);
  return {classifier >= kMinTestF1 && instance >= kMinTestF1 &&
              gap <= kMaxHeadGap && seconds < kParitySeconds,
          "test F1 over 3 seeds: classifier " + Fixed(classifier) +
              ", instance " + Fixed(instance) + ", |diff| " + Fixed(gap) +
              ", " + Fixed(seconds, 0) + " s"};
}

Outcome NestedRecovery() {
  const SyntheticDataset data = SyntheticData(true);
  TrainConfig config = SyntheticTraining(HeadKind::kInstance, Decoding::kNested);
  TrainResult trained = Train(SyntheticEncoder(FeatureMode::kNested), config,
                              data.train, data.dev, data.embeddings);
  Predictor predictor(trained.model, trained.train, config.support_sentences);
  const std::vector<SentenceSpans> predicted =
      predictor.PredictCorpus(data.test, Decoding::kNested);
  long pairs = 0, recovered = 0;
  for (std::size_t i = 0; i < data.test.sentences.size(); ++i) {
    const std::vector<LabeledSpan>& gold = data.test.sentences[i].gold_spans;
    const std::vector<LabeledSpan>& found = predicted[i].spans;
    auto hit = [&](const LabeledSpan& g) {
      return std::find(found.begin(), found.end(), g) != found.end();
    };
    for (const LabeledSpan& outer : gold) {
      for (const LabeledSpan& inner : gold) {
        const bool strictly_contains =
            outer.span.start <= inner.span.start &&
            inner.span.end <= outer.span.end && !(outer.span == inner.span);
        if (!strictly_contains) continue;
        ++pairs;
        if (hit(outer) && hit(inner)) ++recovered;
      }
    }
  }
  const double rate = pairs ? static_cast<double>(recovered) / pairs : 0;
  return {pairs > 0 && rate >= kMinNestedRecovery,
          std::to_string(recovered) + "/" + std::to_string(pairs) +
              " nested test pairs recovered (" + Fixed(100 * rate) +
              "%), instance head"};
}

Outcome AblationTrend() {
  const SyntheticDataset data = SyntheticData(false);
  const std::vector<double> fractions = {1.0, 0.5, 0.25, 0.125};
  const std::vector<AblationRow> rows = SizeAblation(
      SyntheticEncoder(FeatureMode::kFlat),
      SyntheticTraining(HeadKind::kInstance, Decoding::kFlat), data.train,
      data.dev, data.embeddings, fractions);
  bool pass = true;
  std::string detail;
  for (HeadKind head : {HeadKind::kClassifier, HeadKind::kInstance}) {
    std::vector<double> curve;
    for (const AblationRow& row : rows) {
      if (row.head == head) curve.push_back(row.dev.f1);
    }
    if (curve.size() != fractions.size()) return {false, "missing ablation rows"};
    pass = pass && curve.front() - curve.back() >= kMinAblationDrop;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      pass = pass && curve[i] <= curve[i - 1] + kAblationBand;
    }
    detail += std::string(detail.empty() ? "" : "; ") +
              std::string(HeadName(head)) + " dev F1";
    for (double f1 : curve) detail += " " + Fixed(f1);
  }
  return {pass, detail + " at fractions 1, 1/2, 1/4, 1/8"};
}

Outcome ExplanationCoherence() {
  const SyntheticDataset data = SyntheticData(false);
  const TrainConfig config =
      SyntheticTraining(HeadKind::kInstance, Decoding::kFlat);
  TrainResult trained = Train(SyntheticEncoder(FeatureMode::kFlat), config,
                              data.train, data.dev, data.embeddings);
  Predictor predictor(trained.model, trained.train, config.support_sentences);
  const int width = trained.model.config().max_span_width;
  const int num_labels = trained.model.labels().size();

  // Half the queries are gold entity spans and half are uniform over all
  // enumerated spans, so confident entity predictions get exercised too.
  std::mt19937_64 rng(8);
  double worst = 0;
  int confident = 0, agreeing = 0, entity_queries = 0;
  for (int q = 0; q < 100; ++q) {
    const Sentence& sentence =
        data.test.sentences[rng() % data.test.sentences.size()];
    const std::vector<Span> spans = EnumerateSpans(sentence, width);
    Span span = spans[rng() % spans.size()];
    if (q % 2 == 0 && !sentence.gold_spans.empty()) {
      span = sentence.gold_spans[rng() % sentence.gold_spans.size()].span;
    }
    const std::vector<Prediction> predictions =
        predictor.PredictSentence(sentence);
    const auto p = std::find_if(
        predictions.begin(), predictions.end(),
        [&](const Prediction& x) { return x.span == span; });
    if (p == predictions.end()) return {false, "query span not enumerated"};
    const Explanation e =
        predictor.Explain(sentence, span, std::numeric_limits<int>::max());
    if (static_cast<int>(e.neighbors.size()) != e.support_size) {
      return {false, "explanation omits part of the support"};
    }
    LabelDistribution grouped(num_labels, 0.0);
    for (const Neighbor& n : e.neighbors) grouped[n.source.label] += n.probability;
    for (int y = 0; y < num_labels; ++y) {
      worst = std::max(worst, std::abs(grouped[y] - p->distribution[y]));
    }
    if (p->label != LabelSet::kNullId) ++entity_queries;
    if (p->probability() > kTopNeighborThreshold) {
      ++confident;
      if (e.neighbors.front().source.label == p->label) ++agreeing;
    }
  }
  return {worst <= kOracleTolerance && agreeing == confident,
          "100 queries (" + std::to_string(entity_queries) +
              " predicted entities), max |grouped - predicted| " + Sci(worst) +
              ", top-1 agrees in " + std::to_string(agreeing) + "/" +
              std::to_string(confident) + " confident predictions"};
}

Outcome EvaluatorOracle() {
  std::mt19937_64 rng(9);
  int mismatches = 0;
  long gold_spans = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const testing::SpanCorpora c =
        testing::RandomSpanCorpora(rng, 1 + static_cast<int>(rng() % 30));
    for (const SentenceSpans& s : c.gold) gold_spans += s.spans.size();
    if (!(SpanF1(c.gold, c.predicted) ==
          oracle::SetArithmeticF1(c.gold, c.predicted))) {
      ++mismatches;
    }
  }
  return {mismatches == 0, "100 random corpora (" + std::to_string(gold_spans) +
                               " gold spans), " + std::to_string(mismatches) +
                               " disagreements"};
}

std::string ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome Determinism() {
  testing::TempDir dir("acceptance_determinism");
  cli::SyntheticCommandOptions synthetic;
  synthetic.output_dir = dir.path();
  synthetic.train = 40;
  synthetic.dev = 10;
  synthetic.test = 10;
  synthetic.word_dim = 16;
  std::ostringstream quiet;
  cli::RunGenSynthetic(synthetic, quiet);

  bool pass = true;
  std::string detail;
  for (const char* head : {"classifier", "instance"}) {
    const cli::ConfigSource source{
        dir.path() / "config.ini",
        {std::string("train.head=") + head, "encoder.word_dim=16",
         "encoder.char_dim=8", "encoder.char_filters=8",
         "encoder.lstm_hidden=16", "encoder.span_dim=16", "train.epochs=3",
         "train.support_sentences=5", "train.eta0=0.01", "train.seed=11"}};
    const std::filesystem::path run = dir.path() / "run";
    std::string checkpoint[2], report[2];
    for (int i = 0; i < 2; ++i) {
      std::filesystem::remove_all(run);
      cli::RunTrain(source, quiet);
      checkpoint[i] = ReadBytes(run / "model.ckpt");
      report[i] = ReadBytes(run / "report.jsonl");
    }
    const bool same = !checkpoint[0].empty() && !report[0].empty() &&
                      checkpoint[0] == checkpoint[1] && report[0] == report[1];
    pass = pass && same;
    detail += std::string(detail.empty() ? "" : "; ") + head + " " +
              (same ? "identical" : "different") + " (" +
              std::to_string(checkpoint[0].size()) + " checkpoint bytes, " +
              std::to_string(report[0].size()) + " report bytes)";
  }
  return {pass, detail};
}

struct Criterion {
  int number;
  const char* name;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "gradient correctness", GradientCorrectness},
    {2, "probability invariants", ProbabilityInvariants},
    {3, "brute-force equivalence", BruteForceEquivalence},
    {4, "kNN retrieval exactness", KnnExactness},
    {5, "synthetic parity", SyntheticParity},
    {6, "synthetic nested recovery", NestedRecovery},
    {7, "ablation trend", AblationTrend},
    {8, "explanation coherence", ExplanationCoherence},
    {9, "evaluator oracle", EvaluatorOracle},
    {10, "determinism", Determinism},
};

}  // namespace
}  // namespace ibspan

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    try {
      selected.insert(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: acceptance_test [criterion number...]\n";
      return 1;
    }
  }
  int failures = 0;
  for (const ibspan::Criterion& c : ibspan::kCriteria) {
    if (!selected.empty() && !selected.contains(c.number)) continue;
    ibspan::Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << c.number << ": "
              << (outcome.pass ? "PASS" : "FAIL") << " " << c.name << ": "
              << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
