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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ibspan/encoder.h"
#include "ibspan/error.h"
#include "ibspan/model.h"
#include "ibspan/trainer.h"
#include "oracle/reference.h"
#include "test_util.h"

namespace ibspan {
namespace {

using testing::MakeSentence;
using testing::MiniEncoder;
using testing::ToyCorpus;

struct Fixture {
  explicit Fixture(FeatureMode mode, std::uint64_t seed = 5)
      : train(ToyCorpus()),
        words(testing::RandomEmbeddings({&train}, 8, 11)),
        model(MiniEncoder(mode), HeadKind::kInstance, train.Labels(),
              CharVocab::Build(train), words, seed) {}
  Corpus train;
  EmbeddingTable words;
  SpanModel model;
};

void ExpectRowsNear(const Tensor& actual, const oracle::Mat& expected,
                    double tolerance) {
  ASSERT_EQ(actual.rows(), static_cast<int>(expected.size()));
  for (int r = 0; r < actual.rows(); ++r) {
    ASSERT_EQ(actual.cols(), static_cast<int>(expected[r].size()));
    for (int c = 0; c < actual.cols(); ++c) {
      EXPECT_NEAR(actual(r, c), expected[r][c], tolerance) << r << "," << c;
    }
  }
}

TEST(Encoder, SingleTokenShapes) {
  Fixture f(FeatureMode::kFlat);
  Sentence s = f.model.Prepare(MakeSentence(9, "Kafka"));
  Graph g(false);
  std::mt19937_64 rng(1);
  ContextStates states = f.model.encoder().Encode(g, s, false, 0.3, rng);
  EXPECT_EQ(states.forward.rows(), 1);
  EXPECT_EQ(states.forward.cols(), 8);
  EXPECT_EQ(states.backward.rows(), 1);
  EXPECT_EQ(states.backward.cols(), 8);
}

TEST(Encoder, EvalModeIsDeterministic) {
  Fixture f(FeatureMode::kNested);
  Sentence s = f.model.Prepare(f.train.sentences[0]);
  const std::vector<Span> spans = EnumerateSpans(s, 6);
  EXPECT_EQ(f.model.SpanReprs(s, spans), f.model.SpanReprs(s, spans));
}

TEST(Encoder, TrainModeDropoutChangesOutput) {
  Fixture f(FeatureMode::kFlat);
  Sentence s = f.model.Prepare(f.train.sentences[0]);
  std::mt19937_64 rng(1);
  Graph g(false);
  ContextStates eval = f.model.encoder().Encode(g, s, false, 0.5, rng);
  ContextStates train = f.model.encoder().Encode(g, s, true, 0.5, rng);
  EXPECT_NE(eval.forward.value(), train.forward.value());
}

TEST(Encoder, MatchesLoopReferenceInBothModes) {
  for (FeatureMode mode : {FeatureMode::kFlat, FeatureMode::kNested}) {
    Fixture f(mode);
    oracle::ReferenceEncoder reference(f.model);
    for (const Sentence& raw : f.train.sentences) {
      const std::vector<Span> spans = EnumerateSpans(raw, 6);
      ExpectRowsNear(f.model.SpanReprs(f.model.Prepare(raw), spans),
                     reference.SpanReprs(raw, spans), 1e-12);
    }
    // Unseen word and unseen characters go through unk paths.
    Sentence odd = MakeSentence(99, "Zürich qq");
    ExpectRowsNear(f.model.SpanReprs(f.model.Prepare(odd), EnumerateSpans(odd, 6)),
                   reference.SpanReprs(odd, EnumerateSpans(odd, 6)), 1e-12);
  }
}

TEST(Encoder, ZeroParametersGiveZeroStates) {
  Fixture f(FeatureMode::kFlat);
  for (Parameter* p : f.model.parameters()) p->value.Fill(0.0);
  Sentence s = f.model.Prepare(f.train.sentences[1]);
  Graph g(false);
  std::mt19937_64 rng(1);
  ContextStates states = f.model.encoder().Encode(g, s, false, 0, rng);
  // tanh(0) candidate keeps every cell at zero.
  for (double v : states.forward.value().values()) EXPECT_EQ(v, 0.0);
  for (double v : states.backward.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Encoder, BiasOnlyCellFollowsHandRecurrence) {
  Fixture f(FeatureMode::kFlat);
  for (Parameter* p : f.model.parameters()) p->value.Fill(0.0);
  const int h = 8;
  // Top layer forward direction only: input and recurrent weights zero, so
  // every step sees z = bias.
  Tensor& bias = f.model.encoder().lstm(1, false).bias.value;
  const double bi = 0.3, bf = -0.2, bg = 0.7, bo = 1.1;
  for (int j = 0; j < h; ++j) {
    bias[j] = bi;
    bias[h + j] = bf;
    bias[2 * h + j] = bg;
    bias[3 * h + j] = bo;
  }
  Sentence s = f.model.Prepare(f.train.sentences[0]);
  Graph g(false);
  std::mt19937_64 rng(1);
  ContextStates states = f.model.encoder().Encode(g, s, false, 0, rng);
  auto sigmoid = [](double x) { return 1 / (1 + std::exp(-x)); };
  double c = 0;
  for (int t = 0; t < s.size(); ++t) {
    c = sigmoid(bf) * c + sigmoid(bi) * std::tanh(bg);
    const double expected = sigmoid(bo) * std::tanh(c);
    for (int j = 0; j < h; ++j) {
      EXPECT_NEAR(states.forward.value()(t, j), expected, 1e-15);
    }
  }
}

Tensor Fabricated(int steps, int hidden, double offset) {
  Tensor t = Tensor::Zeros(steps, hidden);
  for (int r = 0; r < steps; ++r) {
    for (int c = 0; c < hidden; ++c) t(r, c) = offset + 10 * (r + 1) + 0.1 * c;
  }
  return t;
}

TEST(SpanFeatures, FullSpanUsesZeroBoundaries) {
  const Tensor fw = Fabricated(4, 3, 0), bw = Fabricated(4, 3, 1000);
  const std::vector<Span> span = {{1, 4}};
  const Tensor row = SpanFeatureRows(fw, bw, span, FeatureMode::kFlat);
  ASSERT_EQ(row.cols(), 6);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(row(0, c), fw(3, c));
    EXPECT_EQ(row(0, 3 + c), bw(0, c));
  }
}

TEST(SpanFeatures, FullSpanIgnoresInteriorStates) {
  Tensor fw = Fabricated(5, 2, 0), bw = Fabricated(5, 2, 50);
  const std::vector<Span> span = {{1, 5}};
  const Tensor before = SpanFeatureRows(fw, bw, span, FeatureMode::kFlat);
  for (int r = 1; r < 4; ++r) {
    for (int c = 0; c < 2; ++c) {
      fw(r, c) += 123.0;
      bw(r, c) -= 77.0;
    }
  }
  EXPECT_EQ(SpanFeatureRows(fw, bw, span, FeatureMode::kFlat), before);
}

TEST(SpanFeatures, SingleWordOnFabricatedStates) {
  const Tensor fw = Fabricated(3, 2, 0), bw = Fabricated(3, 2, 5);
  const std::vector<Span> span = {{2, 2}};
  const Tensor row = SpanFeatureRows(fw, bw, span, FeatureMode::kFlat);
  for (int c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(row(0, c), fw(1, c) - fw(0, c));
    EXPECT_DOUBLE_EQ(row(0, 2 + c), bw(1, c) - bw(2, c));
  }
}

TEST(SpanFeatures, NestedHasFlatPrefixAndSums) {
  const Tensor fw = Fabricated(3, 2, 0), bw = Fabricated(3, 2, 7);
  const std::vector<Span> spans = EnumerateSpans(3, 6);
  const Tensor flat = SpanFeatureRows(fw, bw, spans, FeatureMode::kFlat);
  const Tensor nested = SpanFeatureRows(fw, bw, spans, FeatureMode::kNested);
  ASSERT_EQ(nested.cols(), 8);
  for (int r = 0; r < nested.rows(); ++r) {
    const int a = spans[r].start, b = spans[r].end;
    for (int c = 0; c < 4; ++c) EXPECT_EQ(nested(r, c), flat(r, c));
    for (int c = 0; c < 2; ++c) {
      EXPECT_DOUBLE_EQ(nested(r, 4 + c), fw(a - 1, c) + fw(b - 1, c));
      EXPECT_DOUBLE_EQ(nested(r, 6 + c), bw(a - 1, c) + bw(b - 1, c));
    }
  }
}

TEST(SpanFeatures, DimensionsFollowHiddenSize) {
  EncoderConfig config;
  EXPECT_EQ(config.feature_dim(), 200);
  config.mode = FeatureMode::kNested;
  EXPECT_EQ(config.feature_dim(), 400);
}

TEST(Project, IdentityZeroAndRandom) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  Tensor features = Tensor::Zeros(3, 4);
  for (double& v : features.values()) v = normal(rng);
  Tensor eye = Tensor::Zeros(4, 4);
  for (int i = 0; i < 4; ++i) eye(i, i) = 1;
  EXPECT_EQ(ProjectRows(features, eye), features);
  const Tensor null_map = ProjectRows(features, Tensor::Zeros(5, 4));
  for (double v : null_map.values()) EXPECT_EQ(v, 0.0);
  Tensor w = Tensor::Zeros(5, 4);
  for (double& v : w.values()) v = normal(rng);
  const Tensor out = ProjectRows(features, w);
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 5; ++k) {
      double dot = 0;
      for (int c = 0; c < 4; ++c) dot += w(k, c) * features(r, c);
      EXPECT_NEAR(out(r, k), dot, 1e-14);
    }
  }
  try {
    ProjectRows(features, Tensor::Zeros(5, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Encoder, CharPaddingKeepsOneLetterWordsConvolvable) {
  const std::vector<int> ids = {7};
  EXPECT_EQ(PadCharIds(ids, 3), (std::vector<int>{0, 7, 0}));
  EXPECT_EQ(PadCharIds(ids, 4), (std::vector<int>{0, 7, 0, 0}));
}

TEST(Encoder, WordEmbeddingsStayFrozenWhileCharCnnTrains) {
  const Corpus train = ToyCorpus();
  const EmbeddingTable words = testing::RandomEmbeddings({&train}, 8, 11);
  std::vector<std::vector<double>> before;
  for (const std::string& w : words.words()) {
    auto row = words.Lookup(w);
    before.emplace_back(row.begin(), row.end());
  }
  TrainConfig config;
  config.epochs = 1;
  config.support_sentences = 3;
  config.batch_size = 2;
  config.eta0 = 0.01;
  SpanModel initial(MiniEncoder(), config.head, train.Labels(),
                    CharVocab::Build(train), words, config.seed);
  const Tensor chars_before = initial.encoder().char_embeddings().value;
  TrainResult result = Train(MiniEncoder(), config, train, train, words);
  for (std::size_t i = 0; i < before.size(); ++i) {
    auto row = words.Lookup(words.words()[i]);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), before[i].begin()));
  }
  for (const Parameter* p : result.model.parameters()) {
    EXPECT_EQ(p->name.find("word"), std::string::npos) << p->name;
  }
  // Same seed, so the model starts from `initial`; the char table moved.
  EXPECT_NE(result.model.encoder().char_embeddings().value, chars_before);
}

TEST(EncoderConfig, ValidateNamesBadField) {
  EncoderConfig config;
  config.lstm_hidden = 0;
  try {
    config.Validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_NE(std::string(e.what()).find("lstm_hidden"), std::string::npos);
  }
}

}  // namespace
}  // namespace ibspan
