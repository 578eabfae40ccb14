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

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ibspan/corpus.h"
#include "ibspan/error.h"
#include "oracle/reference.h"
#include "test_util.h"

namespace ibspan {
namespace {

using testing::MakeSentence;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ibspan::Error thrown";
  return ErrorCode::kIoError;
}

Corpus ParseBioText(const std::string& text, TagScheme scheme = TagScheme::kAuto) {
  std::istringstream in(text);
  return ParseBio(in, scheme);
}

TEST(ParseBio, PersonSpanFromTwoTokens) {
  Corpus c = ParseBioText(
      "Franz B-PER\nKafka I-PER\nis O\na O\nnovelist O\n");
  ASSERT_EQ(c.size(), 1);
  EXPECT_EQ(c.sentences[0].size(), 5);
  ASSERT_EQ(c.sentences[0].gold_spans.size(), 1u);
  EXPECT_EQ(c.sentences[0].gold_spans[0], (LabeledSpan{{1, 2}, "PER"}));
}

TEST(ParseBio, EmptyInputGivesEmptyCorpus) {
  EXPECT_EQ(ParseBioText("").size(), 0);
  EXPECT_EQ(ParseBioText("\n\n  \n").size(), 0);
}

TEST(ParseBio, SkipsDocstartAndUsesLastColumn) {
  Corpus c = ParseBioText(
      "-DOCSTART- -X- O O\n\n"
      "EU NNP I-NP B-ORG\nrejects VBZ I-VP O\n\n"
      "Peter NNP I-NP B-PER\n");
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(c.sentences[0].gold_spans,
            (std::vector<LabeledSpan>{{{1, 1}, "ORG"}}));
  EXPECT_EQ(c.sentences[1].tokens, std::vector<std::string>{"Peter"});
  EXPECT_NE(c.sentences[0].id, c.sentences[1].id);
}

TEST(ParseBio, ErrorPaths) {
  EXPECT_EQ(CodeOf([] { ParseBioText("lonely\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseBioText("a X-PER\n"); }), ErrorCode::kInvalidTag);
  EXPECT_EQ(CodeOf([] { ParseBioText("a B-\n"); }), ErrorCode::kInvalidTag);
  EXPECT_EQ(CodeOf([] { ParseBio(std::filesystem::path("/no/such/file"),
                                 TagScheme::kAuto); }),
            ErrorCode::kIoError);
}

TEST(ParseBio, Iob1MatchesConvertedIob2) {
  const std::string iob1 =
      "U.N. I-ORG\nofficial O\nEkeus I-PER\nheads O\nfor O\nBaghdad I-LOC\n"
      "and O\nthe O\nWorld I-ORG\nBank I-ORG\nB B-ORG\n";
  Corpus parsed = ParseBioText(iob1);
  std::vector<std::string> tags;
  std::istringstream in(iob1);
  for (std::string token, tag; in >> token >> tag;) tags.push_back(tag);
  const std::vector<std::string> iob2 = oracle::Iob1ToIob2(tags);
  ASSERT_EQ(parsed.size(), 1);
  EXPECT_EQ(parsed.sentences[0].gold_spans, SpansFromTags(iob2, TagScheme::kIob2));
  EXPECT_EQ(parsed.sentences[0].gold_spans.size(), 5u);
}

TEST(ParseBio, ParsingIsDeterministic) {
  const std::string text = "a B-X\nb I-X\n\nc O\nd I-Y\n";
  EXPECT_EQ(ParseBioText(text), ParseBioText(text));
}

TEST(DetectScheme, InsideAfterOutsideMeansIob1) {
  std::vector<std::vector<std::string>> iob1 = {{"O", "I-PER"}};
  std::vector<std::vector<std::string>> iob2 = {{"B-PER", "I-PER", "O"}};
  EXPECT_EQ(DetectScheme(iob1), TagScheme::kIob1);
  EXPECT_EQ(DetectScheme(iob2), TagScheme::kIob2);
}

TEST(SpansFromTags, Basics) {
  EXPECT_EQ(SpansFromTags(std::vector<std::string>{"B-ORG", "I-ORG", "O"},
                          TagScheme::kIob2),
            (std::vector<LabeledSpan>{{{1, 2}, "ORG"}}));
  EXPECT_TRUE(SpansFromTags(std::vector<std::string>{"O", "O", "O"},
                            TagScheme::kIob2)
                  .empty());
}

TEST(SpansFromTags, StrictIob2RejectsDanglingInside) {
  EXPECT_EQ(CodeOf([] {
              SpansFromTags(std::vector<std::string>{"O", "I-PER"},
                            TagScheme::kIob2);
            }),
            ErrorCode::kInvalidTransition);
}

std::vector<std::string> RandomTags(std::mt19937_64& rng, int n, bool iob2) {
  static const std::vector<std::string> kTypes = {"PER", "LOC", "ORG"};
  std::uniform_int_distribution<int> pick(0, 6);
  std::vector<std::string> tags;
  for (int i = 0; i < n; ++i) {
    const int r = pick(rng);
    if (r == 0) {
      tags.push_back("O");
    } else if (r <= 3) {
      tags.push_back("B-" + kTypes[r - 1]);
    } else {
      std::string type = kTypes[r - 4];
      if (iob2 && (tags.empty() || tags.back() == "O" ||
                   tags.back().substr(2) != type)) {
        tags.push_back("B-" + type);
      } else {
        tags.push_back("I-" + type);
      }
    }
  }
  return tags;
}

TEST(SpansFromTags, MatchesBruteForceOnRandomSequences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<std::string> iob2 = RandomTags(rng, 20, true);
    EXPECT_EQ(SpansFromTags(iob2, TagScheme::kIob2), oracle::BruteForceSegments(iob2));
    const std::vector<std::string> iob1 = RandomTags(rng, 20, false);
    EXPECT_EQ(SpansFromTags(iob1, TagScheme::kIob1), oracle::BruteForceSegments(iob1));
    EXPECT_EQ(SpansFromTags(iob1, TagScheme::kIob1),
              SpansFromTags(oracle::Iob1ToIob2(iob1), TagScheme::kIob2));
  }
}

TEST(SpansFromTags, RenderingRoundTripsRandomFlatSets) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> width(1, 4), gap(0, 3), type(0, 2);
  const std::vector<std::string> types = {"A", "B", "C"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LabeledSpan> spans;
    int cursor = 1 + gap(rng);
    while (cursor <= 25) {
      const int end = std::min(25, cursor + width(rng) - 1);
      spans.push_back({{cursor, end}, types[type(rng)]});
      cursor = end + 1 + gap(rng);
    }
    const std::vector<std::string> tags = TagsFromSpans(25, spans);
    EXPECT_EQ(SpansFromTags(tags, TagScheme::kIob2), spans);
  }
}

TEST(ParseNested, KeepsNestedSpans) {
  std::istringstream in(
      R"({"tokens":["IL-2","gene","expression"],"spans":[[1,3,"DNA"],[2,3,"protein"]]})"
      "\n");
  Corpus c = ParseNested(in);
  ASSERT_EQ(c.size(), 1);
  EXPECT_EQ(c.sentences[0].gold_spans.size(), 2u);
}

TEST(ParseNested, ErrorPaths) {
  EXPECT_EQ(CodeOf([] {
              std::istringstream in(
                  R"({"tokens":["a","b","c","d","e"],"spans":[[4,9,"X"]]})");
              ParseNested(in);
            }),
            ErrorCode::kSpanOutOfRange);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in(
                  R"({"tokens":["a","b"],"spans":[[1,2,"X"],[1,2,"X"]]})");
              ParseNested(in);
            }),
            ErrorCode::kDuplicateSpan);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("not json\n");
              ParseNested(in);
            }),
            ErrorCode::kMalformedLine);
}

TEST(ParseNested, RoundTripsFiftySentences) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> length(1, 12);
  Corpus original;
  for (int i = 0; i < 50; ++i) {
    Sentence s;
    s.id = i;
    const int t = length(rng);
    for (int k = 0; k < t; ++k) s.tokens.push_back("w" + std::to_string(rng() % 30));
    for (const Span& span : EnumerateSpans(t, 4)) {
      if (rng() % 5 == 0) s.gold_spans.push_back({span, rng() % 2 ? "DNA" : "protein"});
    }
    original.sentences.push_back(s);
  }
  std::stringstream buffer;
  WriteNested(buffer, original);
  EXPECT_EQ(ParseNested(buffer), original);
}

TEST(EnumerateSpans, FifteenSpansForFiveTokens) {
  const std::vector<Span> spans = EnumerateSpans(5, 6);
  ASSERT_EQ(spans.size(), 15u);
  EXPECT_EQ(spans.front(), (Span{1, 1}));
  EXPECT_EQ(spans[1], (Span{1, 2}));
  EXPECT_EQ(spans[2], (Span{1, 3}));
  EXPECT_EQ(spans[13], (Span{4, 5}));
  EXPECT_EQ(spans.back(), (Span{5, 5}));
}

TEST(EnumerateSpans, WidthCapped) {
  EXPECT_EQ(EnumerateSpans(3, 2),
            (std::vector<Span>{{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 3}}));
}

TEST(EnumerateSpans, CountMatchesBruteForceAndClosedForm) {
  for (int t = 1; t <= 32; ++t) {
    for (int l = 1; l <= 32; ++l) {
      std::vector<Span> brute;
      for (int a = 1; a <= t; ++a) {
        for (int b = a; b <= t; ++b) {
          if (b - a < l) brute.push_back({a, b});
        }
      }
      ASSERT_EQ(EnumerateSpans(t, l), brute) << t << " " << l;
      EXPECT_EQ(CountSpans(t, l), static_cast<std::int64_t>(brute.size()));
      if (t >= l) EXPECT_EQ(CountSpans(t, l), t * l - l * (l - 1) / 2);
    }
  }
}

TEST(LabelSet, NullFirstAndDense) {
  LabelSet labels({"PER", "LOC", "ORG", "LOC"});
  EXPECT_EQ(labels.name(LabelSet::kNullId), LabelSet::kNull);
  EXPECT_EQ(labels.size(), 4);
  EXPECT_EQ(labels.IdOrNull("unknown"), LabelSet::kNullId);
  EXPECT_FALSE(labels.Find("unknown").has_value());
  for (int id = 0; id < labels.size(); ++id) EXPECT_EQ(labels.Find(labels.name(id)), id);
}

TEST(CharVocab, UnseenCharactersMapToUnk) {
  Corpus train = testing::MakeCorpus({MakeSentence(0, "ab")});
  CharVocab vocab = CharVocab::Build(train);
  const std::vector<int> ids = vocab.Encode("abz");
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_GT(ids[0], CharVocab::kUnk);
  EXPECT_EQ(ids[2], CharVocab::kUnk);
  // Multi-byte characters count once.
  EXPECT_EQ(vocab.Encode("\xC3\xA9t\xC3\xA9").size(), 3u);
}

}  // namespace
}  // namespace ibspan
