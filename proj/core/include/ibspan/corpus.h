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

#ifndef IBSPAN_CORPUS_H_
#define IBSPAN_CORPUS_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ibspan {

// A contiguous run of words, 1-based and inclusive on both ends.
struct Span {
  int start = 1;
  int end = 1;

  int width() const { return end - start + 1; }
  bool Contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  bool Overlaps(const Span& other) const {
    return start <= other.end && other.start <= end;
  }

  friend auto operator<=>(const Span&, const Span&) = default;
};

struct LabeledSpan {
  Span span;
  std::string label;

  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
};

using LabelId = int;

// Dense label ids with NULL pinned at id 0; remaining labels are sorted by
// name so that two label sets built from the same corpus agree.
class LabelSet {
 public:
  static constexpr std::string_view kNull = "NULL";
  static constexpr LabelId kNullId = 0;

  LabelSet();
  explicit LabelSet(std::vector<std::string> names);

  LabelId null_id() const { return kNullId; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& name(LabelId id) const { return labels_.at(id); }
  const std::vector<std::string>& names() const { return labels_; }

  // Unknown names map to nullopt.
  std::optional<LabelId> Find(std::string_view name) const;
  // Unknown names map to NULL.
  LabelId IdOrNull(std::string_view name) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

struct Sentence {
  int id = 0;
  std::vector<std::string> tokens;
  // Per-token character ids; filled by CharVocab::Index.
  std::vector<std::vector<int>> char_ids;
  std::vector<LabeledSpan> gold_spans;

  int size() const { return static_cast<int>(tokens.size()); }
  // Gold label for `span`, or NULL when the span is not an entity.
  std::string_view LabelOf(const Span& span) const;
  std::string Text(const Span& span) const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class Split { kTrain, kDev, kTest };

struct Corpus {
  std::vector<Sentence> sentences;
  Split split = Split::kTrain;

  int size() const { return static_cast<int>(sentences.size()); }
  const Sentence* FindById(int id) const;
  LabelSet Labels() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Character vocabulary built from a training split. Id 0 pads convolution
// windows and id 1 stands for characters never seen in training.
class CharVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  CharVocab() = default;
  static CharVocab Build(const Corpus& train);
  static CharVocab FromCodepoints(std::vector<char32_t> codepoints);

  int size() const { return static_cast<int>(codepoints_.size()) + 2; }
  int Id(char32_t codepoint) const;
  std::vector<int> Encode(std::string_view token) const;
  // Fills char_ids for every sentence.
  void Index(Corpus& corpus) const;
  void Index(Sentence& sentence) const;
  const std::vector<char32_t>& codepoints() const { return codepoints_; }

 private:
  std::vector<char32_t> codepoints_;
  std::unordered_map<char32_t, int> ids_;
};

// Decodes UTF-8; invalid bytes decode to U+FFFD.
std::vector<char32_t> DecodeUtf8(std::string_view text);

enum class TagScheme { kIob1, kIob2, kAuto };

// Chooses IOB1 when some I-X tag opens an entity (after O, a sentence start
// or a different type); IOB2 otherwise.
TagScheme DetectScheme(std::span<const std::vector<std::string>> tag_sequences);

// Converts a tag sequence into spans sorted by (start, end). Under kIob2 an
// I-X that does not continue an X entity is an InvalidTransition; kIob1
// treats it as the first token of a new entity. kAuto detects per sequence.
std::vector<LabeledSpan> SpansFromTags(std::span<const std::string> tags,
                                       TagScheme scheme);

// Renders non-overlapping spans as IOB2 tags.
std::vector<std::string> TagsFromSpans(int length,
                                       std::span<const LabeledSpan> spans);

// CoNLL-style column file: token first, tag last, blank lines between
// sentences, -DOCSTART- lines ignored.
Corpus ParseBio(std::istream& in, TagScheme scheme, Split split = Split::kTrain);
Corpus ParseBio(const std::filesystem::path& path, TagScheme scheme,
                Split split = Split::kTrain);
void WriteBio(std::ostream& out, const Corpus& corpus);

// One JSON object per line:
//   {"tokens": ["IL-2", "gene"], "spans": [[1, 2, "DNA"], [1, 1, "protein"]]}
// Span indices are 1-based and inclusive.
Corpus ParseNested(std::istream& in, Split split = Split::kTrain);
Corpus ParseNested(const std::filesystem::path& path,
                   Split split = Split::kTrain);
void WriteNested(std::ostream& out, const Corpus& corpus);
void WriteNested(const std::filesystem::path& path, const Corpus& corpus);

// All spans with width <= max_width in lexicographic (start, end) order.
std::vector<Span> EnumerateSpans(int length, int max_width);
inline std::vector<Span> EnumerateSpans(const Sentence& sentence,
                                        int max_width) {
  return EnumerateSpans(sentence.size(), max_width);
}
// Closed form of EnumerateSpans(length, max_width).size().
std::int64_t CountSpans(int length, int max_width);

std::string_view SplitName(Split split);

}  // namespace ibspan

#endif  // IBSPAN_CORPUS_H_
