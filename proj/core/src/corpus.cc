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

#include "ibspan/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ibspan/error.h"
#include "json.hpp"

namespace ibspan {
namespace {

struct ParsedTag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string type;
};

ParsedTag ParseTag(const std::string& tag) {
  if (tag == "O") return {};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], tag.substr(2)};
  }
  throw Error(ErrorCode::kInvalidTag, "tag '" + tag + "'");
}

// True when an I-X tag at `i` opens an entity instead of continuing one.
bool OpensWithInside(const std::vector<ParsedTag>& parsed, size_t i) {
  if (parsed[i].prefix != 'I') return false;
  if (i == 0) return true;
  const ParsedTag& prev = parsed[i - 1];
  return prev.prefix == 'O' || prev.type != parsed[i].type;
}

std::vector<ParsedTag> ParseTags(std::span<const std::string> tags) {
  std::vector<ParsedTag> parsed;
  parsed.reserve(tags.size());
  for (const std::string& tag : tags) parsed.push_back(ParseTag(tag));
  return parsed;
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

bool IsBlank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

void ValidateGold(const Sentence& sentence, int line_number) {
  std::map<Span, std::string> seen;
  for (const LabeledSpan& gold : sentence.gold_spans) {
    if (gold.span.start < 1 || gold.span.end > sentence.size() ||
        gold.span.start > gold.span.end) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  "line " + std::to_string(line_number) + ": span (" +
                      std::to_string(gold.span.start) + "," +
                      std::to_string(gold.span.end) + ") on a " +
                      std::to_string(sentence.size()) + "-token sentence");
    }
    auto [it, inserted] = seen.emplace(gold.span, gold.label);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateSpan,
                  "line " + std::to_string(line_number) + ": span (" +
                      std::to_string(gold.span.start) + "," +
                      std::to_string(gold.span.end) + ") labeled '" +
                      it->second + "' and '" + gold.label + "'");
    }
  }
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

}  // namespace

LabelSet::LabelSet() : labels_{std::string(kNull)} {}

LabelSet::LabelSet(std::vector<std::string> names) : LabelSet() {
  std::erase(names, std::string(kNull));
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  labels_.insert(labels_.end(), names.begin(), names.end());
}

std::optional<LabelId> LabelSet::Find(std::string_view name) const {
  auto it = std::find(labels_.begin(), labels_.end(), name);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<LabelId>(it - labels_.begin());
}

LabelId LabelSet::IdOrNull(std::string_view name) const {
  return Find(name).value_or(kNullId);
}

std::string_view Sentence::LabelOf(const Span& span) const {
  for (const LabeledSpan& gold : gold_spans) {
    if (gold.span == span) return gold.label;
  }
  return LabelSet::kNull;
}

std::string Sentence::Text(const Span& span) const {
  std::string text;
  for (int i = span.start; i <= span.end; ++i) {
    if (i > span.start) text += ' ';
    text += tokens.at(i - 1);
  }
  return text;
}

const Sentence* Corpus::FindById(int id) const {
  for (const Sentence& sentence : sentences) {
    if (sentence.id == id) return &sentence;
  }
  return nullptr;
}

LabelSet Corpus::Labels() const {
  std::vector<std::string> names;
  for (const Sentence& sentence : sentences) {
    for (const LabeledSpan& gold : sentence.gold_spans) {
      names.push_back(gold.label);
    }
  }
  return LabelSet(std::move(names));
}

std::vector<char32_t> DecodeUtf8(std::string_view text) {
  std::vector<char32_t> out;
  size_t i = 0;
  while (i < text.size()) {
    unsigned char lead = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + extra >= text.size()) {
      out.push_back(0xFFFD);
      break;
    }
    bool valid = true;
    for (int k = 1; k <= extra; ++k) {
      unsigned char next = static_cast<unsigned char>(text[i + k]);
      if ((next & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (next & 0x3F);
    }
    if (!valid) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

CharVocab CharVocab::Build(const Corpus& train) {
  std::set<char32_t> seen;
  for (const Sentence& sentence : train.sentences) {
    for (const std::string& token : sentence.tokens) {
      for (char32_t cp : DecodeUtf8(token)) seen.insert(cp);
    }
  }
  return FromCodepoints({seen.begin(), seen.end()});
}

CharVocab CharVocab::FromCodepoints(std::vector<char32_t> codepoints) {
  CharVocab vocab;
  vocab.codepoints_ = std::move(codepoints);
  for (size_t i = 0; i < vocab.codepoints_.size(); ++i) {
    vocab.ids_.emplace(vocab.codepoints_[i], static_cast<int>(i) + 2);
  }
  return vocab;
}

int CharVocab::Id(char32_t codepoint) const {
  auto it = ids_.find(codepoint);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> CharVocab::Encode(std::string_view token) const {
  std::vector<int> ids;
  for (char32_t cp : DecodeUtf8(token)) ids.push_back(Id(cp));
  return ids;
}

void CharVocab::Index(Sentence& sentence) const {
  sentence.char_ids.clear();
  sentence.char_ids.reserve(sentence.tokens.size());
  for (const std::string& token : sentence.tokens) {
    sentence.char_ids.push_back(Encode(token));
  }
}

void CharVocab::Index(Corpus& corpus) const {
  for (Sentence& sentence : corpus.sentences) Index(sentence);
}

TagScheme DetectScheme(std::span<const std::vector<std::string>> tag_sequences) {
  for (const auto& tags : tag_sequences) {
    std::vector<ParsedTag> parsed = ParseTags(tags);
    for (size_t i = 0; i < parsed.size(); ++i) {
      if (OpensWithInside(parsed, i)) return TagScheme::kIob1;
    }
  }
  return TagScheme::kIob2;
}

std::vector<LabeledSpan> SpansFromTags(std::span<const std::string> tags,
                                       TagScheme scheme) {
  std::vector<ParsedTag> parsed = ParseTags(tags);
  if (scheme == TagScheme::kAuto) {
    scheme = TagScheme::kIob2;
    for (size_t i = 0; i < parsed.size(); ++i) {
      if (OpensWithInside(parsed, i)) scheme = TagScheme::kIob1;
    }
  }
  std::vector<LabeledSpan> spans;
  int open_start = 0;
  std::string open_type;
  auto close = [&](int end) {
    if (open_start > 0) spans.push_back({{open_start, end}, open_type});
    open_start = 0;
  };
  for (size_t i = 0; i < parsed.size(); ++i) {
    const int position = static_cast<int>(i) + 1;
    const ParsedTag& tag = parsed[i];
    if (tag.prefix == 'O') {
      close(position - 1);
    } else if (tag.prefix == 'B') {
      close(position - 1);
      open_start = position;
      open_type = tag.type;
    } else if (OpensWithInside(parsed, i)) {
      if (scheme == TagScheme::kIob2) {
        throw Error(ErrorCode::kInvalidTransition,
                    "I-" + tag.type + " at position " +
                        std::to_string(position) + " does not continue a " +
                        tag.type + " entity");
      }
      close(position - 1);
      open_start = position;
      open_type = tag.type;
    }
  }
  close(static_cast<int>(parsed.size()));
  std::sort(spans.begin(), spans.end());
  return spans;
}

std::vector<std::string> TagsFromSpans(int length,
                                       std::span<const LabeledSpan> spans) {
  std::vector<std::string> tags(length, "O");
  for (const LabeledSpan& labeled : spans) {
    for (int i = labeled.span.start; i <= labeled.span.end; ++i) {
      if (tags.at(i - 1) != "O") {
        throw Error(ErrorCode::kInvalidTransition,
                    "overlapping spans cannot be rendered as tags");
      }
      tags[i - 1] = (i == labeled.span.start ? "B-" : "I-") + labeled.label;
    }
  }
  return tags;
}

Corpus ParseBio(std::istream& in, TagScheme scheme, Split split) {
  struct Pending {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
  };
  std::vector<Pending> pending;
  Pending current;
  size_t columns = 0;
  std::string line;
  int line_number = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) pending.push_back(std::move(current));
    current = Pending{};
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsBlank(line)) {
      flush();
      continue;
    }
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.front() == "-DOCSTART-") {
      flush();
      continue;
    }
    if (fields.size() < 2 || (columns != 0 && fields.size() != columns)) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_number) + " has " +
                      std::to_string(fields.size()) + " columns");
    }
    columns = fields.size();
    try {
      ParseTag(fields.back());
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidTag,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    current.tokens.push_back(fields.front());
    current.tags.push_back(fields.back());
  }
  flush();

  if (scheme == TagScheme::kAuto) {
    std::vector<std::vector<std::string>> all_tags;
    all_tags.reserve(pending.size());
    for (const Pending& p : pending) all_tags.push_back(p.tags);
    scheme = DetectScheme(all_tags);
  }

  Corpus corpus;
  corpus.split = split;
  corpus.sentences.reserve(pending.size());
  for (Pending& p : pending) {
    Sentence sentence;
    sentence.id = static_cast<int>(corpus.sentences.size());
    sentence.gold_spans = SpansFromTags(p.tags, scheme);
    sentence.tokens = std::move(p.tokens);
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus ParseBio(const std::filesystem::path& path, TagScheme scheme,
                Split split) {
  std::ifstream in = OpenOrThrow(path);
  return ParseBio(in, scheme, split);
}

void WriteBio(std::ostream& out, const Corpus& corpus) {
  for (const Sentence& sentence : corpus.sentences) {
    std::vector<std::string> tags =
        TagsFromSpans(sentence.size(), sentence.gold_spans);
    for (int i = 0; i < sentence.size(); ++i) {
      out << sentence.tokens[i] << ' ' << tags[i] << '\n';
    }
    out << '\n';
  }
}

Corpus ParseNested(std::istream& in, Split split) {
  Corpus corpus;
  corpus.split = split;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    Sentence sentence;
    sentence.id = static_cast<int>(corpus.sentences.size());
    try {
      sentence.tokens = record.at("tokens").get<std::vector<std::string>>();
      for (const auto& triple : record.value("spans", nlohmann::json::array())) {
        if (!triple.is_array() || triple.size() != 3) {
          throw Error(ErrorCode::kMalformedLine,
                      "line " + std::to_string(line_number) +
                          ": span entries must be [start, end, label]");
        }
        sentence.gold_spans.push_back(
            {{triple[0].get<int>(), triple[1].get<int>()},
             triple[2].get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    if (sentence.tokens.empty()) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_number) + ": empty sentence");
    }
    ValidateGold(sentence, line_number);
    std::sort(sentence.gold_spans.begin(), sentence.gold_spans.end());
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus ParseNested(const std::filesystem::path& path, Split split) {
  std::ifstream in = OpenOrThrow(path);
  return ParseNested(in, split);
}

void WriteNested(std::ostream& out, const Corpus& corpus) {
  for (const Sentence& sentence : corpus.sentences) {
    nlohmann::json spans = nlohmann::json::array();
    for (const LabeledSpan& gold : sentence.gold_spans) {
      spans.push_back({gold.span.start, gold.span.end, gold.label});
    }
    nlohmann::json record = {{"tokens", sentence.tokens}, {"spans", spans}};
    out << record.dump() << '\n';
  }
}

void WriteNested(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  WriteNested(out, corpus);
}

std::vector<Span> EnumerateSpans(int length, int max_width) {
  std::vector<Span> spans;
  if (max_width < 1) return spans;
  spans.reserve(static_cast<size_t>(CountSpans(length, max_width)));
  for (int start = 1; start <= length; ++start) {
    for (int end = start; end <= length && end - start < max_width; ++end) {
      spans.push_back({start, end});
    }
  }
  return spans;
}

std::int64_t CountSpans(int length, int max_width) {
  if (length <= 0 || max_width <= 0) return 0;
  const std::int64_t t = length;
  const std::int64_t l = std::min(length, max_width);
  return t * l - l * (l - 1) / 2;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

}  // namespace ibspan
