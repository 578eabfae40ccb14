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

#include "config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>

#include "ibspan/checkpoint.h"
#include "ibspan/error.h"

namespace ibspan::cli {
namespace {

[[noreturn]] void Fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kConfigError, field + ": " + why);
}

template <typename T>
T ParseNumber(const std::string& field, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    Fail(field, "cannot parse '" + text + "' as a number");
  }
  return value;
}

std::string FormatDouble(double value) {
  // Shortest text that parses back to the same double.
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string SchemeName(TagScheme scheme) {
  switch (scheme) {
    case TagScheme::kIob1: return "iob1";
    case TagScheme::kIob2: return "iob2";
    case TagScheme::kAuto: return "auto";
  }
  return "auto";
}

TagScheme ParseScheme(const std::string& text) {
  if (text == "iob1") return TagScheme::kIob1;
  if (text == "iob2") return TagScheme::kIob2;
  if (text == "auto") return TagScheme::kAuto;
  Fail("data.scheme", "must be iob1, iob2 or auto, got '" + text + "'");
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  bool model_shape = false;

  std::string name() const { return section + "." + key; }
};

template <typename Member>
Field Int(const std::string& section, const std::string& key, Member member,
          bool shape = false) {
  const std::string name = section + "." + key;
  return {section, key,
          [member](const RunConfig& c) { return std::to_string(member(c)); },
          [member, name](RunConfig& c, const std::string& v) {
            member(c) = ParseNumber<int>(name, v);
          },
          shape};
}

template <typename Member>
Field Real(const std::string& section, const std::string& key, Member member) {
  const std::string name = section + "." + key;
  return {section, key,
          [member](const RunConfig& c) { return FormatDouble(member(c)); },
          [member, name](RunConfig& c, const std::string& v) {
            member(c) = ParseNumber<double>(name, v);
          }};
}

template <typename Member>
Field Path(const std::string& section, const std::string& key, Member member) {
  return {section, key,
          [member](const RunConfig& c) { return member(c).string(); },
          [member](RunConfig& c, const std::string& v) { member(c) = v; }};
}

// Accessors usable on both const and non-const configs.
#define IBSPAN_MEMBER(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"run", "task", [](const RunConfig& c) { return TaskName(c.task); },
       [](RunConfig& c, const std::string& v) { c.task = ParseTask(v); },
       true},
      Path("data", "train", IBSPAN_MEMBER(train_path)),
      Path("data", "dev", IBSPAN_MEMBER(dev_path)),
      Path("data", "test", IBSPAN_MEMBER(test_path)),
      Path("data", "embeddings", IBSPAN_MEMBER(embeddings_path)),
      {"data", "scheme", [](const RunConfig& c) { return SchemeName(c.scheme); },
       [](RunConfig& c, const std::string& v) { c.scheme = ParseScheme(v); }},
      Int("encoder", "word_dim", IBSPAN_MEMBER(encoder.word_dim), true),
      Int("encoder", "char_dim", IBSPAN_MEMBER(encoder.char_dim), true),
      Int("encoder", "char_filters", IBSPAN_MEMBER(encoder.char_filters), true),
      Int("encoder", "char_window", IBSPAN_MEMBER(encoder.char_window), true),
      Int("encoder", "lstm_layers", IBSPAN_MEMBER(encoder.lstm_layers), true),
      Int("encoder", "lstm_hidden", IBSPAN_MEMBER(encoder.lstm_hidden), true),
      Int("encoder", "span_dim", IBSPAN_MEMBER(encoder.span_dim), true),
      Int("encoder", "max_span_width", IBSPAN_MEMBER(encoder.max_span_width),
          true),
      {"train", "head",
       [](const RunConfig& c) { return std::string(HeadName(c.train.head)); },
       [](RunConfig& c, const std::string& v) { c.train.head = ParseHead(v); },
       true},
      {"train", "seed",
       [](const RunConfig& c) { return std::to_string(c.train.seed); },
       [](RunConfig& c, const std::string& v) {
         c.train.seed = ParseNumber<std::uint64_t>("train.seed", v);
       }},
      Int("train", "support_sentences",
          IBSPAN_MEMBER(train.support_sentences)),
      Int("train", "batch_size", IBSPAN_MEMBER(train.batch_size)),
      Int("train", "epochs", IBSPAN_MEMBER(train.epochs)),
      Real("train", "eta0", IBSPAN_MEMBER(train.eta0)),
      Real("train", "rho", IBSPAN_MEMBER(train.rho)),
      Real("train", "clip", IBSPAN_MEMBER(train.clip)),
      Real("train", "dropout", IBSPAN_MEMBER(train.dropout)),
      Real("train", "train_fraction", IBSPAN_MEMBER(train.train_fraction)),
      Real("train", "prob_floor", IBSPAN_MEMBER(train.prob_floor)),
      Path("output", "dir", IBSPAN_MEMBER(output_dir)),
      Path("output", "checkpoint", IBSPAN_MEMBER(checkpoint)),
  };
  return fields;
}

#undef IBSPAN_MEMBER

const Field& FindField(const std::string& section, const std::string& key) {
  for (const Field& field : Fields()) {
    if (field.section == section && field.key == key) return field;
  }
  Fail(section + "." + key, "unknown field");
}

// Settings derived from the task rather than configured directly.
void ApplyTask(RunConfig& config) {
  config.encoder.mode =
      config.task == Task::kFlatNer ? FeatureMode::kFlat : FeatureMode::kNested;
  config.train.decoding = config.decoding();
}

}  // namespace

std::string TaskName(Task task) {
  switch (task) {
    case Task::kFlatNer: return "flat-ner";
    case Task::kNestedNer: return "nested-ner";
    case Task::kChunking: return "chunking";
  }
  return "flat-ner";
}

Task ParseTask(const std::string& name) {
  if (name == "flat-ner") return Task::kFlatNer;
  if (name == "nested-ner") return Task::kNestedNer;
  if (name == "chunking") return Task::kChunking;
  Fail("run.task", "must be flat-ner, nested-ner or chunking, got '" + name +
                       "'");
}

std::filesystem::path RunConfig::CheckpointPath() const {
  return checkpoint.empty() ? output_dir / "model.ckpt" : checkpoint;
}

Decoding RunConfig::decoding() const {
  return task == Task::kNestedNer ? Decoding::kNested : Decoding::kFlat;
}

RunConfig ParseRunConfig(const std::string& text,
                         const std::vector<std::string>& overrides) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigError,
                "line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig config;
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      Fail(section, "top-level keys are not allowed; use [section] headers");
    }
    for (const auto& [key, value] : entries) {
      FindField(section, key).set(config, value.data());
    }
  }
  for (const std::string& item : overrides) {
    const std::size_t eq = item.find('=');
    const std::size_t dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw Error(ErrorCode::kConfigError,
                  "override '" + item + "' must look like section.key=value");
    }
    FindField(item.substr(0, dot), item.substr(dot + 1, eq - dot - 1))
        .set(config, item.substr(eq + 1));
  }
  ApplyTask(config);
  config.encoder.Validate();
  config.train.Validate();
  return config;
}

RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kConfigError,
                "cannot read config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseRunConfig(text.str(), overrides);
}

void RequirePaths(const RunConfig& config,
                  const std::vector<std::string>& fields) {
  for (const std::string& key : fields) {
    const Field& field = FindField("data", key);
    const std::string value = field.get(config);
    if (value.empty()) Fail(field.name(), "required but not set");
    if (!std::filesystem::exists(value)) {
      Fail(field.name(), "file '" + value + "' does not exist");
    }
  }
}

std::string EchoConfig(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Field& field : Fields()) {
    if (field.section != section) {
      if (!section.empty()) out << '\n';
      section = field.section;
      out << '[' << section << "]\n";
    }
    out << field.key << " = " << field.get(config) << '\n';
  }
  return out.str();
}

std::string ModelDigest(const RunConfig& config) {
  std::string text;
  for (const Field& field : Fields()) {
    if (field.model_shape) text += field.name() + "=" + field.get(config) + "\n";
  }
  return Digest(text);
}

}  // namespace ibspan::cli
