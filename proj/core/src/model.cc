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

#include "ibspan/model.h"

#include <random>
#include <sstream>

#include "ibspan/error.h"

namespace ibspan {
namespace {

std::string JoinLabels(const LabelSet& labels) {
  std::string out;
  for (const std::string& name : labels.names()) out += name + "\n";
  return out;
}

LabelSet SplitLabels(const std::string& text) {
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) names.push_back(line);
  }
  return LabelSet(std::move(names));
}

std::string JoinCodepoints(const std::vector<char32_t>& codepoints) {
  std::string out;
  for (char32_t cp : codepoints) out += std::to_string(cp) + " ";
  return out;
}

std::vector<char32_t> SplitCodepoints(const std::string& text) {
  std::vector<char32_t> out;
  std::istringstream in(text);
  unsigned long value = 0;
  while (in >> value) out.push_back(static_cast<char32_t>(value));
  return out;
}

}  // namespace

SpanModel::SpanModel(const EncoderConfig& config, HeadKind head,
                     LabelSet labels, CharVocab chars,
                     const EmbeddingTable& words, std::uint64_t seed)
    : SpanModel(config, head, std::move(labels), std::move(chars), words,
                std::mt19937_64(seed)) {}

SpanModel::SpanModel(const EncoderConfig& config, HeadKind head,
                     LabelSet labels, CharVocab chars,
                     const EmbeddingTable& words, std::mt19937_64 rng)
    : head_(head),
      labels_(std::move(labels)),
      chars_(std::move(chars)),
      encoder_(config, words, chars_.size(), rng) {
  if (head_ == HeadKind::kClassifier) {
    classifier_.emplace(labels_.size(), config.span_dim, rng);
  }
}

std::vector<Parameter*> SpanModel::parameters() {
  std::vector<Parameter*> params = encoder_.parameters();
  if (classifier_) {
    params.push_back(&classifier_->label_weights);
    params.push_back(&classifier_->label_bias);
  }
  return params;
}

std::vector<Tensor> SpanModel::SnapshotValues() {
  std::vector<Tensor> values;
  for (Parameter* p : parameters()) values.push_back(p->value);
  return values;
}

void SpanModel::RestoreValues(const std::vector<Tensor>& values) {
  std::vector<Parameter*> params = parameters();
  if (values.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "snapshot size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!values[i].SameShape(params[i]->value)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "snapshot shape mismatch for " + params[i]->name);
    }
    params[i]->value = values[i];
  }
}

Sentence SpanModel::Prepare(const Sentence& sentence) const {
  Sentence prepared = sentence;
  chars_.Index(prepared);
  return prepared;
}

Corpus SpanModel::Prepare(const Corpus& corpus) const {
  Corpus prepared = corpus;
  chars_.Index(prepared);
  return prepared;
}

Tensor SpanModel::SpanReprs(const Sentence& sentence,
                            std::span<const Span> spans) {
  Graph graph(/*record_gradients=*/false);
  std::mt19937_64 unused;
  return encoder_.SpanReprs(graph, sentence, spans, /*train=*/false, 0.0, unused)
      .value();
}

Checkpoint SpanModel::ToCheckpoint(const std::string& digest,
                                   const std::string& config_echo) {
  Checkpoint checkpoint;
  checkpoint.config_digest = digest;
  checkpoint.config_echo = config_echo;
  checkpoint.metadata["head"] = std::string(HeadName(head_));
  checkpoint.metadata["labels"] = JoinLabels(labels_);
  checkpoint.metadata["chars"] = JoinCodepoints(chars_.codepoints());
  checkpoint.metadata["mode"] = std::string(FeatureModeName(config().mode));
  for (Parameter* p : parameters()) {
    checkpoint.tensors.emplace_back(p->name, p->value);
  }
  return checkpoint;
}

SpanModel SpanModel::FromCheckpoint(const Checkpoint& checkpoint,
                                    const EncoderConfig& config,
                                    const EmbeddingTable& words) {
  auto meta = [&](const char* key) -> const std::string& {
    auto it = checkpoint.metadata.find(key);
    if (it == checkpoint.metadata.end()) {
      throw Error(ErrorCode::kIoError,
                  std::string("checkpoint lacks metadata '") + key + "'");
    }
    return it->second;
  };
  SpanModel model(config, ParseHead(meta("head")), SplitLabels(meta("labels")),
                  CharVocab::FromCodepoints(SplitCodepoints(meta("chars"))),
                  words, /*seed=*/0);
  for (Parameter* p : model.parameters()) {
    const Tensor* stored = checkpoint.Find(p->name);
    if (stored == nullptr || !stored->SameShape(p->value)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "checkpoint tensor '" + p->name + "' missing or misshaped");
    }
    p->value = *stored;
  }
  return model;
}

}  // namespace ibspan
