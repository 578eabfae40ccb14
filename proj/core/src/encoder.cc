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

#include "ibspan/encoder.h"

#include "ibspan/error.h"
#include "ibspan/optim.h"

namespace ibspan {
namespace {

Tensor BlockOrthonormal(int rows, int hidden, std::mt19937_64& rng) {
  Tensor out = Tensor::Zeros(rows, 4 * hidden);
  for (int gate = 0; gate < 4; ++gate) {
    Tensor block = InitOrthonormal({rows, hidden}, rng);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < hidden; ++c) out(r, gate * hidden + c) = block(r, c);
    }
  }
  return out;
}

}  // namespace

void EncoderConfig::Validate() const {
  auto positive = [](int value, const char* field) {
    if (value <= 0) {
      throw Error(ErrorCode::kConfigError,
                  std::string("encoder.") + field + " must be positive");
    }
  };
  positive(word_dim, "word_dim");
  positive(char_dim, "char_dim");
  positive(char_filters, "char_filters");
  positive(char_window, "char_window");
  positive(lstm_layers, "lstm_layers");
  positive(lstm_hidden, "lstm_hidden");
  positive(span_dim, "span_dim");
  positive(max_span_width, "max_span_width");
}

std::string_view FeatureModeName(FeatureMode mode) {
  return mode == FeatureMode::kNested ? "nested" : "flat";
}

FeatureMode ParseFeatureMode(std::string_view name) {
  if (name == "flat") return FeatureMode::kFlat;
  if (name == "nested") return FeatureMode::kNested;
  throw Error(ErrorCode::kConfigError,
              "encoder.mode must be flat or nested, got '" + std::string(name) +
                  "'");
}

Encoder::Encoder(const EncoderConfig& config, const EmbeddingTable& words,
                 int char_vocab_size, std::mt19937_64& rng)
    : config_(config), words_(&words) {
  config_.Validate();
  if (words.dim() != config_.word_dim) {
    throw Error(ErrorCode::kDimMismatch,
                "embedding table has dim " + std::to_string(words.dim()) +
                    " but encoder.word_dim is " +
                    std::to_string(config_.word_dim));
  }
  const int window_width = config_.char_window * config_.char_dim;
  char_embeddings_ = Parameter(
      "char_embeddings", InitGlorot({char_vocab_size, config_.char_dim}, rng));
  conv_filters_ = Parameter(
      "char_conv.filters", InitGlorot({window_width, config_.char_filters}, rng));
  conv_bias_ = Parameter("char_conv.bias", Tensor::Zeros(1, config_.char_filters));
  const int hidden = config_.lstm_hidden;
  for (int layer = 0; layer < config_.lstm_layers; ++layer) {
    const int input_dim =
        layer == 0 ? config_.word_dim + config_.char_filters : 2 * hidden;
    for (const char* direction : {"fwd", "bwd"}) {
      const std::string prefix =
          "lstm.l" + std::to_string(layer) + "." + direction + ".";
      lstm_.push_back(LstmParams{
          Parameter(prefix + "input_weights",
                    BlockOrthonormal(input_dim, hidden, rng)),
          Parameter(prefix + "recurrent_weights",
                    BlockOrthonormal(hidden, hidden, rng)),
          Parameter(prefix + "bias", Tensor::Zeros(1, 4 * hidden))});
    }
  }
  projection_ = Parameter(
      "projection", InitGlorot({config_.span_dim, config_.feature_dim()}, rng));
}

std::vector<Parameter*> Encoder::parameters() {
  std::vector<Parameter*> params = {&char_embeddings_, &conv_filters_,
                                    &conv_bias_};
  for (LstmParams& lstm : lstm_) {
    params.push_back(&lstm.input_weights);
    params.push_back(&lstm.recurrent_weights);
    params.push_back(&lstm.bias);
  }
  params.push_back(&projection_);
  return params;
}

std::vector<int> PadCharIds(std::span<const int> ids, int window) {
  const int left = (window - 1) / 2;
  const int right = window - 1 - left;
  std::vector<int> padded(left, 0);
  padded.insert(padded.end(), ids.begin(), ids.end());
  padded.insert(padded.end(), right, 0);
  return padded;
}

Var Encoder::TokenFeatures(Graph& graph, const Sentence& sentence) {
  const int length = sentence.size();
  if (length < 1) throw Error(ErrorCode::kBadShape, "empty sentence");
  if (static_cast<int>(sentence.char_ids.size()) != length) {
    throw Error(ErrorCode::kBadShape,
                "sentence " + std::to_string(sentence.id) +
                    " has no character ids; index it with CharVocab first");
  }
  Tensor word_rows = Tensor::Zeros(length, config_.word_dim);
  for (int t = 0; t < length; ++t) {
    auto v = words_->Lookup(sentence.tokens[t]);
    std::copy(v.begin(), v.end(), word_rows.row(t).begin());
  }
  Var table = graph.Param(char_embeddings_);
  Var filters = graph.Param(conv_filters_);
  Var bias = graph.Param(conv_bias_);
  std::vector<Var> char_rows;
  char_rows.reserve(length);
  for (int t = 0; t < length; ++t) {
    std::vector<int> ids = PadCharIds(sentence.char_ids[t], config_.char_window);
    Var chars = ops::EmbeddingLookup(table, ids);
    char_rows.push_back(
        ops::Conv1dMaxPool(chars, filters, bias, config_.char_window));
  }
  const Var parts[] = {graph.Constant(std::move(word_rows)),
                       ops::ConcatRows(char_rows)};
  return ops::ConcatCols(parts);
}

ContextStates Encoder::Encode(Graph& graph, const Sentence& sentence,
                              bool train, double dropout,
                              std::mt19937_64& rng) {
  Var inputs = TokenFeatures(graph, sentence);
  ContextStates states;
  for (int layer = 0; layer < config_.lstm_layers; ++layer) {
    inputs = ops::Dropout(inputs, dropout, train, rng);
    LstmParams& fw = lstm(layer, false);
    LstmParams& bw = lstm(layer, true);
    states.forward = ops::Lstm(inputs, graph.Param(fw.input_weights),
                               graph.Param(fw.recurrent_weights),
                               graph.Param(fw.bias), /*reverse=*/false);
    states.backward = ops::Lstm(inputs, graph.Param(bw.input_weights),
                                graph.Param(bw.recurrent_weights),
                                graph.Param(bw.bias), /*reverse=*/true);
    const Var both[] = {states.forward, states.backward};
    inputs = ops::ConcatCols(both);
  }
  return states;
}

Var Encoder::SpanFeatures(const ContextStates& states,
                          std::span<const Span> spans) {
  return ops::SpanFeatures(states.forward, states.backward, spans,
                           config_.mode == FeatureMode::kNested);
}

Var Encoder::Project(Graph& graph, Var features) {
  return ops::MatMulNT(features, graph.Param(projection_));
}

Var Encoder::SpanReprs(Graph& graph, const Sentence& sentence,
                       std::span<const Span> spans, bool train, double dropout,
                       std::mt19937_64& rng) {
  ContextStates states = Encode(graph, sentence, train, dropout, rng);
  return Project(graph, SpanFeatures(states, spans));
}

Tensor SpanFeatureRows(const Tensor& forward, const Tensor& backward,
                       std::span<const Span> spans, FeatureMode mode) {
  Graph graph(/*record_gradients=*/false);
  Var out = ops::SpanFeatures(graph.Constant(forward),
                              graph.Constant(backward), spans,
                              mode == FeatureMode::kNested);
  return out.value();
}

Tensor ProjectRows(const Tensor& features, const Tensor& weights) {
  Graph graph(/*record_gradients=*/false);
  return ops::MatMulNT(graph.Constant(features), graph.Constant(weights))
      .value();
}

}  // namespace ibspan
