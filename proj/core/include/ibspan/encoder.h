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

#ifndef IBSPAN_ENCODER_H_
#define IBSPAN_ENCODER_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/embeddings.h"
#include "ibspan/graph.h"

namespace ibspan {

// Flat NER uses the two boundary-difference parts; nested NER and chunking
// append the two endpoint-sum parts.
enum class FeatureMode { kFlat, kNested };

struct EncoderConfig {
  int word_dim = 100;
  int char_dim = 30;
  int char_filters = 30;
  int char_window = 3;
  int lstm_layers = 2;
  int lstm_hidden = 100;
  int span_dim = 256;
  int max_span_width = 6;
  FeatureMode mode = FeatureMode::kFlat;

  int feature_parts() const { return mode == FeatureMode::kNested ? 4 : 2; }
  int feature_dim() const { return feature_parts() * lstm_hidden; }
  // Throws ConfigError naming the first non-positive field.
  void Validate() const;
};

std::string_view FeatureModeName(FeatureMode mode);
FeatureMode ParseFeatureMode(std::string_view name);

struct LstmParams {
  Parameter input_weights;      // [n, 4h]
  Parameter recurrent_weights;  // [h, 4h]
  Parameter bias;               // [1, 4h]
};

// Per-direction top-layer states, each [T, hidden]. Row t-1 holds the
// state at position t; positions 0 and T+1 are implicit zeros.
struct ContextStates {
  Var forward;
  Var backward;
};

class Encoder {
 public:
  Encoder(const EncoderConfig& config, const EmbeddingTable& words,
          int char_vocab_size, std::mt19937_64& rng);

  const EncoderConfig& config() const { return config_; }
  const EmbeddingTable& words() const { return *words_; }
  void set_words(const EmbeddingTable& words) { words_ = &words; }
  std::vector<Parameter*> parameters();

  // Word embedding (frozen) and char-CNN features per token, [T, n].
  Var TokenFeatures(Graph& graph, const Sentence& sentence);
  // Dropout is applied to the token features and to each LSTM layer's
  // input when `train` is set.
  ContextStates Encode(Graph& graph, const Sentence& sentence, bool train,
                       double dropout, std::mt19937_64& rng);
  // Rows of LSTM-minus features, [spans, feature_dim].
  Var SpanFeatures(const ContextStates& states, std::span<const Span> spans);
  // h_s = W h_lstm for every row, [spans, span_dim].
  Var Project(Graph& graph, Var features);
  // Encode + SpanFeatures + Project.
  Var SpanReprs(Graph& graph, const Sentence& sentence,
                std::span<const Span> spans, bool train, double dropout,
                std::mt19937_64& rng);

  Parameter& char_embeddings() { return char_embeddings_; }
  Parameter& conv_filters() { return conv_filters_; }
  Parameter& conv_bias() { return conv_bias_; }
  // layer-major, forward then backward direction.
  LstmParams& lstm(int layer, bool backward) {
    return lstm_[2 * layer + (backward ? 1 : 0)];
  }
  Parameter& projection() { return projection_; }

 private:
  EncoderConfig config_;
  const EmbeddingTable* words_;
  Parameter char_embeddings_;
  Parameter conv_filters_;
  Parameter conv_bias_;
  std::vector<LstmParams> lstm_;
  Parameter projection_;  // [span_dim, feature_dim]
};

// Pads char ids so that any word fills at least one convolution window.
std::vector<int> PadCharIds(std::span<const int> ids, int window);

// Plain-tensor forms of the span feature and projection kernels.
Tensor SpanFeatureRows(const Tensor& forward, const Tensor& backward,
                       std::span<const Span> spans, FeatureMode mode);
Tensor ProjectRows(const Tensor& features, const Tensor& weights);

}  // namespace ibspan

#endif  // IBSPAN_ENCODER_H_
