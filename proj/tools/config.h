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

#ifndef IBSPAN_TOOLS_CONFIG_H_
#define IBSPAN_TOOLS_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/encoder.h"
#include "ibspan/inference.h"
#include "ibspan/trainer.h"

namespace ibspan::cli {

enum class Task { kFlatNer, kNestedNer, kChunking };

std::string TaskName(Task task);
Task ParseTask(const std::string& name);

// Everything a command needs, resolved from an INI file plus overrides.
//
//   [run]     task
//   [data]    train, dev, test, embeddings, scheme
//   [encoder] word_dim, char_dim, char_filters, char_window, lstm_layers,
//             lstm_hidden, span_dim, max_span_width
//   [train]   head, seed, support_sentences, batch_size, epochs, eta0,
//             rho, clip, dropout, train_fraction, prob_floor
//   [output]  dir, checkpoint
//
// The task fixes the span-feature mode and the decoder: flat-ner uses
// 2-part features and flat decoding, nested-ner 4-part features and
// nested decoding over JSON-lines input, chunking 4-part features and
// flat decoding over column input.
struct RunConfig {
  Task task = Task::kFlatNer;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path embeddings_path;
  TagScheme scheme = TagScheme::kAuto;
  EncoderConfig encoder;
  TrainConfig train;
  std::filesystem::path output_dir = "run";
  std::filesystem::path checkpoint;  // defaults to <output_dir>/model.ckpt

  std::filesystem::path CheckpointPath() const;
  Decoding decoding() const;
  bool nested_input() const { return task == Task::kNestedNer; }
};

// Parses `text` (INI) and applies "section.key=value" overrides in order.
// Unknown sections or keys and unparsable values raise ConfigError naming
// the field.
RunConfig ParseRunConfig(const std::string& text,
                         const std::vector<std::string>& overrides = {});
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides = {});

// Raises ConfigError naming the first missing field among those listed
// ("train", "dev", "test", "embeddings").
void RequirePaths(const RunConfig& config,
                  const std::vector<std::string>& fields);

// Full resolved config in INI form; parsing it back yields the same config.
std::string EchoConfig(const RunConfig& config);

// Digest over the fields that determine parameter shapes and meaning:
// task, head and the encoder section.
std::string ModelDigest(const RunConfig& config);

}  // namespace ibspan::cli

#endif  // IBSPAN_TOOLS_CONFIG_H_
