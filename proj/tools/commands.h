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

#ifndef IBSPAN_TOOLS_COMMANDS_H_
#define IBSPAN_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ibspan/corpus.h"

namespace ibspan::cli {

// Config location plus "section.key=value" overrides, shared by every
// command that runs against a model.
struct ConfigSource {
  std::filesystem::path path;
  std::vector<std::string> overrides;
};

// Writes <output.dir>/{model.ckpt, report.jsonl, config.ini}; progress goes
// to `log`, one line per epoch.
void RunTrain(const ConfigSource& source, std::ostream& log);

// Decoded spans of one split as JSON lines.
struct PredictOptions {
  Split split = Split::kTest;
  std::filesystem::path output;  // stdout when empty
  bool with_distribution = false;
};
void RunPredict(const ConfigSource& source, const PredictOptions& options,
                std::ostream& out);

// Scores a split with the trained model, or a predictions file against the
// split's gold spans when `predictions` is set (no checkpoint needed).
struct EvalOptions {
  Split split = Split::kTest;
  std::optional<std::filesystem::path> predictions;
  bool json = false;
};
void RunEval(const ConfigSource& source, const EvalOptions& options,
             std::ostream& out);

struct ExplainOptions {
  Split split = Split::kTest;
  int sentence = 0;  // sentence id within the split (file order, from 0)
  int start = 1;
  int end = 1;
  int top_k = 5;
};
void RunExplain(const ConfigSource& source, const ExplainOptions& options,
                std::ostream& out);

// Trains both heads at each fraction; table to `out` and JSON lines to
// <output.dir>/ablation.jsonl.
void RunAblate(const ConfigSource& source, const std::vector<double>& fractions,
               std::ostream& out);

// Trains both heads `runs` times; table to `out` and JSON lines to
// <output.dir>/comparison.jsonl.
void RunCompare(const ConfigSource& source, int runs, std::ostream& out);

struct DumpOptions {
  Split split = Split::kTest;
  std::filesystem::path output;  // stdout when empty
};
void RunDumpFeatures(const ConfigSource& source, const DumpOptions& options,
                     std::ostream& out);

struct SyntheticCommandOptions {
  std::filesystem::path output_dir;
  bool nested = false;
  std::uint64_t seed = 7;
  int train = 240;
  int dev = 60;
  int test = 60;
  int word_dim = 50;
  double oov_rate = 0.05;
};
// Writes the corpus, embeddings and a ready-to-run config.ini.
void RunGenSynthetic(const SyntheticCommandOptions& options, std::ostream& out);

// Parses "1,0.5,0.25" into fractions; ConfigError on bad input.
std::vector<double> ParseFractions(const std::string& text);
Split ParseSplit(const std::string& name);

}  // namespace ibspan::cli

#endif  // IBSPAN_TOOLS_COMMANDS_H_
