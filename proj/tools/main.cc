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

// ibspan: train, apply and inspect instance-based span classifiers.

#include <CLI11.hpp>
#include <iostream>

#include "commands.h"
#include "ibspan/error.h"

namespace {

using namespace ibspan::cli;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void AddConfigFlags(CLI::App* command, ConfigSource& source,
                    std::optional<std::uint64_t>& seed) {
  command->add_option("-c,--config", source.path, "INI run configuration")
      ->required();
  command->add_option("--set", source.overrides,
                      "Override a config field, e.g. --set train.epochs=5 "
                      "(repeatable)");
  command->add_option("--seed", seed, "Shorthand for --set train.seed=N");
}

void AddSplitFlag(CLI::App* command, std::string& split) {
  command->add_option("--split", split, "Corpus split to use")
      ->check(CLI::IsMember({"train", "dev", "test"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-based span classification for NER and chunking."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  ConfigSource source;
  std::optional<std::uint64_t> seed;
  std::string split = "test";

  CLI::App* train = app.add_subcommand(
      "train", "Train a model; writes model.ckpt, report.jsonl and config.ini "
               "into output.dir");
  AddConfigFlags(train, source, seed);

  PredictOptions predict_opts;
  std::string predict_out;
  CLI::App* predict =
      app.add_subcommand("predict", "Write decoded spans of a split as JSON lines");
  AddConfigFlags(predict, source, seed);
  AddSplitFlag(predict, split);
  predict->add_option("-o,--out", predict_out, "Output file (default stdout)");
  predict->add_flag("--distribution", predict_opts.with_distribution,
                    "Include the full label distribution per span");

  EvalOptions eval_opts;
  std::string eval_predictions;
  CLI::App* eval = app.add_subcommand(
      "eval", "Print span P/R/F1 of the trained model, or of a predictions "
              "file, against a split");
  AddConfigFlags(eval, source, seed);
  AddSplitFlag(eval, split);
  eval->add_option("--predictions", eval_predictions,
                   "Score this predictions file instead of running the model");
  eval->add_flag("--json", eval_opts.json, "Print metrics as JSON");

  ExplainOptions explain_opts;
  CLI::App* explain = app.add_subcommand(
      "explain", "List the training spans that support a span's prediction");
  AddConfigFlags(explain, source, seed);
  AddSplitFlag(explain, split);
  explain->add_option("--sentence", explain_opts.sentence,
                      "Sentence index within the split, from 0")
      ->required();
  explain->add_option("--start", explain_opts.start,
                      "First word of the span, 1-based")
      ->required();
  explain->add_option("--end", explain_opts.end,
                      "Last word of the span, 1-based, inclusive")
      ->required();
  explain->add_option("-k,--top-k", explain_opts.top_k,
                      "Number of neighbours to list")
      ->capture_default_str();

  std::string fractions = "1,0.5,0.25,0.125";
  CLI::App* ablate = app.add_subcommand(
      "ablate", "Train both heads on subsampled training sets and report dev F1");
  AddConfigFlags(ablate, source, seed);
  ablate->add_option("--fractions", fractions,
                     "Comma-separated training fractions in (0, 1]")
      ->capture_default_str();

  int runs = 3;
  CLI::App* compare = app.add_subcommand(
      "compare", "Train both heads over several seeds and report test F1");
  AddConfigFlags(compare, source, seed);
  compare->add_option("--runs", runs, "Seeds per head")->capture_default_str();

  std::string dump_out;
  CLI::App* dump = app.add_subcommand(
      "dump-features", "Write span representations of gold spans as JSON lines");
  AddConfigFlags(dump, source, seed);
  AddSplitFlag(dump, split);
  dump->add_option("-o,--out", dump_out, "Output file (default stdout)");

  SyntheticCommandOptions synth;
  std::string synth_dir;
  CLI::App* gen = app.add_subcommand(
      "gen-synthetic",
      "Generate a synthetic corpus, embeddings and config.ini");
  gen->add_option("-o,--out", synth_dir, "Output directory")->required();
  gen->add_flag("--nested", synth.nested,
                "Nested protein/DNA/cell_type corpus instead of flat "
                "PER/LOC/ORG");
  gen->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  gen->add_option("--train", synth.train, "Training sentences")
      ->capture_default_str();
  gen->add_option("--dev", synth.dev, "Development sentences")
      ->capture_default_str();
  gen->add_option("--test", synth.test, "Test sentences")->capture_default_str();
  gen->add_option("--word-dim", synth.word_dim, "Embedding dimension")
      ->capture_default_str();
  gen->add_option("--oov-rate", synth.oov_rate,
                  "Fraction of words left without an embedding")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (seed) source.overrides.push_back("train.seed=" + std::to_string(*seed));
  try {
    if (train->parsed()) {
      RunTrain(source, std::cerr);
    } else if (predict->parsed()) {
      predict_opts.split = ParseSplit(split);
      predict_opts.output = predict_out;
      RunPredict(source, predict_opts, std::cout);
    } else if (eval->parsed()) {
      eval_opts.split = ParseSplit(split);
      if (!eval_predictions.empty()) eval_opts.predictions = eval_predictions;
      RunEval(source, eval_opts, std::cout);
    } else if (explain->parsed()) {
      explain_opts.split = ParseSplit(split);
      RunExplain(source, explain_opts, std::cout);
    } else if (ablate->parsed()) {
      RunAblate(source, ParseFractions(fractions), std::cout);
    } else if (compare->parsed()) {
      RunCompare(source, runs, std::cout);
    } else if (dump->parsed()) {
      RunDumpFeatures(source, {ParseSplit(split), dump_out}, std::cout);
    } else if (gen->parsed()) {
      synth.output_dir = synth_dir;
      RunGenSynthetic(synth, std::cout);
    }
  } catch (const ibspan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ibspan::ErrorCode::kConfigError ? kExitUsage
                                                        : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
