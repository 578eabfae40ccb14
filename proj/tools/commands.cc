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

#include "commands.h"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.h"
#include "ibspan/checkpoint.h"
#include "ibspan/error.h"
#include "ibspan/evaluator.h"
#include "ibspan/experiments.h"
#include "ibspan/inference.h"
#include "ibspan/model.h"
#include "ibspan/synthetic.h"
#include "ibspan/trainer.h"

namespace ibspan::cli {
namespace {

std::string SplitKey(Split split) { return std::string(SplitName(split)); }

Corpus LoadCorpus(const RunConfig& config, Split split) {
  const std::filesystem::path& path = split == Split::kTrain ? config.train_path
                                      : split == Split::kDev ? config.dev_path
                                                             : config.test_path;
  return config.nested_input() ? ParseNested(path, split)
                               : ParseBio(path, config.scheme, split);
}

std::ofstream OpenOutput(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

// Loaded config, embeddings and training corpus; `model` is filled from the
// checkpoint on demand. Members are declared so that `words` outlives the
// model that points at it.
struct Session {
  RunConfig config;
  EmbeddingTable words;
  Corpus train;
  std::optional<SpanModel> model;

  Session(const ConfigSource& source, std::vector<std::string> required)
      : config(LoadRunConfig(source.path, source.overrides)) {
    RequirePaths(config, required);
    words = LoadEmbeddings(config.embeddings_path, config.encoder.word_dim);
    train = LoadCorpus(config, Split::kTrain);
  }

  SpanModel& LoadModel() {
    const Checkpoint checkpoint =
        ReadCheckpoint(config.CheckpointPath(), ModelDigest(config));
    model.emplace(SpanModel::FromCheckpoint(checkpoint, config.encoder, words));
    return *model;
  }
};

}  // namespace

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kConfigError,
              "split must be train, dev or test, got '" + name + "'");
}

std::vector<double> ParseFractions(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    double value = 0;
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, value);
    if (ec != std::errc() || ptr != end || !(value > 0 && value <= 1)) {
      throw Error(ErrorCode::kConfigError,
                  "fractions: '" + item + "' is not in (0, 1]");
    }
    out.push_back(value);
  }
  if (out.empty()) throw Error(ErrorCode::kConfigError, "fractions: empty list");
  return out;
}

void RunTrain(const ConfigSource& source, std::ostream& log) {
  Session session(source, {"train", "dev", "embeddings"});
  const RunConfig& config = session.config;
  const Corpus dev = LoadCorpus(config, Split::kDev);
  log << "training " << HeadName(config.train.head) << " head on "
      << session.train.sentences.size() << " sentences\n";
  TrainResult result = Train(
      config.encoder, config.train, session.train, dev, session.words,
      [&log](const EpochRecord& record) {
        log << "epoch " << record.epoch << "  loss " << record.train_loss
            << "  lr " << record.lr << "  dev " << FormatMetrics(record.dev)
            << '\n';
      });
  const std::string echo = EchoConfig(config);
  result.report.checkpoint_path = config.CheckpointPath().string();
  {
    std::ofstream out = OpenOutput(config.CheckpointPath());
    WriteCheckpoint(out, result.model.ToCheckpoint(ModelDigest(config), echo));
  }
  {
    std::ofstream out = OpenOutput(config.output_dir / "report.jsonl");
    WriteReport(out, result.report);
  }
  OpenOutput(config.output_dir / "config.ini") << echo;
  log << "best epoch " << result.report.best_epoch << "  dev F1 "
      << result.report.best_dev_f1 << "\ncheckpoint "
      << result.report.checkpoint_path << '\n';
}

void RunPredict(const ConfigSource& source, const PredictOptions& options,
                std::ostream& out) {
  Session session(source, {"train", "embeddings", SplitKey(options.split)});
  SpanModel& model = session.LoadModel();
  const Corpus corpus = LoadCorpus(session.config, options.split);
  Predictor predictor(model, session.train,
                      session.config.train.support_sentences);
  if (options.output.empty()) {
    WritePredictions(out, corpus, predictor, session.config.decoding(),
                     options.with_distribution);
    return;
  }
  std::ofstream file = OpenOutput(options.output);
  WritePredictions(file, corpus, predictor, session.config.decoding(),
                   options.with_distribution);
}

void RunEval(const ConfigSource& source, const EvalOptions& options,
             std::ostream& out) {
  Metrics metrics;
  if (options.predictions) {
    const RunConfig config = LoadRunConfig(source.path, source.overrides);
    RequirePaths(config, {SplitKey(options.split)});
    const Corpus corpus = LoadCorpus(config, options.split);
    std::ifstream in(*options.predictions);
    if (!in) {
      throw Error(ErrorCode::kIoError,
                  "cannot read " + options.predictions->string());
    }
    metrics = SpanF1(GoldSpans(corpus), ReadPredictions(in, corpus));
  } else {
    Session session(source, {"train", "embeddings", SplitKey(options.split)});
    SpanModel& model = session.LoadModel();
    Predictor predictor(model, session.train,
                        session.config.train.support_sentences);
    metrics = EvaluateCorpus(predictor, LoadCorpus(session.config, options.split),
                             session.config.decoding());
  }
  out << (options.json ? MetricsToJson(metrics) : FormatMetrics(metrics))
      << '\n';
}

void RunExplain(const ConfigSource& source, const ExplainOptions& options,
                std::ostream& out) {
  Session session(source, {"train", "embeddings", SplitKey(options.split)});
  SpanModel& model = session.LoadModel();
  const Corpus corpus = LoadCorpus(session.config, options.split);
  const Sentence* sentence = corpus.FindById(options.sentence);
  if (sentence == nullptr) {
    throw Error(ErrorCode::kSpanOutOfRange,
                "no sentence " + std::to_string(options.sentence) + " in " +
                    SplitKey(options.split));
  }
  Predictor predictor(model, session.train,
                      session.config.train.support_sentences);
  out << RenderExplanation(
      predictor.Explain(*sentence, {options.start, options.end}, options.top_k),
      model.labels());
}

void RunAblate(const ConfigSource& source, const std::vector<double>& fractions,
               std::ostream& out) {
  Session session(source, {"train", "dev", "embeddings"});
  const RunConfig& config = session.config;
  const std::vector<AblationRow> rows =
      SizeAblation(config.encoder, config.train, session.train,
                   LoadCorpus(config, Split::kDev), session.words, fractions);
  out << FormatAblation(rows);
  OpenOutput(config.output_dir / "ablation.jsonl") << AblationToJsonLines(rows);
  OpenOutput(config.output_dir / "config.ini") << EchoConfig(config);
}

void RunCompare(const ConfigSource& source, int runs, std::ostream& out) {
  if (runs < 1) throw Error(ErrorCode::kConfigError, "runs: must be >= 1");
  Session session(source, {"train", "dev", "test", "embeddings"});
  const RunConfig& config = session.config;
  const std::vector<HeadComparison> rows = CompareHeads(
      config.encoder, config.train, session.train,
      LoadCorpus(config, Split::kDev), LoadCorpus(config, Split::kTest),
      session.words, runs);
  out << FormatComparison(rows);
  OpenOutput(config.output_dir / "comparison.jsonl")
      << ComparisonToJsonLines(rows);
  OpenOutput(config.output_dir / "config.ini") << EchoConfig(config);
}

void RunDumpFeatures(const ConfigSource& source, const DumpOptions& options,
                     std::ostream& out) {
  Session session(source, {"train", "embeddings", SplitKey(options.split)});
  SpanModel& model = session.LoadModel();
  const Corpus corpus = LoadCorpus(session.config, options.split);
  if (options.output.empty()) {
    DumpFeatures(out, corpus, model);
  } else {
    std::ofstream file = OpenOutput(options.output);
    DumpFeatures(file, corpus, model);
  }
}

void RunGenSynthetic(const SyntheticCommandOptions& options, std::ostream& out) {
  if (options.output_dir.empty()) {
    throw Error(ErrorCode::kConfigError, "out: output directory required");
  }
  const SyntheticDataset data = GenerateSynthetic(
      {.train_sentences = options.train,
       .dev_sentences = options.dev,
       .test_sentences = options.test,
       .word_dim = options.word_dim,
       .seed = options.seed,
       .nested = options.nested,
       .oov_rate = options.oov_rate});
  WriteSynthetic(options.output_dir, data, options.nested);

  const std::filesystem::path dir = std::filesystem::absolute(options.output_dir);
  const char* extension = options.nested ? ".jsonl" : ".txt";
  RunConfig config;
  config.task = options.nested ? Task::kNestedNer : Task::kFlatNer;
  config.train_path = dir / (std::string("train") + extension);
  config.dev_path = dir / (std::string("dev") + extension);
  config.test_path = dir / (std::string("test") + extension);
  config.embeddings_path = dir / "embeddings.txt";
  config.encoder.word_dim = options.word_dim;
  config.output_dir = dir / "run";
  OpenOutput(dir / "config.ini") << EchoConfig(config);
  out << "wrote " << data.train.sentences.size() << "/"
      << data.dev.sentences.size() << "/" << data.test.sentences.size()
      << " sentences and " << data.embeddings.words().size()
      << " embeddings to " << dir.string() << '\n';
}

}  // namespace ibspan::cli
