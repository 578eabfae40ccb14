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

#include "ibspan/synthetic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ibspan/error.h"

namespace ibspan {
namespace {

// A filled slot: tokens plus spans relative to the slot (1-based).
struct Piece {
  std::vector<std::string> tokens;
  std::vector<LabeledSpan> spans;
};

using SlotFn = std::function<Piece(std::mt19937_64&)>;

std::vector<std::string> Words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

template <typename T>
const T& Choose(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
  return items[pick(rng)];
}

Piece Entity(const std::string& text, const std::string& label) {
  Piece p{Words(text), {}};
  p.spans.push_back({{1, static_cast<int>(p.tokens.size())}, label});
  return p;
}

// Concatenates pieces and wraps the whole in `label` when non-empty.
Piece Compose(std::vector<Piece> parts, const std::string& label) {
  Piece out;
  for (Piece& part : parts) {
    const int offset = static_cast<int>(out.tokens.size());
    for (LabeledSpan s : part.spans) {
      s.span.start += offset;
      s.span.end += offset;
      out.spans.push_back(s);
    }
    out.tokens.insert(out.tokens.end(), part.tokens.begin(), part.tokens.end());
  }
  if (!label.empty()) {
    out.spans.push_back({{1, static_cast<int>(out.tokens.size())}, label});
  }
  return out;
}

struct Grammar {
  std::vector<std::string> templates;
  std::map<std::string, SlotFn> slots;
  // Word -> entity types it appears under (for embedding centroids).
  std::map<std::string, std::set<std::string>> typed_words;
  bool capitalize_first = false;
};

void AddTyped(Grammar& g, const std::vector<std::string>& phrases,
              const std::string& type) {
  for (const std::string& phrase : phrases) {
    for (const std::string& w : Words(phrase)) g.typed_words[w].insert(type);
  }
}

Grammar FlatGrammar() {
  Grammar g;
  g.capitalize_first = true;
  static const std::vector<std::string> first = {
      "John",   "Mary",    "Peter",   "Anna",    "David",   "Laura",
      "Michael", "Sarah",  "James",   "Emma",    "Robert",  "Julia",
      "Thomas", "Olga",    "Carlos",  "Ingrid",  "Ahmed",   "Yuki",
      "Pierre", "Sofia",   "Ivan",    "Fatima",  "Lars",    "Chen",
      "Marco",  "Aisha",   "Pablo",   "Elena",   "Kenji",   "Nadia",
      "Oscar",  "Greta",   "Rahul",   "Hana",    "Victor",  "Lucia"};
  static const std::vector<std::string> last = {
      "Smith",   "Kowalski", "Tanaka",   "Jordan",  "Washington", "Moreau",
      "Schmidt", "Rossi",    "Novak",    "Haddad",  "Lindqvist",  "Okafor",
      "Brennan", "Costa",    "Dubois",   "Petrov",  "Fischer",    "Sato",
      "Garcia",  "Nielsen",  "Mensah",   "Ivanova", "Kaplan",     "Moretti",
      "Larsen",  "Yilmaz",   "Horvath",  "Silva",   "Nakamura",   "Berg",
      "Kumar",   "Lopez",    "Weber",    "Ferrari", "Popescu",    "Quinn"};
  static const std::vector<std::string> locations = {
      "Paris",     "Berlin",       "Tokyo",     "Jordan",    "Washington",
      "Cairo",     "Lima",         "Oslo",      "New York",  "San Diego",
      "Hong Kong", "Nairobi",      "Madrid",    "Quebec",    "Kyoto",
      "Vienna",    "Buenos Aires", "Dublin",    "Seoul",     "Prague",
      "Lagos",     "Lisbon",       "Helsinki",  "Manila",    "Santiago",
      "Cape Town", "Mumbai",       "Athens",    "Warsaw",    "Bogota",
      "Ankara",    "Hanoi",        "Zurich",    "Montreal",  "Tel Aviv",
      "Rio de Janeiro", "Brussels", "Stockholm", "Karachi",  "Denver"};
  static const std::vector<std::string> orgs = {
      "Acme Corp",          "Globex",             "Initech",
      "United Steel Group", "Northwind Bank",     "Washington Post",
      "Apex Labs",          "Blue Ridge Energy",  "Vertex Holdings",
      "Orion Airlines",     "Helix Pharma",       "Summit Capital",
      "Red Cross",          "Nova Motors",        "Delta Mining Company",
      "Jordan Telecom",     "Pacific Rail",       "Silverline Media",
      "Granite Insurance",  "Meridian Foods",     "Atlas Shipping",
      "Crescent Bank",      "Polar Software",     "Harbor Logistics",
      "Quantum Devices",    "Evergreen Trust",    "Falcon Aerospace",
      "Lotus Textiles",     "Ironwood Partners",  "Beacon Health"};
  g.slots["PER"] = [](std::mt19937_64& rng) {
    std::bernoulli_distribution full(0.7);
    const std::string name =
        full(rng) ? Choose(first, rng) + " " + Choose(last, rng)
                  : Choose(last, rng);
    return Entity(name, "PER");
  };
  g.slots["LOC"] = [](std::mt19937_64& rng) {
    return Entity(Choose(locations, rng), "LOC");
  };
  g.slots["ORG"] = [](std::mt19937_64& rng) {
    return Entity(Choose(orgs, rng), "ORG");
  };
  AddTyped(g, first, "PER");
  AddTyped(g, last, "PER");
  AddTyped(g, locations, "LOC");
  AddTyped(g, orgs, "ORG");
  g.templates = {
      "{PER} visited {LOC} on Monday .",
      "{ORG} opened a new office in {LOC} .",
      "{PER} joined {ORG} last year .",
      "officials in {LOC} said {PER} would resign .",
      "shares of {ORG} fell sharply on Friday .",
      "{PER} , a spokesman for {ORG} , declined to comment .",
      "the weather in {LOC} was mild this week .",
      "{PER} met {PER} in {LOC} .",
      "the market closed higher after a quiet session .",
      "{ORG} and {ORG} agreed to merge .",
      "police in {LOC} arrested two men .",
      "{PER} scored twice as {ORG} beat rivals from {LOC} .",
      "analysts expect {ORG} to report strong profits .",
      "{PER} said the talks were constructive .",
      "prices rose in {LOC} and {LOC} .",
      "a court in {LOC} fined {ORG} on Tuesday .",
      "{PER} flew from {LOC} to {LOC} .",
      "{ORG} named {PER} as its new chief executive .",
      "fans cheered as {PER} arrived .",
      "the talks between {ORG} and {ORG} collapsed .",
      "according to {PER} , the deal with {ORG} is final .",
      "nobody expected the result .",
      "{LOC} will host the summit next year .",
  };
  return g;
}

Grammar NestedGrammar() {
  Grammar g;
  static const std::vector<std::string> proteins = {
      "IL-2",  "NF-kappa B", "p53",   "TNF alpha", "GATA-1", "c-Jun",
      "CD4",   "STAT3",      "Oct-2", "IL-4",      "c-Fos",  "CD28",
      "PU.1",  "Tax",        "IRF-1", "AP-1"};
  static const std::vector<std::string> cells = {
      "T cells",   "B cells",        "monocytes",  "macrophages",
      "erythroid cells", "lymphocytes", "neutrophils", "thymocytes",
      "NK cells",  "myeloid cells"};
  static const std::vector<std::string> dna_heads = {"gene", "promoter",
                                                     "enhancer"};
  static const std::vector<std::string> plain_dna = {
      "kappa B site", "long terminal repeat", "TATA box", "GC box"};
  g.slots["PROT"] = [](std::mt19937_64& rng) {
    return Entity(Choose(proteins, rng), "protein");
  };
  g.slots["CELL"] = [](std::mt19937_64& rng) {
    return Entity(Choose(cells, rng), "cell_type");
  };
  g.slots["DNA"] = [](std::mt19937_64& rng) {
    std::bernoulli_distribution nested(0.75);
    if (nested(rng)) {
      return Compose({Entity(Choose(proteins, rng), "protein"),
                      Piece{{Choose(dna_heads, rng)}, {}}},
                     "DNA");
    }
    return Entity(Choose(plain_dna, rng), "DNA");
  };
  g.slots["POSCELL"] = [](std::mt19937_64& rng) {
    return Compose({Entity(Choose(proteins, rng), "protein"),
                    Piece{{"-", "positive"}, {}},
                    Entity(Choose(cells, rng), "cell_type")},
                   "cell_type");
  };
  AddTyped(g, proteins, "protein");
  AddTyped(g, cells, "cell_type");
  AddTyped(g, plain_dna, "DNA");
  AddTyped(g, dna_heads, "DNA");
  g.templates = {
      "expression of the {DNA} in {CELL} was induced .",
      "{PROT} activates the {DNA} .",
      "{POSCELL} were isolated from blood .",
      "binding of {PROT} to the {DNA} requires {PROT} .",
      "we studied {CELL} and {POSCELL} .",
      "{PROT} is expressed in {CELL} .",
      "the {DNA} is regulated by {PROT} in {POSCELL} .",
      "these results were confirmed in vitro .",
      "{PROT} and {PROT} form a complex .",
      "mutation of the {DNA} abolished activity .",
  };
  return g;
}

Sentence GenerateSentence(const Grammar& g, std::mt19937_64& rng, int id) {
  Sentence sentence;
  sentence.id = id;
  for (const std::string& item : Words(Choose(g.templates, rng))) {
    if (item.size() > 2 && item.front() == '{' && item.back() == '}') {
      Piece piece = g.slots.at(item.substr(1, item.size() - 2))(rng);
      const int offset = sentence.size();
      for (LabeledSpan s : piece.spans) {
        s.span.start += offset;
        s.span.end += offset;
        sentence.gold_spans.push_back(s);
      }
      sentence.tokens.insert(sentence.tokens.end(), piece.tokens.begin(),
                             piece.tokens.end());
    } else {
      std::string word = item;
      if (g.capitalize_first && sentence.tokens.empty()) {
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      }
      sentence.tokens.push_back(word);
    }
  }
  std::sort(sentence.gold_spans.begin(), sentence.gold_spans.end());
  return sentence;
}

Corpus GenerateCorpus(const Grammar& g, int count, Split split,
                      std::mt19937_64& rng) {
  Corpus corpus;
  corpus.split = split;
  for (int i = 0; i < count; ++i) {
    corpus.sentences.push_back(GenerateSentence(g, rng, i));
  }
  return corpus;
}

EmbeddingTable BuildEmbeddings(const Grammar& g,
                               const std::vector<const Corpus*>& corpora,
                               const SyntheticOptions& options,
                               std::mt19937_64& rng) {
  const int dim = options.word_dim;
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(dim));
  std::map<std::string, std::vector<double>> centroids;
  for (const auto& [word, types] : g.typed_words) {
    for (const std::string& type : types) {
      if (!centroids.contains(type)) {
        std::vector<double> c(dim);
        for (double& v : c) v = normal(rng);
        centroids[type] = c;
      }
    }
  }
  std::set<std::string> vocab;
  for (const Corpus* corpus : corpora) {
    for (const Sentence& s : corpus->sentences) {
      for (const std::string& t : s.tokens) vocab.insert(t);
    }
  }
  EmbeddingTable table(dim);
  std::bernoulli_distribution drop(options.oov_rate);
  std::vector<double> v(dim);
  for (const std::string& word : vocab) {
    for (double& x : v) x = normal(rng);
    auto typed = g.typed_words.find(word);
    if (typed != g.typed_words.end()) {
      // Entity words share a per-type direction, like pretrained vectors
      // clustering by semantic class.
      for (const std::string& type : typed->second) {
        const std::vector<double>& c = centroids[type];
        for (int k = 0; k < dim; ++k) {
          v[k] = 0.6 * v[k] + c[k] / typed->second.size();
        }
      }
    }
    if (drop(rng)) continue;
    table.Insert(word, v);
  }
  return table;
}

}  // namespace

SyntheticDataset GenerateSynthetic(const SyntheticOptions& options) {
  if (options.train_sentences < 1 || options.dev_sentences < 0 ||
      options.test_sentences < 0 || options.word_dim < 1) {
    throw Error(ErrorCode::kConfigError, "invalid synthetic corpus sizes");
  }
  const Grammar grammar = options.nested ? NestedGrammar() : FlatGrammar();
  std::mt19937_64 rng(options.seed);
  SyntheticDataset data;
  data.train = GenerateCorpus(grammar, options.train_sentences, Split::kTrain, rng);
  data.dev = GenerateCorpus(grammar, options.dev_sentences, Split::kDev, rng);
  data.test = GenerateCorpus(grammar, options.test_sentences, Split::kTest, rng);
  data.embeddings = BuildEmbeddings(
      grammar, {&data.train, &data.dev, &data.test}, options, rng);
  return data;
}

void WriteSynthetic(const std::filesystem::path& dir,
                    const SyntheticDataset& dataset, bool nested) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return out;
  };
  const char* extension = nested ? ".jsonl" : ".txt";
  const std::pair<const char*, const Corpus*> splits[] = {
      {"train", &dataset.train}, {"dev", &dataset.dev}, {"test", &dataset.test}};
  for (const auto& [name, corpus] : splits) {
    std::ofstream out = open(std::string(name) + extension);
    if (nested) {
      WriteNested(out, *corpus);
    } else {
      WriteBio(out, *corpus);
    }
  }
  std::ofstream emb = open("embeddings.txt");
  WriteEmbeddings(emb, dataset.embeddings);
}

}  // namespace ibspan
