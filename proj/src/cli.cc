// Copyright 2026 The Pragref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pragref/cli.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "pragref/error.h"
#include "pragref/listener.h"
#include "pragref/metrics.h"
#include "pragref/rsa.h"
#include "pragref/speaker.h"
#include "pragref/synth.h"

namespace pragref {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<ContextTrial> PreparedCorpus::Select(Split which) const {
  return SelectSplit(trials, split, which);
}

PreparedCorpus PrepareCorpus(std::vector<ContextTrial> raw, std::uint64_t seed,
                             const FilterOptions& options) {
  PreparedCorpus out;
  FilterResult filtered = FilterTrials(std::move(raw), options);
  out.trials = std::move(filtered.trials);
  out.filter = filtered.report;
  out.split = SplitByDyad(out.trials, SplitFractions{}, seed);
  return out;
}

namespace {

constexpr Split kSplits[] = {Split::kTrain, Split::kDev, Split::kTest};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

Vocabulary BuildVocab(const std::vector<ContextTrial>& trials,
                      TokenizeMode mode) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(trials.size());
  for (const ContextTrial& t : trials) {
    seqs.push_back(Preprocess(t.speaker_text, mode));
  }
  return Vocabulary::Build(seqs);
}

}  // namespace

void WritePrepared(const fs::path& dir, const PreparedCorpus& c) {
  fs::create_directories(dir);
  WriteJsonLines(dir / "trials.jsonl", c.trials);
  WriteText(dir / "split.json", c.split.ToJson().dump(2) + "\n");
  json sizes = json::object();
  for (Split s : kSplits) {
    const auto part = c.Select(s);
    WriteJsonLines(dir / fmt::format("{}.jsonl", SplitName(s)), part);
    sizes[std::string(SplitName(s))] = part.size();
  }
  const auto train = c.Select(Split::kTrain);
  WriteText(dir / "vocab_listener.json",
            BuildVocab(train, TokenizeMode::kListener).ToJson().dump() + "\n");
  WriteText(dir / "vocab_speaker.json",
            BuildVocab(train, TokenizeMode::kSpeaker).ToJson().dump() + "\n");
  const json stats = {{"trials", c.trials.size()},
                      {"rejected", c.rejected},
                      {"splits", sizes},
                      {"filter", c.filter.ToJson()}};
  WriteText(dir / "stats.json", stats.dump(2) + "\n");
}

PreparedCorpus LoadCorpus(const fs::path& path, std::uint64_t seed) {
  if (!fs::exists(path)) throw IoError("corpus not found: " + path.string());
  if (fs::is_directory(path)) {
    PreparedCorpus out;
    LoadResult loaded = LoadRaw(path / "trials.jsonl");
    out.trials = std::move(loaded.trials);
    out.rejected = static_cast<int>(loaded.rejects.size());
    out.split = SplitSpec::FromJson(ReadJson(path / "split.json"));
    return out;
  }
  LoadResult loaded = LoadRaw(path);
  PreparedCorpus out = PrepareCorpus(std::move(loaded.trials), seed);
  out.rejected = static_cast<int>(loaded.rejects.size());
  return out;
}

std::optional<fs::path> ResolveCorpusPath(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv(kDataEnvVar); env && *env) {
    return fs::path(env);
  }
  return std::nullopt;
}

namespace {

fs::path RequireCorpus(const std::string& flag) {
  auto path = ResolveCorpusPath(flag);
  if (!path) {
    throw UsageError(fmt::format("no corpus: pass --corpus or set {}",
                                 kDataEnvVar));
  }
  return *path;
}

// Writes `text` to `path`, or to `out` when `path` is empty.
void Emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    WriteText(path, text);
  }
}

// Writes prefix.csv and prefix.json, or prints the CSV when no prefix.
void EmitTable(std::ostream& out, const std::string& prefix,
               const std::string& csv, const json& j) {
  if (prefix.empty()) {
    out << csv;
    return;
  }
  const fs::path p(prefix);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  WriteText(prefix + ".csv", csv);
  WriteText(prefix + ".json", j.dump(2) + "\n");
}

struct Common {
  std::string corpus;
  std::uint64_t seed = 1;
  std::string checkpoint_dir = "checkpoints";
  std::string out;
};

struct NeuralFlags {
  PragmaticsConfig pragmatics;
};

void AddCorpusFlag(CLI::App* app, Common& c) {
  app->add_option("--corpus", c.corpus,
                  "Prepared corpus directory or JSON-lines file "
                  "(default: $PRAGREF_DATA)");
}

void AddPragmaticsFlags(CLI::App* app, PragmaticsConfig& p) {
  app->add_option("--alpha-neural", p.alpha, "Speaker rationality of S1");
  app->add_option("--m", p.m, "Speaker samples per target");
  app->add_option("--n", p.n, "Alternative sets averaged");
  app->add_option("--beta-a", p.beta_a, "Weight of L2 against L0 in La");
  app->add_option("--beta-b", p.beta_b, "Weight of L0 against L1 in Lb");
  app->add_option("--gamma", p.gamma, "Weight of La against Lb in Le");
}

// ---------------------------------------------------------------- prepare

struct PrepareFlags {
  Common common;
  int synthetic = 0;
  FilterOptions filter;
};

void RunPrepare(const PrepareFlags& f, std::ostream& out) {
  if (f.common.out.empty()) throw UsageError("prepare needs --out");
  PreparedCorpus c;
  if (f.synthetic > 0) {
    Rng rng(f.common.seed);
    c = PrepareCorpus(SynthCorpus(f.synthetic, rng), f.common.seed, f.filter);
  } else {
    LoadResult loaded = LoadRaw(RequireCorpus(f.common.corpus));
    c = PrepareCorpus(std::move(loaded.trials), f.common.seed, f.filter);
    c.rejected = static_cast<int>(loaded.rejects.size());
  }
  WritePrepared(f.common.out, c);
  out << fmt::format("trials {} rejected {}", c.trials.size(), c.rejected);
  for (Split s : kSplits) {
    out << fmt::format(" {} {}", SplitName(s), c.Select(s).size());
  }
  out << "\n";
}

// ------------------------------------------------------------------ synth

struct SynthFlags {
  Common common;
  int n = 3000;
};

void RunSynth(const SynthFlags& f, std::ostream& out) {
  Rng rng(f.common.seed);
  const auto trials = SynthCorpus(f.n, rng);
  if (f.common.out.empty()) {
    for (const ContextTrial& t : trials) out << TrialToJson(t).dump() << "\n";
  } else {
    WriteJsonLines(f.common.out, trials);
  }
}

// ------------------------------------------------------------------ train

struct TrainFlags {
  Common common;
  std::string model = "l0";
  int epochs = 10;
  int batch_size = 32;
  std::string optimizer;
  double learning_rate = 0.0;
  int embedding_dim = nn::kDefaultEmbeddingDim;
  int hidden_dim = nn::kDefaultHiddenDim;
  bool resume = false;
};

void RunTrain(const TrainFlags& f, std::ostream& out) {
  const PreparedCorpus corpus =
      LoadCorpus(RequireCorpus(f.common.corpus), f.common.seed);
  const auto train = corpus.Select(Split::kTrain);
  const auto dev = corpus.Select(Split::kDev);
  const fs::path dir = f.common.checkpoint_dir;
  fs::create_directories(dir);

  TrainConfig config;
  config.epochs = f.epochs;
  config.batch_size = f.batch_size;
  config.optimizer = f.optimizer;
  config.learning_rate = f.learning_rate;
  config.seed = f.common.seed;
  Rng rng(f.common.seed);
  const json meta = {{"seed", f.common.seed}, {"train_trials", train.size()}};
  json log;

  if (f.model == "l0") {
    const fs::path ckpt = dir / kListenerCheckpoint;
    std::unique_ptr<ListenerModel> model;
    if (f.resume) {
      model = LoadListener(ckpt);
    } else {
      model = std::make_unique<ListenerModel>(
          BuildVocab(train, TokenizeMode::kListener),
          ListenerConfig{f.embedding_dim, f.hidden_dim});
      model->Initialize(rng);
    }
    double best = -1.0;
    // The best-so-far weights are on disk after every epoch, so an abort
    // leaves the last good checkpoint behind.
    config.on_epoch = [&](const EpochStats& e) {
      out << fmt::format("epoch {} loss {:.4f} dev_acc {:.4f} dev_ppl {:.4f}\n",
                         e.epoch, e.train_loss, e.dev_accuracy,
                         e.dev_perplexity);
      if (e.dev_accuracy > best) {
        best = e.dev_accuracy;
        SaveListener(ckpt, *model, meta);
      }
    };
    const TrainReport report = TrainListener(*model, train, dev, config);
    SaveListener(ckpt, *model, meta);
    log = report.ToJson();
  } else if (f.model == "s0") {
    const fs::path ckpt = dir / kSpeakerCheckpoint;
    std::unique_ptr<SpeakerModel> model;
    if (f.resume) {
      model = LoadSpeaker(ckpt);
    } else {
      model = std::make_unique<SpeakerModel>(
          BuildVocab(train, TokenizeMode::kSpeaker),
          SpeakerConfig{f.embedding_dim, f.hidden_dim});
      model->Initialize(rng);
    }
    double best = INFINITY;
    config.on_epoch = [&](const EpochStats& e) {
      out << fmt::format("epoch {} loss {:.4f} dev_ppl {:.4f}\n", e.epoch,
                         e.train_loss, e.dev_perplexity);
      if (e.dev_perplexity < best) {
        best = e.dev_perplexity;
        SaveSpeaker(ckpt, *model, meta);
      }
    };
    const TrainReport report = TrainSpeaker(*model, train, dev, config);
    SaveSpeaker(ckpt, *model, meta);
    log = report.ToJson();
  } else {
    throw UsageError("--model must be l0 or s0");
  }
  log["model"] = f.model;
  WriteText(dir / (f.model + "_log.json"), log.dump(2) + "\n");
}

// ------------------------------------------------------------------- eval

struct EvalFlags {
  Common common;
  std::string agent = "l0";
  std::string split = "dev";
  std::string dump;
  PragmaticsConfig pragmatics;
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string AgentKey(std::string name) {
  for (char& c : name) c = static_cast<char>(std::tolower(c));
  return name;
}

void RunEval(const EvalFlags& f, std::ostream& out) {
  const PreparedCorpus corpus =
      LoadCorpus(RequireCorpus(f.common.corpus), f.common.seed);
  const auto trials = corpus.Select(ParseSplit(f.split));

  std::vector<std::string> agents;
  for (const std::string& a : SplitList(f.agent)) {
    if (a == "all") {
      for (const char* n : kListenerNames) agents.push_back(AgentKey(n));
    } else {
      agents.push_back(AgentKey(a));
    }
  }
  if (agents.empty()) throw UsageError("--agent is empty");

  if (agents.size() == 1 && agents[0] == "human") {
    const HumanAccuracy h = ComputeHumanAccuracy(trials);
    std::string csv = "condition,count,correct,accuracy\n";
    csv += fmt::format("all,{},{},{:.6f}\n", h.overall.count, h.overall.correct,
                       h.overall.accuracy());
    for (const auto& [c, b] : h.by_condition) {
      csv += fmt::format("{},{},{},{:.6f}\n", ConditionName(c), b.count,
                         b.correct, b.accuracy());
    }
    EmitTable(out, f.common.out, csv, h.ToJson());
    return;
  }

  bool neural = false, pragmatic = false;
  for (const std::string& a : agents) {
    if (a == "uniform") continue;
    bool known = false;
    for (const char* n : kListenerNames) known |= AgentKey(n) == a;
    if (!known) throw UsageError("unknown agent '" + a + "'");
    neural = true;
    pragmatic |= a != "l0";
  }
  f.pragmatics.Validate();

  const fs::path dir = f.common.checkpoint_dir;
  std::unique_ptr<ListenerModel> listener;
  std::unique_ptr<SpeakerModel> speaker;
  std::unique_ptr<PragmaticReasoner> reasoner;
  if (neural) listener = LoadListener(dir / kListenerCheckpoint);
  if (pragmatic) {
    speaker = LoadSpeaker(dir / kSpeakerCheckpoint);
    reasoner = std::make_unique<PragmaticReasoner>(*listener, *speaker,
                                                   f.pragmatics);
  }

  std::map<std::string, EvalAccumulator> acc;
  std::string dump = "index,game_id,round,condition,target,agent,p0,p1,p2\n";
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const ContextTrial& t = trials[i];
    std::optional<PragmaticDistributions> pd;
    if (pragmatic) {
      Rng rng = TrialRng(f.common.seed, i);
      pd = reasoner->Evaluate(t, rng);
    }
    for (const std::string& a : agents) {
      ListenerDistribution p;
      if (a == "uniform") {
        p.fill(1.0 / kContextSize);
      } else if (pd) {
        for (const char* n : kListenerNames) {
          if (AgentKey(n) == a) p = pd->Get(n);
        }
      } else {
        p = listener->Distribution(
            Preprocess(t.speaker_text, TokenizeMode::kListener), t.colors);
      }
      acc[a].Add(t, p);
      if (!f.dump.empty()) {
        dump += fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", i,
                            t.game_id, t.round, ConditionName(t.condition),
                            t.target_index, a, p[0], p[1], p[2]);
      }
    }
  }

  std::string csv = "agent,condition,count,accuracy,perplexity\n";
  json j = json::object();
  for (const std::string& a : agents) {
    const EvalReport r = acc[a].Report();
    std::stringstream rows(r.ToCsv());
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) csv += a + "," + line + "\n";
    j[a] = r.ToJson();
  }
  j["split"] = f.split;
  j["pragmatics"] = f.pragmatics.ToJson();
  EmitTable(out, f.common.out, csv, j);
  if (!f.dump.empty()) WriteText(f.dump, dump);
}

// --------------------------------------------------------------- rsa-demo

struct RsaDemoFlags {
  Common common;
  std::string lexicon;
  double alpha = 1.0;
  std::vector<double> kappa;
};

std::string Percent(const json& cell) {
  if (cell.is_null()) return "-";
  const double p = cell["p"].get<double>();
  if (p > 0.0 && p < 0.005) return "<1";
  return std::to_string(std::lround(100.0 * p));
}

void RunRsaDemo(const RsaDemoFlags& f, std::ostream& out) {
  const fs::path path = f.lexicon.empty()
                            ? DefaultDataDir() / "fig2_lexicon.json"
                            : fs::path(f.lexicon);
  Lexicon lex = Lexicon::Load(path);
  if (!f.kappa.empty()) {
    if (static_cast<int>(f.kappa.size()) != lex.num_utterances()) {
      throw UsageError(fmt::format("--kappa needs {} costs",
                                   lex.num_utterances()));
    }
    lex.costs = f.kappa;
  }
  lex.Validate();
  const json report = ExactRsaReport(lex, f.alpha);

  auto listener = [&](const char* name, const char* title) {
    out << title << "\n" << fmt::format("{:>12}", "");
    for (const auto& r : lex.referents) out << fmt::format(" {:>8}", r);
    out << "\n";
    for (const auto& u : lex.utterances) {
      const json& row = report[name][u];
      out << fmt::format("{:>12}", u);
      if (row.is_null()) {
        out << "  vacuous\n";
        continue;
      }
      for (const json& cell : row) out << fmt::format(" {:>8}", Percent(cell));
      out << "\n";
    }
    out << "\n";
  };
  auto speaker = [&](const char* name, const char* title) {
    out << title << "\n" << fmt::format("{:>12}", "");
    for (const auto& u : lex.utterances) out << fmt::format(" {:>8}", u);
    out << "\n";
    for (const auto& r : lex.referents) {
      const json& row = report[name][r];
      out << fmt::format("{:>12}", r);
      if (row.is_null()) {
        out << "  vacuous\n";
        continue;
      }
      for (const auto& u : lex.utterances) {
        out << fmt::format(" {:>8}", Percent(row[u]));
      }
      out << "\n";
    }
    out << "\n";
  };
  out << fmt::format("alpha {} exact {}\n\n", f.alpha,
                     report["exact_arithmetic"].get<bool>());
  listener("l0", "literal listener l0(t | u) %");
  speaker("s1", "pragmatic speaker s1(u | t) %");
  listener("l2", "pragmatic listener l2(t | u) %");
  speaker("s0", "literal speaker s0(u | t) %");
  listener("l1", "listener l1(t | u) over s0 %");
  if (!f.common.out.empty()) WriteText(f.common.out, report.dump(2) + "\n");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeFlags {
  Common common;
  int contexts = 1000;
  PragmaticsConfig pragmatics;
};

void RunAnalyze(const AnalyzeFlags& f, std::ostream& out) {
  const ColorTermDepths& depths = ColorTermDepths::Bundled();
  std::string csv;
  json j = json::object();
  bool header = true;
  if (auto path = ResolveCorpusPath(f.common.corpus)) {
    const PreparedCorpus corpus = LoadCorpus(*path, f.common.seed);
    const BehaviorReport human =
        ComputeBehavior(HumanUtterances(corpus.trials), depths);
    csv += human.ToCsv("human", header);
    header = false;
    j["human"] = human.ToJson();
  }
  f.pragmatics.Validate();
  const fs::path dir = f.common.checkpoint_dir;
  const auto listener = LoadListener(dir / kListenerCheckpoint);
  const auto speaker = LoadSpeaker(dir / kSpeakerCheckpoint);
  PragmaticReasoner reasoner(*listener, *speaker, f.pragmatics);
  Rng rng(f.common.seed);
  const auto contexts = SyntheticContexts(f.contexts, rng);
  const SpeakerComparison cmp =
      CompareSpeakers(reasoner, *speaker, contexts, rng, depths);
  csv += cmp.s0.ToCsv("s0", header);
  csv += cmp.s1.ToCsv("s1", false);
  j["s0"] = cmp.s0.ToJson();
  j["s1"] = cmp.s1.ToJson();
  EmitTable(out, f.common.out, csv, j);
}

// ---------------------------------------------------------------- density

struct DensityFlags {
  Common common;
  std::string utterance;
  int h_bins = 90;
  int s_bins = 50;
  int v_bins = 50;
};

void RunDensity(const DensityFlags& f, std::ostream& out) {
  if (f.h_bins < 1 || f.s_bins < 1 || f.v_bins < 1) {
    throw UsageError("bin counts must be positive");
  }
  const auto listener =
      LoadListener(fs::path(f.common.checkpoint_dir) / kListenerCheckpoint);
  const auto tokens = Preprocess(f.utterance, TokenizeMode::kListener);
  if (tokens.empty()) throw EmptyUtterance("utterance has no tokens");
  const nn::Matrix grid = DensityGrid(listener->Quadratic(listener->Encode(tokens)),
                                      f.h_bins, f.s_bins, f.v_bins);
  std::string csv = "h,s,log_density\n";
  for (int i = 0; i < f.h_bins; ++i) {
    for (int j = 0; j < f.s_bins; ++j) {
      const HsvColor c = GridPoint(i, j, 0, f.h_bins, f.s_bins, f.v_bins);
      csv += fmt::format("{:.4f},{:.4f},{:.6f}\n", c.h, c.s, grid(i, j));
    }
  }
  Emit(out, f.common.out, csv);
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app("Pragmatic reference-game agents for color descriptions",
               "pragref");
  app.set_config("--config", "", "Config file (TOML/INI); flags override it");
  app.require_subcommand(1);

  PrepareFlags prepare;
  auto* p = app.add_subcommand("prepare", "Filter, split and index a corpus");
  AddCorpusFlag(p, prepare.common);
  p->add_option("--out", prepare.common.out, "Output directory")->required();
  p->add_option("--seed", prepare.common.seed, "Split seed");
  p->add_option("--synthetic", prepare.synthetic,
                "Generate this many synthetic trials instead of reading a corpus");
  p->add_option("--sigma", prepare.filter.sigma_mult,
                "Drop messages longer than mean + sigma * sd words");
  p->add_option("--required-rounds", prepare.filter.required_rounds,
                "Drop games with fewer rounds (0 keeps all)");

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic template corpus");
  s->add_option("--n", synth.n, "Number of trials");
  s->add_option("--seed", synth.common.seed, "Generator seed");
  s->add_option("--out", synth.common.out, "JSON-lines output (default stdout)");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Train the literal listener or speaker");
  AddCorpusFlag(t, train.common);
  t->add_option("--model", train.model, "l0 or s0")
      ->check(CLI::IsMember({"l0", "s0"}));
  t->add_option("--seed", train.common.seed, "Initialization and shuffling seed");
  t->add_option("--checkpoint-dir", train.common.checkpoint_dir, "Checkpoints");
  t->add_option("--epochs", train.epochs, "Training epochs");
  t->add_option("--batch-size", train.batch_size, "Minibatch size");
  t->add_option("--optimizer", train.optimizer, "adadelta or adam");
  t->add_option("--lr", train.learning_rate, "Learning rate (0: default)");
  t->add_option("--embedding-dim", train.embedding_dim, "Embedding size");
  t->add_option("--hidden-dim", train.hidden_dim, "LSTM size");
  t->add_flag("--resume", train.resume, "Continue from the saved weights");

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Evaluate listener agents on a split");
  AddCorpusFlag(e, eval.common);
  e->add_option("--agent", eval.agent,
                "Comma list of uniform, human, l0, l1, l2, la, lb, le, all");
  e->add_option("--split", eval.split, "train, dev or test");
  e->add_option("--seed", eval.common.seed, "Sampling seed");
  e->add_option("--checkpoint-dir", eval.common.checkpoint_dir, "Checkpoints");
  e->add_option("--out", eval.common.out, "Output prefix for .csv and .json");
  e->add_option("--dump", eval.dump, "Per-trial probability CSV");
  AddPragmaticsFlags(e, eval.pragmatics);

  RsaDemoFlags rsa;
  auto* r = app.add_subcommand("rsa-demo", "Exact RSA tables for a lexicon");
  r->add_option("--lexicon", rsa.lexicon, "Lexicon JSON (default: bundled)");
  r->add_option("--alpha", rsa.alpha, "Speaker rationality");
  r->add_option("--kappa", rsa.kappa, "Per-utterance costs")->delimiter(',');
  r->add_option("--out", rsa.common.out, "JSON report");

  AnalyzeFlags analyze;
  auto* a = app.add_subcommand("analyze", "Speaker behavior by condition");
  AddCorpusFlag(a, analyze.common);
  a->add_option("--seed", analyze.common.seed, "Sampling seed");
  a->add_option("--checkpoint-dir", analyze.common.checkpoint_dir, "Checkpoints");
  a->add_option("--contexts", analyze.contexts, "Synthetic contexts per condition");
  a->add_option("--out", analyze.common.out, "Output prefix for .csv and .json");
  AddPragmaticsFlags(a, analyze.pragmatics);

  DensityFlags density;
  auto* d = app.add_subcommand("density", "Listener density over hue and saturation");
  d->add_option("--checkpoint-dir", density.common.checkpoint_dir, "Checkpoints");
  d->add_option("--utterance", density.utterance, "Description")->required();
  d->add_option("--h-bins", density.h_bins, "Hue bins");
  d->add_option("--s-bins", density.s_bins, "Saturation bins");
  d->add_option("--v-bins", density.v_bins, "Value bins (summed out)");
  d->add_option("--out", density.common.out, "CSV output (default stdout)");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        app.exit(e, out, err);
        return 0;
      }
      app.exit(e, out, err);
      return static_cast<int>(ErrorCode::kUsage);
    }
    if (*p) RunPrepare(prepare, out);
    if (*s) RunSynth(synth, out);
    if (*t) RunTrain(train, out);
    if (*e) RunEval(eval, out);
    if (*r) RunRsaDemo(rsa, out);
    if (*a) RunAnalyze(analyze, out);
    if (*d) RunDensity(density, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kIo);
  }
  return 0;
}

}  // namespace pragref
