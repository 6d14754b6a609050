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

#include "pragref/speaker.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pragref/error.h"
#include "pragref/nn/checkpoint.h"
#include "pragref/nn/optimizer.h"

namespace pragref {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nn::Vector;

namespace {

constexpr double kDefaultSpeakerLr = 0.004;

Matrix FeatureColumn(const Color& c) {
  const FourierFeatures f = ComputeFourierFeatures(c);
  return Eigen::Map<const Vector>(f.data(), kNumFourierFeatures);
}

}  // namespace

std::vector<std::string> UtteranceSample::Words(const Vocabulary& vocab) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id != Vocabulary::kEnd) out.push_back(vocab.Token(id));
  }
  return out;
}

SpeakerModel::SpeakerModel(Vocabulary vocab, const SpeakerConfig& config)
    : vocab_(std::move(vocab)),
      config_(config),
      encoder_(store_, "s0.encoder", kNumFourierFeatures, config.hidden_dim),
      embedding_(&store_.Add("s0.embedding", vocab_.size(),
                             config.embedding_dim)),
      decoder_(store_, "s0.decoder", config.hidden_dim + config.embedding_dim,
               config.hidden_dim),
      out_(store_, "s0.out", config.hidden_dim, vocab_.size()) {
  if (config.max_length < 1) throw UsageError("max_length must be positive");
}

void SpeakerModel::Initialize(Rng& rng) {
  encoder_.Initialize(rng);
  nn::InitNormal(*embedding_, 0.01, rng);
  decoder_.Initialize(rng);
  out_.Initialize(rng);
}

std::vector<int> SpeakerModel::Encode(
    const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw EmptyUtterance("speaker utterance has no tokens");
  std::vector<int> ids = vocab_.Encode(tokens);
  ids.push_back(Vocabulary::kEnd);
  return ids;
}

Var SpeakerModel::EncodeContext(Tape& tape, const Context& colors,
                                int target) const {
  if (target < 0 || target >= kContextSize) {
    throw IndexOutOfRange("target index " + std::to_string(target));
  }
  nn::LstmState state = encoder_.ZeroState(tape);
  for (int i = 0; i < kContextSize; ++i) {
    if (i == target) continue;
    state = encoder_.Step(tape, tape.Constant(FeatureColumn(colors[i])), state);
  }
  state = encoder_.Step(tape, tape.Constant(FeatureColumn(colors[target])),
                        state);
  return state.c;
}

Vector SpeakerModel::ContextVector(const Context& colors, int target) const {
  Tape tape;
  return EncodeContext(tape, colors, target).value();
}

Var SpeakerModel::NegLogLikelihood(Tape& tape, const std::vector<int>& ids,
                                   const Context& colors, int target) const {
  if (ids.empty() || ids.back() != Vocabulary::kEnd) {
    throw UsageError("utterance ids must end with the end marker");
  }
  Var ctx = EncodeContext(tape, colors, target);
  nn::LstmState state = decoder_.ZeroState(tape);
  int prev = Vocabulary::kStart;
  Var total;
  for (int id : ids) {
    Var x = nn::ConcatRows(ctx, nn::Lookup(tape, *embedding_, prev));
    state = decoder_.Step(tape, x, state);
    Var nll = nn::SoftmaxCrossEntropy(out_.Apply(tape, state.h), id);
    total = total.tape() == nullptr ? nll : nn::Add(total, nll);
    prev = id;
  }
  return total;
}

double SpeakerModel::LogProb(const std::vector<int>& ids, const Context& colors,
                             int target) const {
  Tape tape;
  return -NegLogLikelihood(tape, ids, colors, target).scalar();
}

Vector SpeakerModel::NextTokenDistribution(const std::vector<int>& prefix,
                                           const Context& colors,
                                           int target) const {
  Tape tape;
  Var ctx = EncodeContext(tape, colors, target);
  nn::LstmState state = decoder_.ZeroState(tape);
  int prev = Vocabulary::kStart;
  std::vector<int> inputs = {prev};
  inputs.insert(inputs.end(), prefix.begin(), prefix.end());
  for (int id : inputs) {
    state = decoder_.Step(
        tape, nn::ConcatRows(ctx, nn::Lookup(tape, *embedding_, id)), state);
  }
  return nn::Softmax(Vector(out_.Apply(tape, state.h).value()));
}

UtteranceSample SpeakerModel::Decode(const Vector& context, Rng* rng,
                                     double temperature) const {
  Tape tape;
  Var ctx = tape.Constant(context);
  nn::LstmState state = decoder_.ZeroState(tape);
  UtteranceSample sample;
  int prev = Vocabulary::kStart;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int step = 0; step < config_.max_length; ++step) {
    state = decoder_.Step(
        tape, nn::ConcatRows(ctx, nn::Lookup(tape, *embedding_, prev)), state);
    const Vector logits = out_.Apply(tape, state.h).value();
    const Vector logp = nn::LogSoftmax(logits);
    int next;
    if (step == config_.max_length - 1) {
      next = Vocabulary::kEnd;
    } else if (rng == nullptr || temperature <= 0.0) {
      Eigen::Index best;
      logits.maxCoeff(&best);
      next = static_cast<int>(best);
    } else {
      const Vector p = nn::Softmax(Vector(logits / temperature));
      const double u = unit(*rng);
      double acc = 0.0;
      next = static_cast<int>(p.size()) - 1;
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        acc += p(k);
        if (u < acc) {
          next = static_cast<int>(k);
          break;
        }
      }
    }
    sample.ids.push_back(next);
    sample.log_prob += logp(next);
    if (next == Vocabulary::kEnd) break;
    prev = next;
  }
  return sample;
}

UtteranceSample SpeakerModel::Sample(const Context& colors, int target,
                                     Rng& rng, double temperature) const {
  return Decode(ContextVector(colors, target), &rng, temperature);
}

UtteranceSample SpeakerModel::Greedy(const Context& colors, int target) const {
  return Decode(ContextVector(colors, target), nullptr, 0.0);
}

std::vector<UtteranceSample> SpeakerModel::SampleMany(const Context& colors,
                                                      int target, Rng& rng,
                                                      int count,
                                                      double temperature) const {
  const Vector ctx = ContextVector(colors, target);
  std::vector<UtteranceSample> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) out.push_back(Decode(ctx, &rng, temperature));
  return out;
}

std::vector<std::string> SpeakerToListenerTokens(
    const std::vector<std::string>& speaker_words) {
  std::vector<std::string> out;
  for (const std::string& w : speaker_words) {
    if (w == "<unk>" || w == "<s>" || w == "</s>") {
      out.push_back(w);
      continue;
    }
    std::vector<std::string> part = Preprocess(w, TokenizeMode::kListener);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<SpeakerExample> MakeSpeakerExamples(
    const SpeakerModel& model, const std::vector<ContextTrial>& trials) {
  std::vector<SpeakerExample> out;
  out.reserve(trials.size());
  for (const ContextTrial& t : trials) {
    out.push_back(
        {model.Encode(Preprocess(t.speaker_text, TokenizeMode::kSpeaker)),
         t.colors, t.target_index});
  }
  return out;
}

double TokenPerplexity(const SpeakerModel& model,
                       const std::vector<SpeakerExample>& data) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const SpeakerExample& ex : data) {
    nll -= model.LogProb(ex.ids, ex.colors, ex.target);
    tokens += ex.ids.size();
  }
  return tokens == 0 ? 0.0 : std::exp(nll / tokens);
}

TrainReport TrainSpeaker(SpeakerModel& model,
                         const std::vector<ContextTrial>& train,
                         const std::vector<ContextTrial>& dev,
                         const TrainConfig& config) {
  const std::vector<SpeakerExample> train_ex = MakeSpeakerExamples(model, train);
  const std::vector<SpeakerExample> dev_ex = MakeSpeakerExamples(model, dev);
  auto opt = nn::MakeOptimizer(
      config.optimizer.empty() ? "adam" : config.optimizer,
      config.learning_rate > 0.0 ? config.learning_rate : kDefaultSpeakerLr);
  nn::ParameterStore& store = model.store();
  Rng rng(config.seed);

  TrainReport report;
  report.best_dev_perplexity =
      dev_ex.empty() ? 0.0 : TokenPerplexity(model, dev_ex);
  std::vector<Matrix> best = store.Snapshot();

  std::vector<std::size_t> order(train_ex.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double total_nll = 0.0;
    std::size_t total_tokens = 0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t end = std::min(order.size(), b + batch);
      std::size_t batch_tokens = 0;
      for (std::size_t i = b; i < end; ++i) {
        batch_tokens += train_ex[order[i]].ids.size();
      }
      store.ZeroGrad();
      for (std::size_t i = b; i < end; ++i) {
        const SpeakerExample& ex = train_ex[order[i]];
        Tape tape;
        Var nll = model.NegLogLikelihood(tape, ex.ids, ex.colors, ex.target);
        total_nll += nll.scalar();
        tape.Backward(nn::Scale(nll, 1.0 / static_cast<double>(batch_tokens)));
      }
      total_tokens += batch_tokens;
      nn::ClipGradientNorm(store, config.clip_norm);
      opt->Step(store);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = total_tokens == 0 ? 0.0 : total_nll / total_tokens;
    stats.dev_perplexity = dev_ex.empty() ? 0.0 : TokenPerplexity(model, dev_ex);
    stats.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    report.epochs.push_back(stats);
    if (config.on_epoch) config.on_epoch(stats);
    if (dev_ex.empty() || stats.dev_perplexity < report.best_dev_perplexity) {
      report.best_epoch = epoch;
      report.best_dev_perplexity = stats.dev_perplexity;
      best = store.Snapshot();
    }
  }
  store.Restore(best);
  return report;
}

void SaveSpeaker(const std::filesystem::path& path, const SpeakerModel& model,
                 const nlohmann::json& extra_meta) {
  nn::Checkpoint ckpt;
  ckpt.meta = extra_meta;
  ckpt.meta["model"] = "speaker";
  ckpt.meta["embedding_dim"] = model.config().embedding_dim;
  ckpt.meta["hidden_dim"] = model.config().hidden_dim;
  ckpt.meta["max_length"] = model.config().max_length;
  ckpt.meta["vocab"] = model.vocab().ToJson();
  nn::AppendParameters(model.store(), ckpt);
  nn::WriteCheckpoint(path, ckpt);
}

std::unique_ptr<SpeakerModel> LoadSpeaker(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::ReadCheckpoint(path);
  if (ckpt.meta.value("model", "") != "speaker") {
    throw CheckpointFormatError(path.string() + " is not a speaker checkpoint");
  }
  SpeakerConfig config;
  try {
    config.embedding_dim = ckpt.meta.at("embedding_dim").get<int>();
    config.hidden_dim = ckpt.meta.at("hidden_dim").get<int>();
    config.max_length = ckpt.meta.at("max_length").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("speaker metadata: ") + e.what());
  }
  auto model = std::make_unique<SpeakerModel>(
      Vocabulary::FromJson(ckpt.meta.at("vocab")), config);
  nn::LoadParameters(ckpt, model->store());
  return model;
}

}  // namespace pragref
