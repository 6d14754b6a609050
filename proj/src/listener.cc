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

#include "pragref/listener.h"

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

constexpr double kDefaultListenerLr = 0.2;
constexpr int kF = kNumFourierFeatures;

Matrix FeatureColumns(const Context& colors) {
  Matrix f(kF, kContextSize);
  for (int k = 0; k < kContextSize; ++k) {
    const FourierFeatures ff = ComputeFourierFeatures(colors[k]);
    for (int d = 0; d < kF; ++d) f(d, k) = ff[d];
  }
  return f;
}

ListenerDistribution ToDistribution(const Vector& scores) {
  const Vector p = nn::Softmax(scores);
  return {p(0), p(1), p(2)};
}

}  // namespace

double QuadraticScore(const QuadraticForm& q, const FourierFeatures& f) {
  const Vector d = Eigen::Map<const Vector>(f.data(), kF) - q.mu;
  return -d.dot(q.sigma * d);
}

ListenerDistribution ScoreContext(const QuadraticForm& q,
                                  const Context& colors) {
  Vector scores(kContextSize);
  for (int k = 0; k < kContextSize; ++k) {
    scores(k) = QuadraticScore(q, ComputeFourierFeatures(colors[k]));
  }
  return ToDistribution(scores);
}

ListenerModel::ListenerModel(Vocabulary vocab, const ListenerConfig& config)
    : vocab_(std::move(vocab)),
      config_(config),
      embedding_(&store_.Add("l0.embedding", vocab_.size(),
                             config.embedding_dim)),
      lstm_(store_, "l0.lstm", config.embedding_dim, config.hidden_dim),
      out_(store_, "l0.out", config.hidden_dim, kF + kF * kF) {}

void ListenerModel::Initialize(Rng& rng) {
  nn::InitNormal(*embedding_, 0.01, rng);
  lstm_.Initialize(rng);
  out_.Initialize(rng);
}

std::vector<int> ListenerModel::Encode(
    const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw EmptyUtterance("listener input has no tokens");
  return vocab_.Encode(tokens);
}

ListenerModel::Heads ListenerModel::Forward(Tape& tape,
                                            const std::vector<int>& ids) const {
  if (ids.empty()) throw EmptyUtterance("listener input has no tokens");
  nn::LstmState state = lstm_.ZeroState(tape);
  for (int id : ids) {
    state = lstm_.Step(tape, nn::Lookup(tape, *embedding_, id), state);
  }
  Var out = out_.Apply(tape, state.h);
  return {nn::SliceRows(out, 0, kF),
          nn::Reshape(nn::SliceRows(out, kF, kF * kF), kF, kF)};
}

Var ListenerModel::Scores(Tape& tape, const std::vector<int>& ids,
                          const Context& colors) const {
  Heads heads = Forward(tape, ids);
  Var f = tape.Constant(FeatureColumns(colors));
  Var spread = nn::MatMul(heads.mu, tape.Constant(Matrix::Ones(1, kContextSize)));
  Var d = nn::Sub(f, spread);
  Var quad = nn::CwiseMul(d, nn::MatMul(heads.sigma, d));
  Var per_color = nn::MatMul(tape.Constant(Matrix::Ones(1, kF)), quad);
  return nn::Scale(nn::Transpose(per_color), -1.0);
}

QuadraticForm ListenerModel::Quadratic(const std::vector<int>& ids) const {
  Tape tape;
  Heads heads = Forward(tape, ids);
  return {heads.mu.value(), heads.sigma.value()};
}

ListenerDistribution ListenerModel::Distribution(
    const std::vector<std::string>& tokens, const Context& colors) const {
  Tape tape;
  return ToDistribution(Scores(tape, Encode(tokens), colors).value());
}

std::vector<ListenerExample> MakeListenerExamples(
    const ListenerModel& model, const std::vector<ContextTrial>& trials) {
  std::vector<ListenerExample> out;
  out.reserve(trials.size());
  for (const ContextTrial& t : trials) {
    out.push_back({model.Encode(Preprocess(t.speaker_text,
                                           TokenizeMode::kListener)),
                   t.colors, t.target_index});
  }
  return out;
}

namespace {

struct DevResult {
  double accuracy = 0.0;
  double perplexity = 0.0;
};

DevResult EvaluateListener(const ListenerModel& model,
                           const std::vector<ListenerExample>& data) {
  DevResult r;
  if (data.empty()) return r;
  double correct = 0.0, nll = 0.0;
  for (const ListenerExample& ex : data) {
    Tape tape;
    const Vector logp = nn::LogSoftmax(Vector(
        model.Scores(tape, ex.ids, ex.colors).value()));
    Eigen::Index best;
    logp.maxCoeff(&best);
    correct += best == ex.target ? 1.0 : 0.0;
    nll -= logp(ex.target);
  }
  r.accuracy = correct / data.size();
  r.perplexity = std::exp(nll / data.size());
  return r;
}

}  // namespace

TrainReport TrainListener(ListenerModel& model,
                          const std::vector<ContextTrial>& train,
                          const std::vector<ContextTrial>& dev,
                          const TrainConfig& config) {
  const std::vector<ListenerExample> train_ex =
      MakeListenerExamples(model, train);
  const std::vector<ListenerExample> dev_ex = MakeListenerExamples(model, dev);
  auto opt = nn::MakeOptimizer(
      config.optimizer.empty() ? "adadelta" : config.optimizer,
      config.learning_rate > 0.0 ? config.learning_rate : kDefaultListenerLr);
  nn::ParameterStore& store = model.store();
  Rng rng(config.seed);

  TrainReport report;
  DevResult init = EvaluateListener(model, dev_ex);
  report.best_dev_accuracy = init.accuracy;
  report.best_dev_perplexity = init.perplexity;
  std::vector<Matrix> best = store.Snapshot();

  std::vector<std::size_t> order(train_ex.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t end = std::min(order.size(), b + batch);
      store.ZeroGrad();
      for (std::size_t i = b; i < end; ++i) {
        const ListenerExample& ex = train_ex[order[i]];
        Tape tape;
        Var loss = nn::SoftmaxCrossEntropy(
            model.Scores(tape, ex.ids, ex.colors), ex.target);
        total_loss += loss.scalar();
        tape.Backward(nn::Scale(loss, 1.0 / static_cast<double>(end - b)));
      }
      nn::ClipGradientNorm(store, config.clip_norm);
      opt->Step(store);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_ex.empty() ? 0.0 : total_loss / train_ex.size();
    const DevResult d = EvaluateListener(model, dev_ex);
    stats.dev_accuracy = d.accuracy;
    stats.dev_perplexity = d.perplexity;
    stats.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    report.epochs.push_back(stats);
    if (config.on_epoch) config.on_epoch(stats);
    if (dev_ex.empty() || d.accuracy > report.best_dev_accuracy) {
      report.best_epoch = epoch;
      report.best_dev_accuracy = d.accuracy;
      report.best_dev_perplexity = d.perplexity;
      best = store.Snapshot();
    }
  }
  store.Restore(best);
  return report;
}

HsvColor GridPoint(int i, int j, int k, int h_bins, int s_bins, int v_bins) {
  return {360.0 * (i + 0.5) / h_bins, (j + 0.5) / s_bins, (k + 0.5) / v_bins};
}

Matrix DensityGrid(const QuadraticForm& q, int h_bins, int s_bins,
                   int v_bins) {
  if (h_bins <= 0 || s_bins <= 0 || v_bins <= 0) {
    throw UsageError("density grid needs positive bin counts");
  }
  Matrix grid(h_bins, s_bins);
  Vector scores(v_bins);
  for (int i = 0; i < h_bins; ++i) {
    for (int j = 0; j < s_bins; ++j) {
      for (int k = 0; k < v_bins; ++k) {
        const Color c = HsvToRgb(GridPoint(i, j, k, h_bins, s_bins, v_bins));
        scores(k) = QuadraticScore(q, ComputeFourierFeatures(c));
      }
      const double mx = scores.maxCoeff();
      grid(i, j) = mx + std::log((scores.array() - mx).exp().sum());
    }
  }
  grid.array() -= grid.maxCoeff();
  return grid;
}

void SaveListener(const std::filesystem::path& path, const ListenerModel& model,
                  const nlohmann::json& extra_meta) {
  nn::Checkpoint ckpt;
  ckpt.meta = extra_meta;
  ckpt.meta["model"] = "listener";
  ckpt.meta["embedding_dim"] = model.config().embedding_dim;
  ckpt.meta["hidden_dim"] = model.config().hidden_dim;
  ckpt.meta["vocab"] = model.vocab().ToJson();
  nn::AppendParameters(model.store(), ckpt);
  nn::WriteCheckpoint(path, ckpt);
}

std::unique_ptr<ListenerModel> LoadListener(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::ReadCheckpoint(path);
  if (ckpt.meta.value("model", "") != "listener") {
    throw CheckpointFormatError(path.string() + " is not a listener checkpoint");
  }
  ListenerConfig config;
  try {
    config.embedding_dim = ckpt.meta.at("embedding_dim").get<int>();
    config.hidden_dim = ckpt.meta.at("hidden_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("listener metadata: ") + e.what());
  }
  auto model = std::make_unique<ListenerModel>(
      Vocabulary::FromJson(ckpt.meta.at("vocab")), config);
  nn::LoadParameters(ckpt, model->store());
  return model;
}

}  // namespace pragref
