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

// Literal neural listener. An LSTM reads the utterance; its final hidden
// state is mapped to the mean mu and matrix Sigma of a quadratic form
//
//   score(f) = -(f - mu)^T Sigma (f - mu)
//
// over Fourier color features, and the three context scores are normalized
// with a softmax. The listener never sees the context before that step.

#ifndef PRAGREF_LISTENER_H_
#define PRAGREF_LISTENER_H_

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pragref/colorspace.h"
#include "pragref/corpus.h"
#include "pragref/nn/autodiff.h"
#include "pragref/nn/layers.h"
#include "pragref/training.h"

namespace pragref {

using ListenerDistribution = std::array<double, kContextSize>;

struct ListenerConfig {
  int embedding_dim = nn::kDefaultEmbeddingDim;
  int hidden_dim = nn::kDefaultHiddenDim;
};

struct QuadraticForm {
  nn::Vector mu;     // kNumFourierFeatures
  nn::Matrix sigma;  // kNumFourierFeatures square, not symmetrized
};

double QuadraticScore(const QuadraticForm& q, const FourierFeatures& f);

// Softmax of the three scores.
ListenerDistribution ScoreContext(const QuadraticForm& q, const Context& colors);

class ListenerModel {
 public:
  explicit ListenerModel(Vocabulary vocab, const ListenerConfig& config = {});
  ListenerModel(const ListenerModel&) = delete;
  ListenerModel& operator=(const ListenerModel&) = delete;

  void Initialize(Rng& rng);

  const Vocabulary& vocab() const { return vocab_; }
  const ListenerConfig& config() const { return config_; }
  nn::ParameterStore& store() { return store_; }
  const nn::ParameterStore& store() const { return store_; }
  const nn::AffineLayer& output() const { return out_; }

  // Listener-mode tokens to ids. Throws EmptyUtterance for no tokens.
  std::vector<int> Encode(const std::vector<std::string>& tokens) const;

  struct Heads {
    nn::Var mu;     // 54 x 1
    nn::Var sigma;  // 54 x 54
  };
  Heads Forward(nn::Tape& tape, const std::vector<int>& ids) const;

  // The three scores as a 3 x 1 node.
  nn::Var Scores(nn::Tape& tape, const std::vector<int>& ids,
                 const Context& colors) const;

  QuadraticForm Quadratic(const std::vector<int>& ids) const;

  // L0(. | tokens, colors) for listener-mode tokens.
  ListenerDistribution Distribution(const std::vector<std::string>& tokens,
                                    const Context& colors) const;

 private:
  Vocabulary vocab_;
  ListenerConfig config_;
  nn::ParameterStore store_;
  nn::Parameter* embedding_;
  nn::LstmCell lstm_;
  nn::AffineLayer out_;
};

struct ListenerExample {
  std::vector<int> ids;
  Context colors{};
  int target = 0;
};

std::vector<ListenerExample> MakeListenerExamples(
    const ListenerModel& model, const std::vector<ContextTrial>& trials);

// Cross-entropy of the target under the softmaxed scores; Adadelta at 0.2
// unless the config says otherwise. The best-dev-accuracy weights are kept
// in the model on return.
TrainReport TrainListener(ListenerModel& model,
                          const std::vector<ContextTrial>& train,
                          const std::vector<ContextTrial>& dev,
                          const TrainConfig& config);

// Log marginal density over (hue, saturation), summing exp(score) over the
// value axis of an HSV lattice with cell-centered coordinates. Normalized so
// the largest cell is 0; rows are hue bins.
nn::Matrix DensityGrid(const QuadraticForm& q, int h_bins = 90,
                       int s_bins = 50, int v_bins = 50);

// Lattice coordinate helpers shared with tests and exports.
HsvColor GridPoint(int i, int j, int k, int h_bins, int s_bins, int v_bins);

void SaveListener(const std::filesystem::path& path, const ListenerModel& model,
                  const nlohmann::json& extra_meta = nlohmann::json::object());
std::unique_ptr<ListenerModel> LoadListener(const std::filesystem::path& path);

}  // namespace pragref

#endif  // PRAGREF_LISTENER_H_
