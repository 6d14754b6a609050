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

// Literal neural speaker. An encoder LSTM reads the Fourier features of the
// two distractors (in stored order) and then the target; its final cell
// state is the context vector. A decoder LSTM receives [context; embedding of
// the previous token] at every step and predicts the next token over the
// whole vocabulary.

#ifndef PRAGREF_SPEAKER_H_
#define PRAGREF_SPEAKER_H_

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

struct SpeakerConfig {
  int embedding_dim = nn::kDefaultEmbeddingDim;
  int hidden_dim = nn::kDefaultHiddenDim;
  int max_length = 20;  // tokens, end marker included
};

struct UtteranceSample {
  std::vector<int> ids;  // ends with Vocabulary::kEnd
  double log_prob = 0.0;

  // Words without the end marker.
  std::vector<std::string> Words(const Vocabulary& vocab) const;
};

class SpeakerModel {
 public:
  explicit SpeakerModel(Vocabulary vocab, const SpeakerConfig& config = {});
  SpeakerModel(const SpeakerModel&) = delete;
  SpeakerModel& operator=(const SpeakerModel&) = delete;

  void Initialize(Rng& rng);

  const Vocabulary& vocab() const { return vocab_; }
  const SpeakerConfig& config() const { return config_; }
  nn::ParameterStore& store() { return store_; }
  const nn::ParameterStore& store() const { return store_; }
  const nn::LstmCell& encoder() const { return encoder_; }

  // Speaker-mode tokens to ids with the end marker appended.
  std::vector<int> Encode(const std::vector<std::string>& tokens) const;

  nn::Var EncodeContext(nn::Tape& tape, const Context& colors,
                        int target) const;
  nn::Vector ContextVector(const Context& colors, int target) const;

  // Summed negative log-likelihood of `ids` (teacher forced) as a 1x1 node.
  nn::Var NegLogLikelihood(nn::Tape& tape, const std::vector<int>& ids,
                           const Context& colors, int target) const;

  // log S0(ids | target, colors). `ids` must end with the end marker.
  double LogProb(const std::vector<int>& ids, const Context& colors,
                 int target) const;

  // Next-token distribution after `prefix` (which excludes <s>).
  nn::Vector NextTokenDistribution(const std::vector<int>& prefix,
                                   const Context& colors, int target) const;

  // Ancestral sampling from softmax(logits / temperature); temperature <= 0
  // decodes greedily. log_prob is always under the model itself. The end
  // marker is forced at max_length.
  UtteranceSample Sample(const Context& colors, int target, Rng& rng,
                         double temperature = 1.0) const;
  UtteranceSample Greedy(const Context& colors, int target) const;
  // `count` independent samples sharing one context encoding.
  std::vector<UtteranceSample> SampleMany(const Context& colors, int target,
                                          Rng& rng, int count,
                                          double temperature = 1.0) const;

 private:
  UtteranceSample Decode(const nn::Vector& context, Rng* rng,
                         double temperature) const;

  Vocabulary vocab_;
  SpeakerConfig config_;
  nn::ParameterStore store_;
  nn::LstmCell encoder_;
  nn::Parameter* embedding_;
  nn::LstmCell decoder_;
  nn::AffineLayer out_;
};

// Speaker-mode words re-tokenized for a listener. Reserved tokens such as
// <unk> pass through unchanged.
std::vector<std::string> SpeakerToListenerTokens(
    const std::vector<std::string>& speaker_words);

struct SpeakerExample {
  std::vector<int> ids;
  Context colors{};
  int target = 0;
};

std::vector<SpeakerExample> MakeSpeakerExamples(
    const SpeakerModel& model, const std::vector<ContextTrial>& trials);

// Per-token cross-entropy; Adam at 0.004 unless configured otherwise. Keeps
// the weights with the best dev token perplexity.
TrainReport TrainSpeaker(SpeakerModel& model,
                         const std::vector<ContextTrial>& train,
                         const std::vector<ContextTrial>& dev,
                         const TrainConfig& config);

// exp(total NLL / total tokens), end markers counted.
double TokenPerplexity(const SpeakerModel& model,
                       const std::vector<SpeakerExample>& data);

void SaveSpeaker(const std::filesystem::path& path, const SpeakerModel& model,
                 const nlohmann::json& extra_meta = nlohmann::json::object());
std::unique_ptr<SpeakerModel> LoadSpeaker(const std::filesystem::path& path);

}  // namespace pragref

#endif  // PRAGREF_SPEAKER_H_
