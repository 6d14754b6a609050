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

// Settings and per-epoch records shared by the listener and speaker trainers.

#ifndef PRAGREF_TRAINING_H_
#define PRAGREF_TRAINING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pragref/nn/optimizer.h"

namespace pragref {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean per example (listener) or per token
  double dev_accuracy = 0.0;  // listener only
  double dev_perplexity = 0.0;
  double seconds = 0.0;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  std::string optimizer;  // empty: the model's default
  double learning_rate = 0.0;  // 0: the optimizer's default
  double clip_norm = nn::kDefaultClipNorm;
  std::uint64_t seed = 0;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 0 when the initial weights were never beaten
  double best_dev_accuracy = 0.0;
  double best_dev_perplexity = 0.0;

  nlohmann::json ToJson() const;
};

inline nlohmann::json TrainReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochStats& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"dev_accuracy", e.dev_accuracy},
                    {"dev_perplexity", e.dev_perplexity},
                    {"seconds", e.seconds}});
  }
  return {{"epochs", rows},
          {"best_epoch", best_epoch},
          {"best_dev_accuracy", best_dev_accuracy},
          {"best_dev_perplexity", best_dev_perplexity}};
}

}  // namespace pragref

#endif  // PRAGREF_TRAINING_H_
