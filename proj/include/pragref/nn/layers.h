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

#ifndef PRAGREF_NN_LAYERS_H_
#define PRAGREF_NN_LAYERS_H_

#include <string>

#include "pragref/colorspace.h"
#include "pragref/nn/autodiff.h"

namespace pragref::nn {

inline constexpr int kDefaultHiddenDim = 100;
inline constexpr int kDefaultEmbeddingDim = 100;

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void InitUniformFanIn(Parameter& p, int fan_in, Rng& rng);
// N(0, stddev^2) entries.
void InitNormal(Parameter& p, double stddev, Rng& rng);

struct LstmState {
  Var h;
  Var c;
};

// Single LSTM cell. Weights are packed as one (4H) x (D + H) matrix acting on
// [x; h], gate blocks ordered input, forget, output, candidate.
class LstmCell {
 public:
  LstmCell(ParameterStore& store, const std::string& prefix, int input_dim,
           int hidden_dim);

  // Weights uniform +-1/sqrt(D + H), biases zero except forget gate = 1.
  void Initialize(Rng& rng);

  LstmState ZeroState(Tape& tape) const;
  LstmState Step(Tape& tape, Var x, const LstmState& prev) const;

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  Parameter& weights() const { return *w_; }
  Parameter& bias() const { return *b_; }

 private:
  int input_dim_;
  int hidden_dim_;
  Parameter* w_;
  Parameter* b_;
};

// y = W x + b.
class AffineLayer {
 public:
  AffineLayer(ParameterStore& store, const std::string& prefix, int input_dim,
              int output_dim);

  void Initialize(Rng& rng);
  Var Apply(Tape& tape, Var x) const;

  Parameter& weights() const { return *w_; }
  Parameter& bias() const { return *b_; }

 private:
  int input_dim_;
  Parameter* w_;
  Parameter* b_;
};

}  // namespace pragref::nn

#endif  // PRAGREF_NN_LAYERS_H_
