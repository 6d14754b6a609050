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

#include "pragref/nn/layers.h"

#include <cmath>
#include <random>

namespace pragref::nn {

void InitUniformFanIn(Parameter& p, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix& v = p.value();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
}

void InitNormal(Parameter& p, double stddev, Rng& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Matrix& v = p.value();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
}

LstmCell::LstmCell(ParameterStore& store, const std::string& prefix,
                   int input_dim, int hidden_dim)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      w_(&store.Add(prefix + ".w", 4 * hidden_dim, input_dim + hidden_dim)),
      b_(&store.Add(prefix + ".b", 4 * hidden_dim, 1)) {}

void LstmCell::Initialize(Rng& rng) {
  InitUniformFanIn(*w_, input_dim_ + hidden_dim_, rng);
  b_->value().setZero();
  b_->value().middleRows(hidden_dim_, hidden_dim_).setOnes();
}

LstmState LstmCell::ZeroState(Tape& tape) const {
  return {tape.Constant(Matrix::Zero(hidden_dim_, 1)),
          tape.Constant(Matrix::Zero(hidden_dim_, 1))};
}

LstmState LstmCell::Step(Tape& tape, Var x, const LstmState& prev) const {
  const int h = hidden_dim_;
  Var z = Affine(tape.Param(*w_), ConcatRows(x, prev.h), tape.Param(*b_));
  Var in_gate = Sigmoid(SliceRows(z, 0, h));
  Var forget_gate = Sigmoid(SliceRows(z, h, h));
  Var out_gate = Sigmoid(SliceRows(z, 2 * h, h));
  Var candidate = Tanh(SliceRows(z, 3 * h, h));
  Var c = Add(CwiseMul(forget_gate, prev.c), CwiseMul(in_gate, candidate));
  Var hidden = CwiseMul(out_gate, Tanh(c));
  return {hidden, c};
}

AffineLayer::AffineLayer(ParameterStore& store, const std::string& prefix,
                         int input_dim, int output_dim)
    : input_dim_(input_dim),
      w_(&store.Add(prefix + ".w", output_dim, input_dim)),
      b_(&store.Add(prefix + ".b", output_dim, 1)) {}

void AffineLayer::Initialize(Rng& rng) {
  InitUniformFanIn(*w_, input_dim_, rng);
  b_->value().setZero();
}

Var AffineLayer::Apply(Tape& tape, Var x) const {
  return Affine(tape.Param(*w_), x, tape.Param(*b_));
}

}  // namespace pragref::nn
