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

#ifndef PRAGREF_NN_OPTIMIZER_H_
#define PRAGREF_NN_OPTIMIZER_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pragref/nn/autodiff.h"

namespace pragref::nn {

inline constexpr double kDefaultClipNorm = 5.0;

// Global L2 norm of all gradients in the store.
double GradientNorm(const ParameterStore& store);

// Rescales gradients so their global norm is at most `max_norm`. Returns the
// pre-clip norm. Throws NonFiniteGradient if any gradient is NaN or infinite.
double ClipGradientNorm(ParameterStore& store, double max_norm);

class Optimizer {
 public:
  virtual ~Optimizer() = default;

  // Applies one update from the current gradients. Does not clear them.
  virtual void Step(ParameterStore& store) = 0;
  virtual std::string name() const = 0;

  // Accumulators keyed "<slot>/<parameter name>", for checkpointing.
  virtual std::map<std::string, Matrix> ExportState() const = 0;
  virtual void ImportState(const std::map<std::string, Matrix>& state) = 0;
};

// Kingma & Ba with bias correction.
class Adam : public Optimizer {
 public:
  explicit Adam(double lr = 0.004, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(ParameterStore& store) override;
  std::string name() const override { return "adam"; }
  std::map<std::string, Matrix> ExportState() const override;
  void ImportState(const std::map<std::string, Matrix>& state) override;

  std::int64_t step_count() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, Matrix> m_;
  std::map<std::string, Matrix> v_;
};

// Zeiler's ADADELTA with a learning-rate multiplier on the update:
//   E[g^2] <- rho E[g^2] + (1 - rho) g^2
//   dx      = g * sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps)
//   x      <- x - lr * dx
//   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
class Adadelta : public Optimizer {
 public:
  explicit Adadelta(double lr = 0.2, double rho = 0.95, double eps = 1e-6)
      : lr_(lr), rho_(rho), eps_(eps) {}

  void Step(ParameterStore& store) override;
  std::string name() const override { return "adadelta"; }
  std::map<std::string, Matrix> ExportState() const override;
  void ImportState(const std::map<std::string, Matrix>& state) override;

 private:
  double lr_, rho_, eps_;
  std::map<std::string, Matrix> grad_sq_;
  std::map<std::string, Matrix> delta_sq_;
};

// "adam" or "adadelta"; throws std::invalid_argument otherwise.
std::unique_ptr<Optimizer> MakeOptimizer(const std::string& name, double lr);

}  // namespace pragref::nn

#endif  // PRAGREF_NN_OPTIMIZER_H_
