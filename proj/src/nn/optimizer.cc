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

#include "pragref/nn/optimizer.h"

#include <cmath>
#include <stdexcept>

#include "pragref/error.h"

namespace pragref::nn {

namespace {

Matrix& Slot(std::map<std::string, Matrix>& slots, const Parameter& p) {
  auto it = slots.find(p.name());
  if (it == slots.end()) {
    it = slots
             .emplace(p.name(),
                      Matrix::Zero(p.value().rows(), p.value().cols()))
             .first;
  }
  return it->second;
}

void ExportSlots(const std::map<std::string, Matrix>& slots,
                 const std::string& prefix,
                 std::map<std::string, Matrix>& out) {
  for (const auto& [name, m] : slots) out[prefix + "/" + name] = m;
}

void ImportSlots(const std::map<std::string, Matrix>& in,
                 const std::string& prefix,
                 std::map<std::string, Matrix>& slots) {
  slots.clear();
  const std::string key = prefix + "/";
  for (const auto& [name, m] : in) {
    if (name.rfind(key, 0) == 0) slots[name.substr(key.size())] = m;
  }
}

}  // namespace

double GradientNorm(const ParameterStore& store) {
  double sq = 0.0;
  for (const Parameter* p : store.params()) sq += p->grad().squaredNorm();
  return std::sqrt(sq);
}

double ClipGradientNorm(ParameterStore& store, double max_norm) {
  const double norm = GradientNorm(store);
  if (!std::isfinite(norm)) {
    throw NonFiniteGradient("gradient norm is not finite");
  }
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (Parameter* p : store.params()) p->grad() *= scale;
  }
  return norm;
}

void Adam::Step(ParameterStore& store) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Parameter* p : store.params()) {
    Matrix& m = Slot(m_, *p);
    Matrix& v = Slot(v_, *p);
    const Matrix& g = p->grad();
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    p->value().array() -=
        lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

std::map<std::string, Matrix> Adam::ExportState() const {
  std::map<std::string, Matrix> out;
  ExportSlots(m_, "adam.m", out);
  ExportSlots(v_, "adam.v", out);
  Matrix t(1, 1);
  t(0, 0) = static_cast<double>(t_);
  out["adam.t"] = t;
  return out;
}

void Adam::ImportState(const std::map<std::string, Matrix>& state) {
  ImportSlots(state, "adam.m", m_);
  ImportSlots(state, "adam.v", v_);
  auto it = state.find("adam.t");
  t_ = it == state.end() ? 0 : static_cast<std::int64_t>(it->second(0, 0));
}

void Adadelta::Step(ParameterStore& store) {
  for (Parameter* p : store.params()) {
    Matrix& gsq = Slot(grad_sq_, *p);
    Matrix& dsq = Slot(delta_sq_, *p);
    const Matrix& g = p->grad();
    gsq = rho_ * gsq + (1.0 - rho_) * g.cwiseProduct(g);
    const Matrix delta =
        (g.array() * (dsq.array() + eps_).sqrt() / (gsq.array() + eps_).sqrt())
            .matrix();
    p->value() -= lr_ * delta;
    dsq = rho_ * dsq + (1.0 - rho_) * delta.cwiseProduct(delta);
  }
}

std::map<std::string, Matrix> Adadelta::ExportState() const {
  std::map<std::string, Matrix> out;
  ExportSlots(grad_sq_, "adadelta.g2", out);
  ExportSlots(delta_sq_, "adadelta.dx2", out);
  return out;
}

void Adadelta::ImportState(const std::map<std::string, Matrix>& state) {
  ImportSlots(state, "adadelta.g2", grad_sq_);
  ImportSlots(state, "adadelta.dx2", delta_sq_);
}

std::unique_ptr<Optimizer> MakeOptimizer(const std::string& name, double lr) {
  if (name == "adam") return std::make_unique<Adam>(lr);
  if (name == "adadelta") return std::make_unique<Adadelta>(lr);
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

}  // namespace pragref::nn
