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

#include "pragref/nn/autodiff.h"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "pragref/error.h"

namespace pragref::nn {

Parameter& ParameterStore::Add(const std::string& name, int rows, int cols) {
  if (Find(name) != nullptr) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  owned_.push_back(std::make_unique<Parameter>(name, rows, cols));
  view_.push_back(owned_.back().get());
  return *owned_.back();
}

Parameter* ParameterStore::Find(const std::string& name) {
  for (Parameter* p : view_) {
    if (p->name() == name) return p;
  }
  return nullptr;
}

const Parameter* ParameterStore::Find(const std::string& name) const {
  for (const Parameter* p : view_) {
    if (p->name() == name) return p;
  }
  return nullptr;
}

void ParameterStore::ZeroGrad() {
  for (Parameter* p : view_) p->ZeroGrad();
}

std::int64_t ParameterStore::NumValues() const {
  std::int64_t n = 0;
  for (const Parameter* p : view_) n += p->value().size();
  return n;
}

std::vector<Matrix> ParameterStore::Snapshot() const {
  std::vector<Matrix> out;
  out.reserve(view_.size());
  for (const Parameter* p : view_) out.push_back(p->value());
  return out;
}

void ParameterStore::Restore(const std::vector<Matrix>& values) {
  if (values.size() != view_.size()) {
    throw std::invalid_argument("snapshot size mismatch");
  }
  for (size_t i = 0; i < view_.size(); ++i) view_[i]->value() = values[i];
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::Constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr});
  return Var(this, size() - 1);
}

Var Tape::Param(Parameter& p) {
  // Leaves alias the parameter; value(id) reads through the pointer.
  nodes_.push_back(Node{Matrix(), Matrix(), &p, nullptr});
  return Var(this, size() - 1);
}

Var Tape::Record(Matrix value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr,
                        std::move(backward)});
  return Var(this, size() - 1);
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.param != nullptr ? n.param->value() : n.value;
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw std::invalid_argument("foreign node");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("Backward needs a scalar loss");
  }
  Accumulate(loss.id(), Matrix::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.param != nullptr || !n.backward || n.grad.size() == 0) continue;
    // Closures only accumulate into lower ids, so this node's gradient is
    // final here and can be released once consumed.
    const Matrix g = std::move(n.grad);
    n.grad = Matrix();
    n.backward(*this, g);
  }
}

namespace {

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var MatMul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("MatMul: shapes");
  Tape& t = *a.tape();
  Matrix out = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return t.Record(std::move(out), [ia, ib](Tape& t, const Matrix& g) {
    t.Accumulate(ia, g * t.value(ib).transpose());
    t.Accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var Add(Var a, Var b) {
  CheckSameShape(a, b, "Add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record(a.value() + b.value(),
                          [ia, ib](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, g);
                            t.Accumulate(ib, g);
                          });
}

Var Sub(Var a, Var b) {
  CheckSameShape(a, b, "Sub");
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record(a.value() - b.value(),
                          [ia, ib](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, g);
                            t.Accumulate(ib, -g);
                          });
}

Var CwiseMul(Var a, Var b) {
  CheckSameShape(a, b, "CwiseMul");
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record(
      a.value().cwiseProduct(b.value()), [ia, ib](Tape& t, const Matrix& g) {
        t.Accumulate(ia, g.cwiseProduct(t.value(ib)));
        t.Accumulate(ib, g.cwiseProduct(t.value(ia)));
      });
}

Var Scale(Var a, double s) {
  const int ia = a.id();
  return a.tape()->Record(s * a.value(), [ia, s](Tape& t, const Matrix& g) {
    t.Accumulate(ia, s * g);
  });
}

Var Sigmoid(Var a) {
  Matrix out = a.value().unaryExpr(
      [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const int ia = a.id();
  Tape& tape = *a.tape();
  const int self = tape.size();
  return tape.Record(std::move(out), [ia, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.Accumulate(ia, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var Tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  const int ia = a.id();
  Tape& tape = *a.tape();
  const int self = tape.size();
  return tape.Record(std::move(out), [ia, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.Accumulate(ia, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var ConcatRows(Var a, Var b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("ConcatRows: cols");
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a.value(), b.value();
  const int ia = a.id(), ib = b.id();
  const int ra = a.rows(), rb = b.rows();
  return a.tape()->Record(std::move(out),
                          [ia, ib, ra, rb](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, g.topRows(ra));
                            t.Accumulate(ib, g.bottomRows(rb));
                          });
}

Var SliceRows(Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw std::invalid_argument("SliceRows: range");
  }
  const int ia = a.id();
  const int rows = a.rows(), cols = a.cols();
  return a.tape()->Record(
      a.value().middleRows(start, count),
      [ia, start, count, rows, cols](Tape& t, const Matrix& g) {
        Matrix full = Matrix::Zero(rows, cols);
        full.middleRows(start, count) = g;
        t.Accumulate(ia, full);
      });
}

Var Reshape(Var a, int rows, int cols) {
  if (static_cast<Eigen::Index>(rows) * cols != a.value().size()) {
    throw std::invalid_argument("Reshape: size");
  }
  const int ia = a.id();
  const int r0 = a.rows(), c0 = a.cols();
  Matrix out = a.value().reshaped(rows, cols);
  return a.tape()->Record(std::move(out),
                          [ia, r0, c0](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, g.reshaped(r0, c0));
                          });
}

Var Transpose(Var a) {
  const int ia = a.id();
  return a.tape()->Record(a.value().transpose(),
                          [ia](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, g.transpose());
                          });
}

Var Sum(Var a) {
  const int ia = a.id();
  const int rows = a.rows(), cols = a.cols();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->Record(std::move(out),
                          [ia, rows, cols](Tape& t, const Matrix& g) {
                            t.Accumulate(ia, Matrix::Constant(rows, cols,
                                                              g(0, 0)));
                          });
}

Var Lookup(Tape& tape, Parameter& table, int id) {
  if (id < 0 || id >= table.value().rows()) {
    throw IndexOutOfRange("lookup id " + std::to_string(id) + " outside [0, " +
                          std::to_string(table.value().rows()) + ")");
  }
  Parameter* p = &table;
  return tape.Record(table.value().row(id).transpose(),
                     [p, id](Tape&, const Matrix& g) {
                       p->grad().row(id) += g.transpose();
                     });
}

Vector Softmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

Vector LogSoftmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

Var LogSoftmax(Var a) {
  if (a.cols() != 1) throw std::invalid_argument("LogSoftmax: column only");
  const int ia = a.id();
  Tape& tape = *a.tape();
  const int self = tape.size();
  return tape.Record(LogSoftmax(Vector(a.value())),
                     [ia, self](Tape& t, const Matrix& g) {
                       const Vector p = t.value(self).array().exp().matrix();
                       t.Accumulate(ia, g - p * g.sum());
                     });
}

Var Pick(Var a, int i) {
  if (a.cols() != 1 || i < 0 || i >= a.rows()) {
    throw IndexOutOfRange("Pick index " + std::to_string(i));
  }
  const int ia = a.id();
  const int rows = a.rows();
  Matrix out(1, 1);
  out(0, 0) = a.value()(i, 0);
  return a.tape()->Record(std::move(out),
                          [ia, i, rows](Tape& t, const Matrix& g) {
                            Matrix full = Matrix::Zero(rows, 1);
                            full(i, 0) = g(0, 0);
                            t.Accumulate(ia, full);
                          });
}

Var SoftmaxCrossEntropy(Var logits, int target) {
  if (logits.cols() != 1 || target < 0 || target >= logits.rows()) {
    throw IndexOutOfRange("cross-entropy target " + std::to_string(target));
  }
  const Vector logp = LogSoftmax(Vector(logits.value()));
  Matrix out(1, 1);
  out(0, 0) = -logp(target);
  const int ia = logits.id();
  return logits.tape()->Record(
      std::move(out), [ia, logp, target](Tape& t, const Matrix& g) {
        Vector d = logp.array().exp().matrix();
        d(target) -= 1.0;
        t.Accumulate(ia, g(0, 0) * d);
      });
}

}  // namespace pragref::nn
