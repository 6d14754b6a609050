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

// Tape-based reverse-mode automatic differentiation over dense double
// matrices. Column vectors are n x 1 matrices; scalars are 1 x 1.
//
//   nn::Tape tape;
//   nn::Var x = tape.Constant(input);
//   nn::Var loss = nn::Sum(nn::Tanh(nn::MatMul(tape.Param(w), x)));
//   tape.Backward(loss);  // accumulates into w.grad()

#ifndef PRAGREF_NN_AUTODIFF_H_
#define PRAGREF_NN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pragref::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Parameter {
 public:
  Parameter(std::string name, int rows, int cols)
      : name_(std::move(name)),
        value_(Matrix::Zero(rows, cols)),
        grad_(Matrix::Zero(rows, cols)) {}

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }
  void ZeroGrad() { grad_.setZero(); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

// Owns a model's parameters with stable addresses, in registration order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& Add(const std::string& name, int rows, int cols);
  Parameter* Find(const std::string& name);
  const Parameter* Find(const std::string& name) const;

  std::vector<Parameter*>& params() { return view_; }
  const std::vector<Parameter*>& params() const { return view_; }

  void ZeroGrad();
  std::int64_t NumValues() const;

  // Copies of all values, in registration order.
  std::vector<Matrix> Snapshot() const;
  void Restore(const std::vector<Matrix>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> owned_;
  std::vector<Parameter*> view_;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  double scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  Var Param(Parameter& p);

  // Records a node computed from other nodes. `backward` receives the
  // gradient with respect to this node and accumulates into its inputs.
  Var Record(Matrix value, BackwardFn backward);

  const Matrix& value(int id) const;

  // Adds `g` into the gradient of node `id`; parameter leaves accumulate
  // straight into Parameter::grad().
  template <typename Expr>
  void Accumulate(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (n.param != nullptr) {
      n.param->grad() += g;
      return;
    }
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  // Parameter behind a leaf node, or nullptr.
  Parameter* param(int id) const { return nodes_[id].param; }

  // Full reverse sweep from a 1x1 node. Throws std::invalid_argument if the
  // loss is not a scalar.
  void Backward(Var loss);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Elementary differentiable operations.
Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var CwiseMul(Var a, Var b);
Var Scale(Var a, double s);
Var Sigmoid(Var a);
Var Tanh(Var a);
Var ConcatRows(Var a, Var b);
Var SliceRows(Var a, int start, int count);
// Column-major reshape; rows * cols must equal the input size.
Var Reshape(Var a, int rows, int cols);
Var Transpose(Var a);
Var Sum(Var a);
// Row `id` of `table` (vocab x dim) as a dim x 1 column. Throws
// IndexOutOfRange.
Var Lookup(Tape& tape, Parameter& table, int id);
// Log-softmax of a column vector.
Var LogSoftmax(Var a);
// Entry `i` of a column vector as a 1x1 node.
Var Pick(Var a, int i);
// -log softmax(logits)[target] as a 1x1 node.
Var SoftmaxCrossEntropy(Var logits, int target);

inline Var Affine(Var w, Var x, Var b) { return Add(MatMul(w, x), b); }

// Non-differentiable helpers on plain vectors.
Vector Softmax(const Vector& logits);
Vector LogSoftmax(const Vector& logits);

}  // namespace pragref::nn

#endif  // PRAGREF_NN_AUTODIFF_H_
