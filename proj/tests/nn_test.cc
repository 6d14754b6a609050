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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "gradient_check.h"
#include "pragref/error.h"
#include "pragref/nn/autodiff.h"
#include "pragref/nn/checkpoint.h"
#include "pragref/nn/layers.h"
#include "pragref/nn/optimizer.h"

namespace pragref::nn {
namespace {

using testing_util::CheckGradients;
using testing_util::FillUniform;

constexpr double kGradTolerance = 1e-4;

TEST(EmbedTest, IdentityTableReturnsRow) {
  ParameterStore store;
  Parameter& table = store.Add("emb", 3, 3);
  table.value() = Matrix::Identity(3, 3);
  Tape tape;
  Var row = Lookup(tape, table, 0);
  EXPECT_EQ(row.value(), Vector::Unit(3, 0));
}

TEST(EmbedTest, GradientAccumulatesOnesAndRepeats) {
  ParameterStore store;
  Parameter& table = store.Add("emb", 4, 2);
  table.value().setRandom();
  Tape tape;
  Var loss = Add(Sum(Lookup(tape, table, 1)),
                 Add(Sum(Lookup(tape, table, 3)), Sum(Lookup(tape, table, 3))));
  tape.Backward(loss);
  Matrix expected = Matrix::Zero(4, 2);
  expected.row(1).setOnes();
  expected.row(3).setConstant(2.0);
  EXPECT_EQ(table.grad(), expected);
}

TEST(EmbedTest, OutOfRangeThrows) {
  ParameterStore store;
  Parameter& table = store.Add("emb", 4, 2);
  Tape tape;
  EXPECT_THROW(Lookup(tape, table, 4), IndexOutOfRange);
  EXPECT_THROW(Lookup(tape, table, -1), IndexOutOfRange);
}

TEST(LstmStepTest, ZeroParamsAndStateGiveZeroHidden) {
  ParameterStore store;
  LstmCell cell(store, "lstm", 3, 4);
  Tape tape;
  LstmState next = cell.Step(tape, tape.Constant(Matrix::Zero(3, 1)),
                             cell.ZeroState(tape));
  EXPECT_EQ(next.h.value(), Matrix::Zero(4, 1));
}

TEST(LstmStepTest, MatchesHandComputedRecurrence) {
  ParameterStore store;
  LstmCell cell(store, "lstm", 2, 2);
  // Rows: i0 i1 f0 f1 o0 o1 g0 g1; columns: x0 x1 h0 h1.
  Matrix w(8, 4);
  w << 0.1, -0.2, 0.3, 0.05,
       0.4, 0.1, -0.1, 0.2,
       -0.3, 0.2, 0.1, 0.1,
       0.2, 0.3, 0.0, -0.4,
       0.5, -0.1, 0.2, 0.3,
       -0.2, 0.4, 0.1, 0.0,
       0.3, 0.3, -0.3, 0.1,
       -0.1, 0.2, 0.4, -0.2;
  Vector b(8);
  b << 0.01, -0.02, 1.0, 1.0, 0.03, 0.0, -0.05, 0.04;
  cell.weights().value() = w;
  cell.bias().value() = b;
  const double x[2] = {0.7, -1.2};
  const double h[2] = {0.3, -0.1};
  const double c[2] = {0.5, 0.2};

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  auto pre = [&](int row) {
    return w(row, 0) * x[0] + w(row, 1) * x[1] + w(row, 2) * h[0] +
           w(row, 3) * h[1] + b(row);
  };
  double want_h[2], want_c[2];
  for (int k = 0; k < 2; ++k) {
    const double ig = sig(pre(k));
    const double fg = sig(pre(2 + k));
    const double og = sig(pre(4 + k));
    const double gg = std::tanh(pre(6 + k));
    want_c[k] = fg * c[k] + ig * gg;
    want_h[k] = og * std::tanh(want_c[k]);
  }

  Tape tape;
  Matrix xv(2, 1), hv(2, 1), cv(2, 1);
  xv << x[0], x[1];
  hv << h[0], h[1];
  cv << c[0], c[1];
  LstmState next = cell.Step(tape, tape.Constant(xv),
                             {tape.Constant(hv), tape.Constant(cv)});
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(next.h.value()(k, 0), want_h[k], 1e-12);
    EXPECT_NEAR(next.c.value()(k, 0), want_c[k], 1e-12);
  }
}

TEST(LstmStepTest, GradientMatchesFiniteDifferences) {
  Rng rng(17);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const int d_in = dim(rng), d_h = dim(rng), steps = dim(rng);
    ParameterStore store;
    LstmCell cell(store, "lstm", d_in, d_h);
    Parameter& xs = store.Add("xs", d_in, steps);
    Parameter& h0 = store.Add("h0", d_h, 1);
    Parameter& c0 = store.Add("c0", d_h, 1);
    for (Parameter* p : store.params()) FillUniform(*p, rng);
    auto loss = [&](Tape& tape) {
      LstmState s{tape.Param(h0), tape.Param(c0)};
      Var all = tape.Param(xs);
      Var acc;
      for (int t = 0; t < steps; ++t) {
        Var x = Transpose(SliceRows(Transpose(all), t, 1));
        s = cell.Step(tape, x, s);
      }
      return Add(Sum(CwiseMul(s.h, s.h)), Sum(s.c));
    };
    const auto r = CheckGradients(store, loss, rng);
    EXPECT_LT(r.max_rel_error, kGradTolerance) << r.worst;
  }
}

TEST(SoftmaxXentTest, EqualLogitsGiveLogThree) {
  Tape tape;
  Var loss = SoftmaxCrossEntropy(tape.Constant(Matrix::Constant(3, 1, 0.7)), 1);
  EXPECT_NEAR(loss.scalar(), std::log(3.0), 1e-12);
  const Vector p = Softmax(Vector::Constant(3, 0.7));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p(i), 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxXentTest, FavorableLogitDrivesLossToZero) {
  double last = 1e9;
  for (double big : {1.0, 5.0, 20.0, 50.0}) {
    Tape tape;
    Matrix logits(3, 1);
    logits << 0.0, big, 0.0;
    const double loss = SoftmaxCrossEntropy(tape.Constant(logits), 1).scalar();
    EXPECT_LT(loss, last);
    last = loss;
  }
  EXPECT_LT(last, 1e-20);
}

TEST(AffineXentTest, GradientMatchesFiniteDifferences) {
  Rng rng(23);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int d_in = dim(rng), classes = dim(rng) + 1;
    const int target = std::uniform_int_distribution<int>(0, classes - 1)(rng);
    ParameterStore store;
    AffineLayer layer(store, "aff", d_in, classes);
    Parameter& x = store.Add("x", d_in, 1);
    for (Parameter* p : store.params()) FillUniform(*p, rng, -2.0, 2.0);
    auto loss = [&](Tape& tape) {
      return SoftmaxCrossEntropy(layer.Apply(tape, tape.Param(x)), target);
    };
    const auto r = CheckGradients(store, loss, rng);
    EXPECT_LT(r.max_rel_error, kGradTolerance) << r.worst;
  }
}

TEST(OpsTest, ElementaryGradientsMatchFiniteDifferences) {
  Rng rng(29);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = dim(rng), c = dim(rng), k = dim(rng);
    ParameterStore store;
    Parameter& a = store.Add("a", r, c);
    Parameter& b = store.Add("b", c, k);
    Parameter& v = store.Add("v", r * k, 1);
    for (Parameter* p : store.params()) FillUniform(*p, rng);
    const int pick = std::uniform_int_distribution<int>(0, r * k - 1)(rng);
    auto loss = [&](Tape& tape) {
      Var ab = MatMul(tape.Param(a), tape.Param(b));  // r x k
      Var flat = Reshape(ab, r * k, 1);
      Var mixed = Sub(CwiseMul(Tanh(flat), Sigmoid(tape.Param(v))),
                      Scale(tape.Param(v), 0.3));
      Var logp = LogSoftmax(ConcatRows(mixed, SliceRows(flat, 0, 1)));
      Var t = Transpose(Reshape(mixed, r, k));
      return Add(Add(Pick(logp, pick), Sum(CwiseMul(t, t))),
                 Sum(LogSoftmax(Reshape(t, r * k, 1))));
    };
    const auto res = CheckGradients(store, loss, rng);
    EXPECT_LT(res.max_rel_error, kGradTolerance) << res.worst;
  }
}

TEST(BackwardTest, DiamondGraphSumsFanOut) {
  ParameterStore store;
  Parameter& x = store.Add("x", 1, 1);
  x.value()(0, 0) = 0.4;
  Tape tape;
  Var a = Tanh(tape.Param(x));
  Var left = Scale(a, 3.0);
  Var right = CwiseMul(a, a);
  tape.Backward(Add(left, right));
  const double t = std::tanh(0.4);
  EXPECT_NEAR(x.grad()(0, 0), (3.0 + 2.0 * t) * (1.0 - t * t), 1e-14);
}

TEST(BackwardTest, RejectsNonScalarLoss) {
  Tape tape;
  Var v = tape.Constant(Matrix::Ones(2, 1));
  EXPECT_THROW(tape.Backward(v), std::invalid_argument);
}

TEST(AdamTest, FirstStepWithUnitGradient) {
  ParameterStore store;
  Parameter& p = store.Add("p", 3, 2);
  p.value().setConstant(1.0);
  p.grad().setOnes();
  Adam adam;
  adam.Step(store);
  // m_hat = v_hat = 1 at t = 1, so the update is lr / (1 + eps).
  for (Eigen::Index i = 0; i < p.value().size(); ++i) {
    EXPECT_NEAR(p.value().data()[i] - 1.0, -0.004 / (1.0 + 1e-8), 1e-15);
  }
}

TEST(OptimizerTest, ZeroGradientGivesZeroUpdate) {
  for (const char* name : {"adam", "adadelta"}) {
    ParameterStore store;
    Parameter& p = store.Add("p", 2, 2);
    p.value() << 1, 2, 3, 4;
    const Matrix before = p.value();
    auto opt = MakeOptimizer(name, 0.5);
    for (int i = 0; i < 3; ++i) opt->Step(store);
    EXPECT_EQ(p.value(), before) << name;
  }
}

double RunBowl(Optimizer& opt, int steps) {
  ParameterStore store;
  Parameter& p = store.Add("p", 4, 1);
  Vector center(4);
  center << 0.5, -0.25, 0.1, 0.0;
  p.value() = Vector::Zero(4);
  for (int s = 0; s < steps; ++s) {
    p.grad() = 2.0 * (p.value() - center);
    opt.Step(store);
  }
  return (p.value() - center).cwiseAbs().maxCoeff();
}

TEST(OptimizerTest, QuadraticBowlConverges) {
  Adam adam(0.004);
  EXPECT_LT(RunBowl(adam, 2000), 1e-3);
  Adadelta adadelta(0.2);
  EXPECT_LT(RunBowl(adadelta, 2000), 1e-3);
}

TEST(ClipTest, RescalesToMaxNorm) {
  ParameterStore store;
  Parameter& p = store.Add("p", 2, 1);
  p.grad() << 30.0, 40.0;
  EXPECT_DOUBLE_EQ(ClipGradientNorm(store, 5.0), 50.0);
  EXPECT_NEAR(p.grad()(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(p.grad()(1, 0), 4.0, 1e-12);
  p.grad() << 0.3, 0.4;
  ClipGradientNorm(store, 5.0);
  EXPECT_DOUBLE_EQ(p.grad()(1, 0), 0.4);
}

TEST(ClipTest, NonFiniteGradientThrows) {
  ParameterStore store;
  Parameter& p = store.Add("p", 2, 1);
  p.grad() << std::nan(""), 1.0;
  EXPECT_THROW(ClipGradientNorm(store, 5.0), NonFiniteGradient);
}

class CheckpointTest : public ::testing::Test {
 protected:
  std::filesystem::path Path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "pragref_nn_test";
    std::filesystem::create_directories(dir);
    return dir / name;
  }
};

TEST_F(CheckpointTest, RoundTripPreservesValuesBitExactly) {
  Rng rng(31);
  ParameterStore store;
  LstmCell cell(store, "enc", 3, 5);
  Parameter& emb = store.Add("emb", 7, 5);
  cell.Initialize(rng);
  InitNormal(emb, 0.01, rng);
  Adam adam;
  for (Parameter* p : store.params()) p->grad().setConstant(0.1);
  adam.Step(store);

  Checkpoint ckpt;
  ckpt.meta["kind"] = "test";
  AppendParameters(store, ckpt);
  AppendNamed(adam.ExportState(), "opt/", ckpt);
  WriteCheckpoint(Path("rt.ckpt"), ckpt);

  const Checkpoint back = ReadCheckpoint(Path("rt.ckpt"));
  EXPECT_EQ(back.meta["kind"], "test");
  ParameterStore other;
  LstmCell cell2(other, "enc", 3, 5);
  other.Add("emb", 7, 5);
  LoadParameters(back, other);
  for (size_t i = 0; i < store.params().size(); ++i) {
    EXPECT_EQ(store.params()[i]->value(), other.params()[i]->value());
  }
  Adam restored;
  restored.ImportState(ExtractNamed(back, "opt/"));
  EXPECT_EQ(restored.step_count(), 1);
  EXPECT_EQ(restored.ExportState().size(), adam.ExportState().size());
}

TEST_F(CheckpointTest, MissingAndCorruptFilesAreReported) {
  EXPECT_THROW(ReadCheckpoint(Path("does_not_exist.ckpt")), MissingCheckpoint);
  {
    std::ofstream out(Path("junk.ckpt"), std::ios::binary);
    out << "not a checkpoint at all";
  }
  EXPECT_THROW(ReadCheckpoint(Path("junk.ckpt")), CheckpointFormatError);

  ParameterStore store;
  store.Add("w", 2, 2);
  Checkpoint ckpt;
  AppendParameters(store, ckpt);
  WriteCheckpoint(Path("short.ckpt"), ckpt);
  std::filesystem::resize_file(Path("short.ckpt"),
                               std::filesystem::file_size(Path("short.ckpt")) - 8);
  EXPECT_THROW(ReadCheckpoint(Path("short.ckpt")), CheckpointFormatError);

  ParameterStore wrong;
  wrong.Add("w", 3, 2);
  EXPECT_THROW(LoadParameters(ckpt, wrong), CheckpointFormatError);
}

}  // namespace
}  // namespace pragref::nn
