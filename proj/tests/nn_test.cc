// Copyright 2026 The ewer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "ewer/error.h"
#include "ewer/nn/adam.h"
#include "ewer/nn/checkpoint.h"
#include "ewer/nn/grad_check.h"
#include "ewer/nn/layers.h"
#include "ewer/nn/loss.h"
#include "ewer/rng.h"
#include "oracles.h"
#include "test_util.h"

namespace ewer::nn {
namespace {

Tensor<double> RandomTensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.Normal();
  return t;
}

// Weighted sum with fixed random weights, so every output element matters.
struct Projection {
  std::vector<double> w;
  explicit Projection(size_t n, uint64_t seed) : w(n) {
    Rng rng(seed);
    for (auto& v : w) v = rng.Normal();
  }
  double Loss(const Tensor<double>& y) const {
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  }
  Tensor<double> Grad(const Shape& shape) const { return Tensor<double>(shape, w); }
};

void AccumulateInto(Tensor<double>& x, const Tensor<double>& dx) {
  for (size_t i = 0; i < dx.size(); ++i) x.grad()[i] += dx[i];
}

TEST(DenseTest, ForwardExamples) {
  Dense<double> id(2, 2, Activation::kNone);
  id.weight().values() = {1, 0, 0, 1};
  Tensor<double> x({2, 2}, std::vector<double>{1, -2, 3, 4});
  EXPECT_TRUE(id.Forward(x).SameValues(x));

  Dense<double> d(2, 1, Activation::kNone);
  d.weight().values() = {1, 1};
  d.bias().values() = {0.5};
  EXPECT_DOUBLE_EQ(d.Forward(Tensor<double>({1, 2}, std::vector<double>{1, 2}))[0], 3.5);
}

TEST(DenseTest, ReluBlocksNegativePreactivations) {
  Dense<double> d(1, 1, Activation::kRelu);
  d.weight().values() = {1.0};
  d.bias().values() = {-5.0};
  const Tensor<double> y = d.Forward(Tensor<double>({1, 1}, std::vector<double>{2.0}));
  EXPECT_EQ(y[0], 0.0);
  const Tensor<double> dx = d.Backward(Tensor<double>({1, 1}, std::vector<double>{1.0}));
  EXPECT_EQ(dx[0], 0.0);
  EXPECT_EQ(d.weight().grad()[0], 0.0);
}

TEST(DenseTest, ShapeMismatchNamesBothShapes) {
  Dense<double> d(3, 2, Activation::kNone);
  try {
    d.Forward(Tensor<double>({1, 4}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[1,4]"), std::string::npos);
    EXPECT_NE(msg.find("[3,2]"), std::string::npos);
  }
}

TEST(DenseTest, GradientCheck) {
  for (Activation act : {Activation::kNone, Activation::kRelu, Activation::kSigmoid}) {
    Rng rng(21);
    Dense<double> d(5, 4, act);
    d.Initialize(rng, InitScheme::kHeUniform);
    for (auto& b : d.bias().values()) b = 0.1 * rng.Normal();
    Tensor<double> x = RandomTensor({3, 5}, rng);
    x.EnableGrad();
    const Projection proj(12, 2);
    auto loss = [&] { return proj.Loss(d.Forward(x)); };
    auto backward = [&] {
      d.Forward(x);
      AccumulateInto(x, d.Backward(proj.Grad({3, 4})));
    };
    std::vector<NamedParam<double>> targets;
    d.CollectParameters("dense", targets);
    targets.push_back({"x", &x});
    const GradCheckResult r = GradCheck(loss, backward, targets);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_tensor << "[" << r.worst_index << "]";
    EXPECT_EQ(r.checked, 20u + 4u + 15u);
  }
}

SequenceBatch<double> RandomSequences(size_t channels, const std::vector<size_t>& lengths,
                                      Rng& rng) {
  size_t t_max = 0;
  for (size_t l : lengths) t_max = std::max(t_max, l);
  SequenceBatch<double> x{Tensor<double>({lengths.size(), channels, t_max}), lengths};
  for (size_t b = 0; b < lengths.size(); ++b) {
    for (size_t c = 0; c < channels; ++c) {
      for (size_t t = 0; t < lengths[b]; ++t) x.values.at(b, c, t) = rng.Normal();
    }
  }
  return x;
}

TEST(Conv1dTest, OutputLengthsAndPadding) {
  EXPECT_EQ(Conv1d<double>::OutputLength(10, 2), 5u);
  EXPECT_EQ(Conv1d<double>::OutputLength(11, 2), 6u);
  EXPECT_EQ(Conv1d<double>::OutputLength(7, 1), 7u);
  EXPECT_EQ(Conv1d<double>::PadLeft(7, 5, 1), 2u);
  EXPECT_EQ(Conv1d<double>::PadLeft(10, 7, 2), 2u);
}

TEST(Conv1dTest, UnitKernelMixesChannels) {
  Conv1d<double> conv(2, 1, 1, 1, Activation::kNone);
  conv.kernel().values() = {1.0, 1.0};
  Rng rng(1);
  const auto x = RandomSequences(2, {4}, rng);
  const auto y = conv.Forward(x);
  for (size_t t = 0; t < 4; ++t) {
    EXPECT_DOUBLE_EQ(y.values.at(0, 0, t), x.values.at(0, 0, t) + x.values.at(0, 1, t));
  }
  Conv1d<double> single(1, 1, 1, 1, Activation::kNone);
  single.kernel().values() = {1.0};
  const auto x1 = RandomSequences(1, {10}, rng);
  EXPECT_TRUE(single.Forward(x1).values.SameValues(x1.values));
}

TEST(Conv1dTest, MatchesBruteForceOracle) {
  Rng rng(4);
  for (size_t stride : {1u, 2u}) {
    for (size_t k : {1u, 3u, 4u, 5u, 7u}) {
      Conv1d<double> conv(3, 4, k, stride, Activation::kNone);
      conv.Initialize(rng, InitScheme::kHeUniform);
      for (auto& b : conv.bias().values()) b = rng.Normal();
      const std::vector<size_t> lengths = {9, 3, 1, 12};
      const auto x = RandomSequences(3, lengths, rng);
      const auto y = conv.Forward(x);
      for (size_t b = 0; b < lengths.size(); ++b) {
        std::vector<std::vector<double>> xs(3, std::vector<double>(lengths[b]));
        for (size_t c = 0; c < 3; ++c) {
          for (size_t t = 0; t < lengths[b]; ++t) xs[c][t] = x.values.at(b, c, t);
        }
        std::vector<std::vector<std::vector<double>>> w(
            4, std::vector<std::vector<double>>(3, std::vector<double>(k)));
        for (size_t o = 0; o < 4; ++o) {
          for (size_t c = 0; c < 3; ++c) {
            for (size_t j = 0; j < k; ++j) w[o][c][j] = conv.kernel().at(o, c, j);
          }
        }
        const std::vector<double> bias(conv.bias().values().begin(), conv.bias().values().end());
        const auto want = testing::BruteConv1d(xs, w, bias, stride);
        ASSERT_EQ(y.lengths[b], want[0].size());
        for (size_t o = 0; o < 4; ++o) {
          for (size_t t = 0; t < want[o].size(); ++t) {
            EXPECT_NEAR(y.values.at(b, o, t), want[o][t], 1e-6);
          }
          for (size_t t = want[o].size(); t < y.max_length(); ++t) {
            EXPECT_EQ(y.values.at(b, o, t), 0.0);
          }
        }
      }
    }
  }
}

TEST(Conv1dTest, BatchCompositionDoesNotChangeResults) {
  Rng rng(8);
  Conv1d<double> conv(2, 3, 5, 2, Activation::kRelu);
  conv.Initialize(rng, InitScheme::kHeUniform);
  const auto pair = RandomSequences(2, {6, 15}, rng);
  SequenceBatch<double> alone{Tensor<double>({1, 2, 6}), {6}};
  for (size_t c = 0; c < 2; ++c) {
    for (size_t t = 0; t < 6; ++t) alone.values.at(0, c, t) = pair.values.at(0, c, t);
  }
  const auto y_pair = conv.Forward(pair);
  const auto y_alone = conv.Forward(alone);
  for (size_t o = 0; o < 3; ++o) {
    for (size_t t = 0; t < 3; ++t) EXPECT_EQ(y_pair.values.at(0, o, t), y_alone.values.at(0, o, t));
  }
}

TEST(Conv1dTest, GradientCheckOfAStack) {
  Rng rng(12);
  Conv1d<double> c1(2, 3, 5, 1, Activation::kRelu);
  Conv1d<double> c2(3, 3, 7, 2, Activation::kRelu);
  Conv1d<double> c3(3, 2, 1, 2, Activation::kNone);
  for (auto* c : {&c1, &c2, &c3}) {
    c->Initialize(rng, InitScheme::kHeUniform);
    for (auto& b : c->bias().values()) b = 0.05 * rng.Normal();
  }
  SequenceBatch<double> x = RandomSequences(2, {11, 6}, rng);
  x.values.EnableGrad();
  auto run = [&] { return c3.Forward(c2.Forward(c1.Forward(x))); };
  const Shape out_shape = run().values.shape();
  const Projection proj(NumElements(out_shape), 3);
  auto loss = [&] {
    const auto y = run();
    // Only valid positions carry loss; padding is zero anyway.
    return proj.Loss(y.values);
  };
  auto backward = [&] {
    run();
    AccumulateInto(x.values, c1.Backward(c2.Backward(c3.Backward(proj.Grad(out_shape)))));
  };
  std::vector<NamedParam<double>> targets;
  c1.CollectParameters("c1", targets);
  c2.CollectParameters("c2", targets);
  c3.CollectParameters("c3", targets);
  targets.push_back({"x", &x.values});
  const GradCheckResult r = GradCheck(loss, backward, targets);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_tensor << "[" << r.worst_index << "]";
}

TEST(EmbeddingTest, LookupAndScatter) {
  Embedding<double> e(4, 4);
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) e.table().at(i, j) = i == j ? 1.0 : 0.0;
  }
  const std::vector<int32_t> ids = {2, 0, 3, 2};
  const Tensor<double> y = e.Forward(ids, 2, 2);
  for (size_t i = 0; i < ids.size(); ++i) {
    for (size_t j = 0; j < 4; ++j) EXPECT_EQ(y[i * 4 + j], static_cast<size_t>(ids[i]) == j);
  }
  const std::vector<int32_t> zeros(6, 0);
  const Tensor<double> z = e.Forward(zeros, 3, 2);
  for (size_t i = 0; i < 6; ++i) EXPECT_EQ(z[i * 4], 1.0);

  e.table().ZeroGrad();
  e.Forward(ids, 2, 2);
  e.Backward(Tensor<double>({2, 2, 4}, 1.0));
  for (size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(e.table().grad()[1 * 4 + j], 0.0);  // row 1 was never looked up
    EXPECT_EQ(e.table().grad()[2 * 4 + j], 2.0);
    EXPECT_EQ(e.table().grad()[3 * 4 + j], 1.0);
  }
}

TEST(EmbeddingTest, OutOfRangeIdIsAnError) {
  Embedding<double> e(3, 2);
  const std::vector<int32_t> ids = {0, 3};
  EXPECT_THROW(e.Forward(ids, 1, 2), ValidationError);
  const std::vector<int32_t> neg = {-1};
  EXPECT_THROW(e.Forward(neg, 1, 1), ValidationError);
}

TEST(EmbeddingTest, GradientCheck) {
  Rng rng(30);
  Embedding<double> e(6, 3);
  e.Initialize(rng);
  const std::vector<int32_t> ids = {1, 5, 1, 0, 2, 2};
  const Projection proj(18, 4);
  auto loss = [&] { return proj.Loss(e.Forward(ids, 2, 3)); };
  auto backward = [&] {
    e.Forward(ids, 2, 3);
    e.Backward(proj.Grad({2, 3, 3}));
  };
  std::vector<NamedParam<double>> targets;
  e.CollectParameters("emb", targets);
  EXPECT_LT(GradCheck(loss, backward, targets).max_rel_error, 1e-4);
}

TEST(GlobalMaxPoolTest, Examples) {
  GlobalMaxPool<double> pool;
  SequenceBatch<double> x{Tensor<double>({1, 1, 3}, std::vector<double>{3, -1, 7}), {3}};
  EXPECT_EQ(pool.Forward(x)[0], 7.0);
  SequenceBatch<double> one{Tensor<double>({1, 2, 1}, std::vector<double>{4, -2}), {1}};
  const Tensor<double> y = pool.Forward(one);
  EXPECT_EQ(y.shape(), (Shape{1, 2}));
  EXPECT_EQ(y[0], 4.0);
  EXPECT_EQ(y[1], -2.0);
}

TEST(GlobalMaxPoolTest, TieRoutesGradientToFirstIndex) {
  GlobalMaxPool<double> pool;
  SequenceBatch<double> x{Tensor<double>({1, 1, 2}, std::vector<double>{5, 5}), {2}};
  pool.Forward(x);
  const Tensor<double> dx = pool.Backward(Tensor<double>({1, 1}, 1.0));
  EXPECT_EQ(dx[0], 1.0);
  EXPECT_EQ(dx[1], 0.0);
}

TEST(GlobalMaxPoolTest, IgnoresPaddingAndRejectsEmpty) {
  GlobalMaxPool<double> pool;
  SequenceBatch<double> x{Tensor<double>({1, 1, 3}, std::vector<double>{-3, -2, 0}), {2}};
  EXPECT_EQ(pool.Forward(x)[0], -2.0);
  SequenceBatch<double> empty{Tensor<double>({1, 1, 3}), {0}};
  EXPECT_THROW(pool.Forward(empty), ShapeError);
}

TEST(GlobalMaxPoolTest, GradientCheck) {
  Rng rng(6);
  GlobalMaxPool<double> pool;
  SequenceBatch<double> x = RandomSequences(3, {5, 2}, rng);
  x.values.EnableGrad();
  const Projection proj(6, 9);
  auto loss = [&] { return proj.Loss(pool.Forward(x)); };
  auto backward = [&] {
    pool.Forward(x);
    AccumulateInto(x.values, pool.Backward(proj.Grad({2, 3})));
  };
  EXPECT_LT(GradCheck(loss, backward, {{"x", &x.values}}).max_rel_error, 1e-4);
}

TEST(DropoutTest, EvalAndZeroRateAreIdentity) {
  Rng rng(1);
  const Tensor<double> x = RandomTensor({4, 5}, rng);
  Dropout<double> d(0.2);
  EXPECT_TRUE(d.Forward(x, false, rng).SameValues(x));
  Dropout<double> none(0.0);
  EXPECT_TRUE(none.Forward(x, true, rng).SameValues(x));
  EXPECT_TRUE(none.Forward(x, false, rng).SameValues(x));
}

TEST(DropoutTest, KeptFractionAndScaling) {
  Rng rng(77);
  Dropout<double> d(0.2);
  const Tensor<double> x({100000}, 1.0);
  const Tensor<double> y = d.Forward(x, true, rng);
  size_t kept = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0) {
      ++kept;
      EXPECT_DOUBLE_EQ(y[i], 1.25);
    }
  }
  EXPECT_NEAR(static_cast<double>(kept) / 100000.0, 0.8, 0.01);
  const Tensor<double> g = d.Backward(Tensor<double>({100000}, 1.0));
  EXPECT_TRUE(g.SameValues(y));
}

TEST(DropoutTest, InvalidRate) {
  EXPECT_THROW(Dropout<double>(1.0), ConfigError);
  EXPECT_THROW(Dropout<double>(-0.1), ConfigError);
}

TEST(MseLossTest, ValuesAndGradient) {
  const Tensor<double> p({2, 1}, std::vector<double>{0.3, 0.9});
  EXPECT_EQ(MseLoss(p, p).loss, 0.0);
  const Tensor<double> a({1, 1}, std::vector<double>{0.5}), b({1, 1}, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(MseLoss(a, b).loss, 0.25);
  EXPECT_THROW(MseLoss(a, p), ShapeError);

  Rng rng(3);
  Tensor<double> pred = RandomTensor({5, 1}, rng);
  const Tensor<double> target = RandomTensor({5, 1}, rng);
  pred.EnableGrad();
  auto loss = [&] { return MseLoss(pred, target).loss; };
  auto backward = [&] { AccumulateInto(pred, MseLoss(pred, target).grad); };
  EXPECT_LT(GradCheck(loss, backward, {{"pred", &pred}}, 1e-5).max_rel_error, 1e-6);
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Tensor<float> w({3}, std::vector<float>{1, 2, 3});
  w.EnableGrad();
  Adam<float> adam;
  for (int i = 0; i < 3; ++i) adam.Step({&w});
  EXPECT_EQ(w.values(), (Tensor<float>::Storage{1, 2, 3}));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Tensor<double> w({3}, std::vector<double>{0.0, 1.0, -1.0});
  w.EnableGrad();
  w.grad() = {0.5, -3.0, 100.0};
  Adam<double> adam(AdamConfig{1e-3, 0.9, 0.999, 1e-8});
  adam.Step({&w});
  // m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(w[0], -1e-3, 1e-10);
  EXPECT_NEAR(w[1], 1.0 + 1e-3, 1e-10);
  EXPECT_NEAR(w[2], -1.0 - 1e-3, 1e-10);
}

TEST(AdamTest, TrajectoriesAreReproducible) {
  auto run = [] {
    Tensor<double> w({4}, 0.5);
    w.EnableGrad();
    Adam<double> adam;
    for (int step = 0; step < 20; ++step) {
      for (size_t i = 0; i < 4; ++i) w.grad()[i] = std::sin(step + w[i] * (i + 1));
      adam.Step({&w});
    }
    return w.values();
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, ShapeChangeIsAnError) {
  Tensor<double> a({2}), b({3});
  a.EnableGrad();
  b.EnableGrad();
  Adam<double> adam;
  adam.Step({&a});
  EXPECT_THROW(adam.Step({&b}), ShapeError);
  EXPECT_THROW(adam.Step({&a, &b}), ShapeError);
}

TEST(CheckpointTest, BitExactRoundTrip) {
  std::vector<NamedTensor> tensors = {
      {"a.weight", {2, 3}, {1.5f, -0.0f, 3.25e-20f, 1e30f, -7.0f, 0.1f}},
      {"b", {}, {42.0f}},
      {"empty", {0}, {}},
  };
  const std::string dir = testing::ScratchDir("ckpt");
  SaveCheckpoint(dir + "/x.ckpt", tensors);
  const auto back = LoadCheckpoint(dir + "/x.ckpt");
  ASSERT_EQ(back.size(), tensors.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, tensors[i].name);
    EXPECT_EQ(back[i].shape, tensors[i].shape);
    ASSERT_EQ(back[i].values.size(), tensors[i].values.size());
    for (size_t j = 0; j < back[i].values.size(); ++j) {
      EXPECT_EQ(std::bit_cast<uint32_t>(back[i].values[j]),
                std::bit_cast<uint32_t>(tensors[i].values[j]));
    }
  }
  const std::string bytes = testing::ReadText(dir + "/x.ckpt");
  EXPECT_EQ(bytes.substr(0, 9), "EWER2CKPT");
  EXPECT_EQ(bytes[9], 1);  // little-endian version 1
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  const std::string dir = testing::ScratchDir("ckpt_bad");
  testing::WriteText(dir + "/magic.ckpt", "NOTACKPT\x01\x00\x00\x00");
  EXPECT_THROW(LoadCheckpoint(dir + "/magic.ckpt"), ValidationError);
  std::string bytes = EncodeCheckpoint({{"w", {4}, {1, 2, 3, 4}}});
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(DecodeCheckpoint(bytes), ValidationError);
  EXPECT_THROW(EncodeCheckpoint({{"w", {4}, {1, 2}}}), ShapeError);
  EXPECT_THROW(LoadCheckpoint(dir + "/none.ckpt"), IoError);
}

TEST(GradCheckTest, NonFiniteLossIsAnError) {
  Tensor<double> x({1}, 0.0);
  auto loss = [&] { return std::log(x[0]); };
  auto backward = [] {};
  EXPECT_THROW(GradCheck(loss, backward, {{"x", &x}}), Error);
}

}  // namespace
}  // namespace ewer::nn
