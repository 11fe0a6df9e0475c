/*
 * Copyright 2026 The eegatt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "eegatt/ndgrad.hpp"
#include "eegatt/random.hpp"

namespace nd = eegatt::nd;
using nd::NdValue;
using nd::Tape;

namespace {

std::vector<double> values(const NdValue& v) { return {v.data().begin(), v.data().end()}; }
std::vector<double> grads(const NdValue& v) { return {v.grad().begin(), v.grad().end()}; }

NdValue random_value(nd::Shape shape, eegatt::Rng& rng, bool rg = true) {
  std::vector<double> d(nd::numel(shape));
  for (double& x : d) x = rng.uniform(-2, 2);
  return NdValue(std::move(shape), std::move(d), rg);
}

// Naive triple loop used as the matmul oracle.
std::vector<double> naive_matmul(const NdValue& a, const NdValue& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a.data()[i * k + p] * b.data()[p * n + j];
  return c;
}

}  // namespace

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  Tape t;
  NdValue eye({2, 2}, {1, 0, 0, 1});
  NdValue b({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(values(nd::matmul(t, eye, b)), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Matmul, HandComputedProduct) {
  Tape t;
  NdValue a({2, 2}, {1, 2, 3, 4});
  NdValue b({2, 2}, {5, 6, 7, 8});
  const auto c = nd::matmul(t, a, b);
  EXPECT_EQ(c.shape(), (nd::Shape{2, 2}));
  EXPECT_EQ(values(c), (std::vector<double>{19, 22, 43, 50}));
}

TEST(Matmul, ZeroOperand) {
  Tape t;
  eegatt::Rng rng(3);
  const auto c = nd::matmul(t, NdValue::zeros({2, 3}), random_value({3, 4}, rng, false));
  EXPECT_EQ(c.shape(), (nd::Shape{2, 4}));
  for (double v : c.data()) EXPECT_EQ(v, 0.0);
}

TEST(Matmul, MatchesNaiveProductOnRandomShapes) {
  eegatt::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(7), k = 1 + rng.below(7), n = 1 + rng.below(7);
    Tape t;
    const auto a = random_value({m, k}, rng, false), b = random_value({k, n}, rng, false);
    const auto c = nd::matmul(t, a, b);
    const auto ref = naive_matmul(a, b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(c.data()[i], ref[i], 1e-12);
  }
}

TEST(Matmul, InnerMismatchIsShapeError) {
  Tape t;
  EXPECT_THROW(nd::matmul(t, NdValue::zeros({2, 3}), NdValue::zeros({2, 3})), eegatt::ShapeError);
}

TEST(Matmul, GradientRules) {
  eegatt::Rng rng(5);
  auto a = random_value({3, 4}, rng), b = random_value({4, 2}, rng);
  std::vector<NdValue> params{a, b};
  const double err = nd::grad_check([&](Tape& t) { return nd::sum_all(t, nd::mul(t, nd::matmul(t, a, b), nd::matmul(t, a, b))); },
                                    params);
  EXPECT_LT(err, 1e-8);
}

TEST(Matmul, BatchedAndFlattenedForms) {
  eegatt::Rng rng(6);
  auto a = random_value({2, 3, 4}, rng), b = random_value({4, 5}, rng), c = random_value({2, 4, 2}, rng);
  std::vector<NdValue> params{a, b, c};
  const double err = nd::grad_check(
      [&](Tape& t) {
        auto x = nd::activation(t, nd::Activation::tanh, nd::matmul(t, a, b));
        auto y = nd::activation(t, nd::Activation::tanh, nd::matmul(t, a, c));
        return nd::add(t, nd::sum_all(t, x), nd::sum_all(t, y));
      },
      params);
  EXPECT_LT(err, 1e-8);
}

TEST(Activation, ClosedFormPoints) {
  Tape t;
  const NdValue zero = NdValue::scalar(0);
  EXPECT_EQ(nd::activation(t, nd::Activation::tanh, zero).item(), 0.0);
  EXPECT_EQ(nd::activation(t, nd::Activation::sigmoid, zero).item(), 0.5);
  EXPECT_DOUBLE_EQ(nd::activation(t, nd::Activation::leaky_relu, NdValue::scalar(-1), 0.2).item(), -0.2);
  EXPECT_EQ(nd::activation(t, nd::Activation::relu, NdValue::scalar(-3)).item(), 0.0);
  EXPECT_NEAR(nd::activation(t, nd::Activation::elu, NdValue::scalar(-1)).item(), std::exp(-1.0) - 1, 1e-15);
}

TEST(Activation, GradientsMatchFiniteDifferences) {
  eegatt::Rng rng(8);
  for (auto kind : {nd::Activation::sigmoid, nd::Activation::tanh, nd::Activation::relu, nd::Activation::leaky_relu,
                    nd::Activation::elu}) {
    auto x = random_value({3, 5}, rng);
    for (double& v : x.mutable_data()) {
      if (std::abs(v) < 1e-3) v = 0.5;  // keep clear of the kinks
    }
    const double err = nd::grad_check(
        [&](Tape& t, const NdValue& in) { return nd::sum_all(t, nd::mul(t, nd::activation(t, kind, in), in)); }, x,
        1e-5);
    EXPECT_LT(err, 1e-7) << static_cast<int>(kind);
  }
}

TEST(Softmax, ClosedForms) {
  Tape t;
  EXPECT_EQ(values(nd::softmax(t, NdValue({2}, {0, 0}), 0)), (std::vector<double>{0.5, 0.5}));
  for (double c : {-1000.0, -3.0, 0.0, 7.5, 1000.0}) {
    {
      const auto held = nd::softmax(t, NdValue::filled({4}, c), 0);
      for (double v : held.data()) EXPECT_NEAR(v, 0.25, 1e-15);
    }
  }
  const auto p = nd::softmax(t, NdValue({2}, {0, std::log(3.0)}), 0);
  EXPECT_NEAR(p.data()[0], 0.25, 1e-15);
  EXPECT_NEAR(p.data()[1], 0.75, 1e-15);
}

TEST(Softmax, SlicesSumToOneAndAreShiftInvariant) {
  eegatt::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    const auto x = random_value({3, 4, 5}, rng, false);
    const std::size_t axis = rng.below(3);
    const double shift = rng.uniform(-50, 50);
    const auto p = nd::softmax(t, x, axis);
    const auto q = nd::softmax(t, nd::add(t, x, NdValue::scalar(shift)), axis);
    const auto sums = nd::reduce(t, nd::Reduce::sum, p, axis);
    for (double s : sums.data()) EXPECT_NEAR(s, 1.0, 1e-12);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GT(p.data()[i], 0.0);
      EXPECT_NEAR(p.data()[i], q.data()[i], 1e-12);
    }
  }
}

TEST(Softmax, CrossEntropyGradCheck) {
  eegatt::Rng rng(4);
  const NdValue y({3, 2}, {1, 0, 0, 1, 1, 0});
  auto x = random_value({3, 2}, rng);
  const double err = nd::grad_check(
      [&](Tape& t, const NdValue& in) {
        auto p = nd::softmax(t, in, 1);
        auto logp = nd::make_result("log", p.shape(), [&] {
          std::vector<double> d;
          for (double v : p.data()) d.push_back(std::log(v));
          return d;
        }(), {&p});
        if (logp.requires_grad()) {
          t.record(logp, [p, logp]() {
            auto gp = p.mutable_grad();
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += logp.grad()[i] / p.data()[i];
          });
        }
        return nd::scale(t, nd::sum_all(t, nd::mul(t, y, logp)), -1.0 / 3);
      },
      x, 1e-5);
  EXPECT_LT(err, 1e-6);
}

TEST(Conv1d, IdentityKernel) {
  Tape t;
  const NdValue x({1, 5}, {3, -1, 4, 1, -5});
  const auto y = nd::conv1d(t, x, NdValue({1, 1, 3}, {0, 1, 0}), NdValue::zeros({1}));
  EXPECT_EQ(values(y), values(x));
}

TEST(Conv1d, OnesKernelWithZeroPadding) {
  Tape t;
  const auto y = nd::conv1d(t, NdValue({1, 4}, {1, 2, 3, 4}), NdValue({1, 1, 3}, {1, 1, 1}), NdValue::zeros({1}));
  EXPECT_EQ(values(y), (std::vector<double>{3, 6, 9, 7}));
}

TEST(Conv1d, ZeroKernelGivesBias) {
  Tape t;
  const auto y = nd::conv1d(t, NdValue({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8}), NdValue::zeros({3, 2, 3}),
                            NdValue({3}, {0.5, -1, 2}));
  EXPECT_EQ(y.shape(), (nd::Shape{3, 4}));
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y.at({o, i}), (std::vector<double>{0.5, -1, 2})[o]);
}

TEST(Conv1d, ContractErrors) {
  Tape t;
  EXPECT_THROW(nd::conv1d(t, NdValue::zeros({1, 4}), NdValue::zeros({1, 1, 2}), NdValue::zeros({1})),
               eegatt::ConfigError);
  EXPECT_THROW(nd::conv1d(t, NdValue::zeros({1, 2}), NdValue::zeros({1, 1, 3}), NdValue::zeros({1})),
               eegatt::ContractError);
}

TEST(Conv1d, GradCheckBatched) {
  eegatt::Rng rng(12);
  auto x = random_value({2, 3, 7}, rng), k = random_value({4, 3, 5}, rng), b = random_value({4}, rng);
  std::vector<NdValue> params{x, k, b};
  const double err = nd::grad_check(
      [&](Tape& t) { return nd::sum_all(t, nd::activation(t, nd::Activation::tanh, nd::conv1d(t, x, k, b))); },
      params);
  EXPECT_LT(err, 1e-8);
}

TEST(Reduce, ValuesAndMaxTieRule) {
  Tape t;
  EXPECT_EQ(nd::reduce(t, nd::Reduce::mean, NdValue({3}, {1, 2, 3}), 0).item(), 2.0);
  EXPECT_EQ(nd::reduce(t, nd::Reduce::sum, NdValue::zeros({4}), 0).item(), 0.0);
  NdValue x({3}, {1, 5, 5}, true);
  const auto m = nd::reduce(t, nd::Reduce::max, x, 0);
  EXPECT_EQ(m.item(), 5.0);
  nd::backward(m, t);
  EXPECT_EQ(grads(x), (std::vector<double>{0, 1, 0}));
}

TEST(Reduce, GradCheckAllKindsAndAxes) {
  eegatt::Rng rng(13);
  for (auto kind : {nd::Reduce::sum, nd::Reduce::mean, nd::Reduce::max}) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      auto x = random_value({2, 3, 4}, rng);
      const double err = nd::grad_check(
          [&](Tape& t, const NdValue& in) {
            auto r = nd::reduce(t, kind, in, axis);
            return nd::sum_all(t, nd::mul(t, r, r));
          },
          x, 1e-6);
      EXPECT_LT(err, 1e-6);
    }
  }
}

TEST(Backward, SumGivesOnes) {
  Tape t;
  NdValue x = NdValue::filled({2, 3}, 1.5, true);
  nd::backward(nd::sum_all(t, x), t);
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
  EXPECT_TRUE(t.empty());
}

TEST(Backward, SquareAtThree) {
  Tape t;
  NdValue x({1}, {3}, true);
  nd::backward(nd::sum_all(t, nd::mul(t, x, x)), t);
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(Backward, UnusedLeafKeepsZeroGradient) {
  Tape t;
  NdValue x({2}, {1, 2}, true), unused({3}, {1, 2, 3}, true);
  nd::backward(nd::sum_all(t, x), t);
  for (double g : unused.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NonScalarLossIsContractError) {
  Tape t;
  NdValue x({2}, {1, 2}, true);
  const auto y = nd::scale(t, x, 2.0);
  EXPECT_THROW(nd::backward(y, t), eegatt::ContractError);
}

TEST(Backward, LossMustComeFromTape) {
  Tape t;
  EXPECT_THROW(nd::backward(NdValue::scalar(1.0, true), t), eegatt::ContractError);
}

TEST(Backward, LinearOverSummedLosses) {
  eegatt::Rng rng(31);
  const auto x0 = random_value({3, 3}, rng);
  auto f = [](Tape& t, const NdValue& x) { return nd::sum_all(t, nd::activation(t, nd::Activation::tanh, nd::matmul(t, x, x))); };
  auto g = [](Tape& t, const NdValue& x) { return nd::sum_all(t, nd::softmax(t, nd::mul(t, x, x), 1)); };
  auto grad_of = [&](auto loss) {
    NdValue x = x0.detach(true);
    Tape t;
    nd::backward(loss(t, x), t);
    return grads(x);
  };
  const auto gf = grad_of(f), gg = grad_of(g);
  const auto gsum = grad_of([&](Tape& t, const NdValue& x) { return nd::add(t, f(t, x), g(t, x)); });
  for (std::size_t i = 0; i < gsum.size(); ++i) EXPECT_NEAR(gsum[i], gf[i] + gg[i], 1e-12);
}

TEST(Numeric, NonFiniteOutputThrows) {
  Tape t;
  EXPECT_THROW(nd::mul(t, NdValue::scalar(1e200), NdValue::scalar(1e200)), eegatt::NumericError);
}

TEST(Layout, ReshapeSliceConcatGradCheck) {
  eegatt::Rng rng(17);
  auto a = random_value({2, 6}, rng), b = random_value({3, 2}, rng);
  std::vector<NdValue> params{a, b};
  const double err = nd::grad_check(
      [&](Tape& t) {
        auto r = nd::reshape(t, a, {4, 3});
        auto s = nd::slice(t, r, 1, 1, 3);                  // [4 x 2]
        auto c = nd::concat(t, {s, b}, 0);                  // [7 x 2]
        auto e = nd::expand(t, nd::slice(t, c, 0, 0, 1), {5, 2});
        auto w = nd::sub(t, nd::mul(t, c, c), nd::sum_all(t, e));
        return nd::sum_all(t, nd::activation(t, nd::Activation::sigmoid, w));
      },
      params);
  EXPECT_LT(err, 1e-8);
}

TEST(Broadcast, RowAndColumnOperands) {
  Tape t;
  const auto y = nd::add(t, NdValue({2, 1}, {10, 20}), NdValue({3}, {1, 2, 3}));
  EXPECT_EQ(y.shape(), (nd::Shape{2, 3}));
  EXPECT_EQ(values(y), (std::vector<double>{11, 12, 13, 21, 22, 23}));
  EXPECT_THROW(nd::add(t, NdValue::zeros({2, 3}), NdValue::zeros({2})), eegatt::ShapeError);
}

TEST(GradCheck, LinearMapHasZeroError) {
  eegatt::Rng rng(1);
  const auto x = random_value({4, 3}, rng);
  EXPECT_LT(nd::grad_check([](Tape& t, const NdValue& in) { return nd::sum_all(t, in); }, x, 1e-5), 1e-9);
}

TEST(GradCheck, DetectsWrongRule) {
  // d(x^2)/dx recorded as x instead of 2x.
  auto bad_square = [](Tape& t, const NdValue& x) {
    std::vector<double> d;
    for (double v : x.data()) d.push_back(v * v);
    auto y = nd::make_result("bad_square", x.shape(), std::move(d), {&x});
    if (y.requires_grad()) {
      t.record(y, [x, y]() {
        auto gx = x.mutable_grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += y.grad()[i] * x.data()[i];
      });
    }
    return nd::sum_all(t, y);
  };
  eegatt::Rng rng(2);
  const auto x = random_value({5}, rng);
  EXPECT_GT(nd::grad_check(bad_square, x, 1e-5), 1e-2);
}
