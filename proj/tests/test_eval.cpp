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

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "eegatt/eval.hpp"
#include "eegatt/random.hpp"

namespace ev = eegatt::eval;
namespace ft = eegatt::features;
namespace md = eegatt::models;

namespace {

std::vector<int> labels(std::size_t pos, std::size_t neg) {
  std::vector<int> out(pos, 1);
  out.insert(out.end(), neg, 0);
  return out;
}

void expect_partition(const ev::FoldPlan& plan, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (std::size_t f = 0; f < plan.k; ++f) {
    for (std::size_t i : plan.test[f]) ++seen[i];
    std::vector<std::size_t> all = plan.test[f];
    all.insert(all.end(), plan.train[f].begin(), plan.train[f].end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    EXPECT_EQ(all, expected);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

std::vector<ft::SequenceSample> separable(std::size_t n) {
  std::vector<ft::SequenceSample> out;
  eegatt::Rng rng(1);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    ft::SequenceSample s;
    s.recording_id = "r" + std::to_string(i);
    s.one_hot = label ? std::array<double, 2>{0, 1} : std::array<double, 2>{1, 0};
    ft::FrameFeatures f;
    f.recording_id = s.recording_id;
    f.label = label;
    f.channels = 1;
    f.fs = 250;
    f.R = {1.0};
    for (std::size_t k = 0; k < ft::kFeatureCount; ++k) f.X.push_back(rng.normal() + (label ? 2.0 : -2.0));
    s.frames = {f};
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Stratify, DivisibleCounts) {
  const auto y = labels(30, 70);
  const auto plan = ev::stratified_kfold(y, 10, 1);
  expect_partition(plan, y.size());
  for (const auto& test : plan.test) {
    const auto pos = std::count_if(test.begin(), test.end(), [&](std::size_t i) { return y[i] == 1; });
    EXPECT_EQ(pos, 3);
    EXPECT_EQ(test.size(), 10u);
  }
}

TEST(Stratify, RemainderSpreadsByOne) {
  const auto y = labels(31, 70);
  const auto plan = ev::stratified_kfold(y, 10, 2);
  expect_partition(plan, y.size());
  for (const auto& test : plan.test) {
    const auto pos = std::count_if(test.begin(), test.end(), [&](std::size_t i) { return y[i] == 1; });
    EXPECT_TRUE(pos == 3 || pos == 4);
  }
}

TEST(Stratify, DeviationBoundOnRandomLabels) {
  eegatt::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.below(9);
    std::vector<int> y;
    const std::size_t pos = k + rng.below(40), neg = k + rng.below(40);
    y = labels(pos, neg);
    rng.shuffle(y);
    const auto plan = ev::stratified_kfold(y, k, rng.next());
    expect_partition(plan, y.size());
    for (int cls : {0, 1}) {
      const double ideal = static_cast<double>(cls ? pos : neg) / static_cast<double>(k);
      for (const auto& test : plan.test) {
        const auto c = std::count_if(test.begin(), test.end(), [&](std::size_t i) { return y[i] == cls; });
        EXPECT_LT(std::abs(static_cast<double>(c) - ideal), 1.0);
      }
    }
  }
}

TEST(Stratify, Errors) {
  EXPECT_THROW(ev::stratified_kfold(labels(5, 20), 10, 0), eegatt::ContractError);
  EXPECT_THROW(ev::stratified_kfold(labels(5, 20), 1, 0), eegatt::ConfigError);
}

TEST(Stratify, SeedChangesAssignmentDeterministically) {
  const auto y = labels(20, 20);
  EXPECT_EQ(ev::stratified_kfold(y, 5, 9).test, ev::stratified_kfold(y, 5, 9).test);
  EXPECT_NE(ev::stratified_kfold(y, 5, 9).test, ev::stratified_kfold(y, 5, 10).test);
}

TEST(Metrics, HandOracle) {
  // TP=3, FP=1, FN=2, TN=4.
  const std::vector<int> truth{1, 1, 1, 0, 1, 1, 0, 0, 0, 0};
  const std::vector<int> pred{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const auto c = ev::confusion(pred, truth);
  EXPECT_EQ(c.tp, 3u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_EQ(c.tn, 4u);
  const auto m = ev::confusion_metrics(pred, truth);
  EXPECT_EQ(m.accuracy, 0.7);
  EXPECT_EQ(m.recall, 0.6);
  EXPECT_EQ(m.precision, 0.75);
  EXPECT_EQ(m.f1, 2.0 / 3.0);
}

TEST(Metrics, PerfectAndDegenerate) {
  const std::vector<int> truth{1, 0, 1, 1, 0};
  const auto perfect = ev::confusion_metrics(truth, truth);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const auto none = ev::confusion_metrics(std::vector<int>(5, 0), truth);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_THROW(ev::confusion_metrics(std::vector<int>{1}, truth), eegatt::ShapeError);
}

TEST(Metrics, PermutationInvariantAndBounded) {
  eegatt::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p(30), t(30);
    for (auto& v : p) v = rng.bernoulli(0.5);
    for (auto& v : t) v = rng.bernoulli(0.5);
    const auto m = ev::confusion_metrics(p, t);
    std::vector<std::size_t> order(30);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<int> p2, t2;
    for (auto i : order) {
      p2.push_back(p[i]);
      t2.push_back(t[i]);
    }
    const auto m2 = ev::confusion_metrics(p2, t2);
    EXPECT_EQ(m.f1, m2.f1);
    EXPECT_EQ(m.accuracy, m2.accuracy);
    EXPECT_GE(m.f1, 0.0);
    EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
    if (m.precision == m.recall) EXPECT_NEAR(m.f1, m.precision, 1e-15);
  }
}

TEST(Aggregate, PopulationStd) {
  ev::CvReport r;
  r.k = 2;
  r.folds.resize(2);
  r.folds[0].metrics = {0.5, 0.5, 0.5, 0.5};
  r.folds[1].metrics = {1.0, 1.0, 1.0, 1.0};
  ev::aggregate(r);
  EXPECT_EQ(r.mean.accuracy, 0.75);
  EXPECT_EQ(r.std.accuracy, 0.25);
}

TEST(Crossval, SeparableToyReachesPerfectF1) {
  const auto data = separable(30);
  auto spec = md::ModelSpec::defaults(md::ModelKind::lstm, 1, 1).capped(8);
  eegatt::train::TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.01;
  ev::CrossvalOptions opt;
  opt.k = 3;
  opt.seed = 5;
  const auto report = ev::crossval(spec, data, cfg, opt);
  EXPECT_EQ(report.folds.size(), 3u);
  EXPECT_EQ(report.mean.f1, 1.0);
}

TEST(Crossval, ConstantPredictorNearChance) {
  // Blank inputs and lr = 0 make every fold predict a single class.
  auto data = separable(40);
  for (auto& s : data)
    for (auto& f : s.frames) std::fill(f.X.begin(), f.X.end(), 0.0);
  eegatt::train::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  ev::CrossvalOptions opt;
  opt.k = 4;
  opt.standardize = false;
  const auto report = ev::crossval(md::ModelSpec::defaults(md::ModelKind::cnn, 1, 1), data, cfg, opt);
  EXPECT_NEAR(report.mean.accuracy, 0.5, 0.1);
}

TEST(Crossval, ParallelFoldsMatchSerial) {
  const auto data = separable(24);
  auto spec = md::ModelSpec::defaults(md::ModelKind::gnn, 1, 1).capped(4);
  eegatt::train::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  ev::CrossvalOptions opt;
  opt.k = 3;
  const auto serial = ev::crossval(spec, data, cfg, opt);
  opt.jobs = 3;
  const auto parallel = ev::crossval(spec, data, cfg, opt);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(serial.folds[f].loss_curve, parallel.folds[f].loss_curve);
}
