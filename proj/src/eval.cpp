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

#include "eegatt/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "eegatt/errors.hpp"
#include "eegatt/random.hpp"

namespace eegatt::eval {

using features::SequenceSample;

FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw ContractError("stratified_kfold: class " + std::to_string(label) + " has " +
                          std::to_string(members.size()) + " samples, fewer than k=" + std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.test.resize(k);
  Rng rng(seed);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    for (std::size_t idx : members) {
      plan.test[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  plan.train.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(plan.test[f].begin(), plan.test[f].end());
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) plan.train[f].insert(plan.train[f].end(), plan.test[g].begin(), plan.test[g].end());
    }
    std::sort(plan.train[f].begin(), plan.train[f].end());
  }
  return plan;
}

Confusion confusion(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw ShapeError("confusion: prediction/truth length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == 1, t = truth[i] == 1;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Metrics metrics_from(const Confusion& c) {
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  Metrics m;
  const double n = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
  m.accuracy = ratio(static_cast<double>(c.tp + c.tn), n);
  m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  // Harmonic mean of precision and recall, written over counts.
  m.f1 = ratio(static_cast<double>(2 * c.tp), static_cast<double>(2 * c.tp + c.fp + c.fn));
  return m;
}

Metrics confusion_metrics(std::span<const int> pred, std::span<const int> truth) {
  return metrics_from(confusion(pred, truth));
}

void aggregate(CvReport& report) {
  const double n = static_cast<double>(report.folds.size());
  if (report.folds.empty()) return;
  auto fields = [](Metrics& m) { return std::array<double*, 4>{&m.accuracy, &m.recall, &m.precision, &m.f1}; };
  Metrics mean, sd;
  auto mf = fields(mean), sf = fields(sd);
  for (auto& fold : report.folds) {
    auto f = fields(fold.metrics);
    for (std::size_t i = 0; i < 4; ++i) *mf[i] += *f[i] / n;
  }
  for (auto& fold : report.folds) {
    auto f = fields(fold.metrics);
    for (std::size_t i = 0; i < 4; ++i) *sf[i] += (*f[i] - *mf[i]) * (*f[i] - *mf[i]) / n;
  }
  for (std::size_t i = 0; i < 4; ++i) *sf[i] = std::sqrt(*sf[i]);
  report.mean = mean;
  report.std = sd;
}

CvReport crossval(const models::ModelSpec& spec, std::span<const SequenceSample> dataset,
                  const train::TrainConfig& train_cfg, const CrossvalOptions& options) {
  spec.validate();
  train_cfg.validate();
  std::vector<int> labels;
  for (const auto& s : dataset) labels.push_back(s.label());
  const FoldPlan plan = stratified_kfold(labels, options.k, options.seed);

  CvReport report;
  report.model = std::string(models::to_string(spec.kind));
  report.dataset = options.dataset;
  report.k = options.k;
  report.folds.resize(options.k);

  auto run_fold = [&](std::size_t f) {
    std::vector<SequenceSample> train_set, test_set;
    for (std::size_t i : plan.train[f]) train_set.push_back(dataset[i]);
    for (std::size_t i : plan.test[f]) test_set.push_back(dataset[i]);
    if (options.standardize) {
      const auto scaler = features::FeatureScaler::fit(train_set);
      train_set = scaler.apply(train_set);
      test_set = scaler.apply(test_set);
    }
    models::Model model(spec, options.seed + f);
    train::TrainConfig cfg = train_cfg;
    cfg.seed = options.seed + f;
    auto fitted = train::fit(model, train_set, cfg);
    const auto pred = train::predict(model, test_set);
    std::vector<int> truth;
    for (const auto& s : test_set) truth.push_back(s.label());
    FoldResult& r = report.folds[f];
    r.fold = f;
    r.n_train = train_set.size();
    r.n_test = test_set.size();
    r.metrics = confusion_metrics(pred, truth);
    r.loss_curve = std::move(fitted.epoch_loss);
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, options.k));
  if (jobs == 1) {
    for (std::size_t f = 0; f < options.k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t j = 0; j < jobs; ++j) {
      workers.emplace_back([&]() {
        for (std::size_t f = next++; f < options.k; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  aggregate(report);
  return report;
}

}  // namespace eegatt::eval
