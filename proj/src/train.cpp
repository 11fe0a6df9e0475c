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

#include "eegatt/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegatt/errors.hpp"

namespace eegatt::train {

using features::SequenceSample;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (learning_rate && !(*learning_rate >= 0)) throw ConfigError("learning rate must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("Adam epsilon must be positive");
}

namespace {

void check_pair(const char* op, const NdValue& p, const NdValue& y) {
  if (p.rank() != 2 || p.shape() != y.shape()) {
    throw ShapeError(std::string(op) + ": " + nd::to_string(p.shape()) + " vs targets " + nd::to_string(y.shape()));
  }
}

}  // namespace

NdValue cross_entropy(Tape& tape, const NdValue& probabilities, const NdValue& targets) {
  check_pair("cross_entropy", probabilities, targets);
  const std::size_t B = probabilities.dim(0);
  const auto p = probabilities.data();
  const auto y = targets.data();
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 0) total -= y[i] * std::log(std::max(p[i], kProbabilityFloor));
  }
  NdValue loss = nd::make_result("cross_entropy", {1}, {total / static_cast<double>(B)}, {&probabilities});
  if (loss.requires_grad()) {
    tape.record(loss, [probabilities, targets, loss, B]() mutable {
      const double g = loss.grad()[0] / static_cast<double>(B);
      const auto p = probabilities.data();
      const auto y = targets.data();
      auto gp = probabilities.mutable_grad();
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (y[i] != 0 && p[i] > kProbabilityFloor) gp[i] -= g * y[i] / p[i];
      }
    });
  }
  return loss;
}

NdValue softmax_cross_entropy(Tape& tape, const NdValue& logits, const NdValue& targets) {
  check_pair("softmax_cross_entropy", logits, targets);
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  const auto z = logits.data();
  const auto y = targets.data();
  std::vector<double> probs(z.size());
  double total = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const double* row = z.data() + b * K;
    const double mx = *std::max_element(row, row + K);
    double denom = 0;
    for (std::size_t j = 0; j < K; ++j) denom += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < K; ++j) {
      const double prob = std::exp(row[j] - mx) / denom;
      probs[b * K + j] = prob;
      if (y[b * K + j] != 0) total -= y[b * K + j] * std::log(std::max(prob, kProbabilityFloor));
    }
  }
  NdValue loss = nd::make_result("softmax_cross_entropy", {1}, {total / static_cast<double>(B)}, {&logits});
  if (loss.requires_grad()) {
    tape.record(loss, [logits, targets, loss, B, K, probs = std::move(probs)]() mutable {
      const double g = loss.grad()[0] / static_cast<double>(B);
      const auto y = targets.data();
      auto gz = logits.mutable_grad();
      for (std::size_t b = 0; b < B; ++b) {
        double ysum = 0;
        for (std::size_t j = 0; j < K; ++j) ysum += y[b * K + j];
        for (std::size_t j = 0; j < K; ++j) gz[b * K + j] += g * (ysum * probs[b * K + j] - y[b * K + j]);
      }
    });
  }
  return loss;
}

NdValue one_hot_targets(std::span<const SequenceSample> batch) {
  std::vector<double> data;
  data.reserve(batch.size() * 2);
  for (const auto& s : batch) data.insert(data.end(), s.one_hot.begin(), s.one_hot.end());
  return NdValue({batch.size(), 2}, std::move(data));
}

Adam::Adam(std::vector<NdValue> params, double beta1, double beta2, double epsilon)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step(double learning_rate) {
  for (const auto& p : params_) {
    if (!p.has_grad()) throw ContractError("adam: parameter without gradient");
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto w = params_[i].mutable_data();
    const auto g = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      w[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

FitResult fit(models::Model& model, std::span<const SequenceSample> train_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw ContractError("fit: empty training set");
  const double lr = cfg.learning_rate.value_or(model.spec().learning_rate);
  Adam adam(model.params().values(), cfg.beta1, cfg.beta2, cfg.epsilon);
  Rng order_rng(cfg.seed);
  Rng dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  FitResult result;
  std::vector<SequenceSample> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) order_rng.shuffle(order);
    double weighted = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      if (cfg.drop_last && end - start < cfg.batch_size && start > 0) break;
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      model.params().zero_grad();
      Tape tape;
      auto out = model.run(tape, batch, layers::Mode::train, dropout_rng);
      NdValue loss = softmax_cross_entropy(tape, out.logits, one_hot_targets(batch));
      if (NdValue reg = model.regularization(tape); reg.defined()) loss = nd::add(tape, loss, reg);
      const double value = loss.item();
      nd::backward(loss, tape);
      adam.step(lr);
      weighted += value * static_cast<double>(batch.size());
      seen += batch.size();
    }
    result.epoch_loss.push_back(seen ? weighted / static_cast<double>(seen) : 0.0);
  }
  return result;
}

std::vector<double> predict_proba(const models::Model& model, std::span<const SequenceSample> samples,
                                  std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(samples.size() * 2);
  Rng unused(0);
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t end = std::min(samples.size(), start + batch_size);
    Tape tape;
    const NdValue p = model.forward(tape, samples.subspan(start, end - start), layers::Mode::eval, unused);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return out;
}

std::vector<int> predict(const models::Model& model, std::span<const SequenceSample> samples, std::size_t batch_size) {
  const auto p = predict_proba(model, samples, batch_size);
  std::vector<int> pred;
  for (std::size_t i = 0; i < samples.size(); ++i) pred.push_back(p[2 * i + 1] > p[2 * i] ? 1 : 0);
  return pred;
}

}  // namespace eegatt::train
