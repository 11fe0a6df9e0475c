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

// Loss, optimiser and the mini-batch training loop.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eegatt/models.hpp"

namespace eegatt::train {

using nd::NdValue;
using nd::Tape;

inline constexpr double kProbabilityFloor = 1e-12;

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  /// Falls back to the model spec's learning rate when empty.
  std::optional<double> learning_rate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  bool drop_last = false;

  void validate() const;
};

/// -(1/B) sum_ij y_ij log(max(p_ij, 1e-12)) over probability rows.
NdValue cross_entropy(Tape& tape, const NdValue& probabilities, const NdValue& targets);

/// Cross-entropy of softmax(logits) with a fused gradient (softmax - y) / B.
NdValue softmax_cross_entropy(Tape& tape, const NdValue& logits, const NdValue& targets);

/// [B x 2] one-hot targets of a batch.
NdValue one_hot_targets(std::span<const features::SequenceSample> batch);

/// Bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<NdValue> params, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  /// Applies one update from the parameters' accumulated gradients.
  void step(double learning_rate);
  std::uint64_t steps() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  std::vector<NdValue> params_;
  std::vector<std::vector<double>> m_, v_;
  double beta1_, beta2_, epsilon_;
  std::uint64_t step_ = 0;
};

struct FitResult {
  std::vector<double> epoch_loss;  // sample-weighted mean objective per epoch
};

/// Seeded shuffle, mini-batches, fused loss (+ L2 term), backward, Adam.
FitResult fit(models::Model& model, std::span<const features::SequenceSample> train_set, const TrainConfig& cfg);

/// Class probabilities in eval mode, [N x 2] row-major.
std::vector<double> predict_proba(const models::Model& model, std::span<const features::SequenceSample> samples,
                                  std::size_t batch_size = 64);
/// Argmax predictions in eval mode.
std::vector<int> predict(const models::Model& model, std::span<const features::SequenceSample> samples,
                         std::size_t batch_size = 64);

}  // namespace eegatt::train
