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

// Stratified k-fold cross-validation and binary classification metrics.
// Class 1 is the positive class.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegatt/models.hpp"
#include "eegatt/train.hpp"

namespace eegatt::eval {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> test;   // per fold, ascending
  std::vector<std::vector<std::size_t>> train;  // per fold, ascending
};

/// Per class (ascending label order): seeded shuffle, then round-robin
/// assignment continuing the fold counter across classes. Every class needs
/// at least k members.
FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Metrics {
  double accuracy = 0, recall = 0, precision = 0, f1 = 0;
};

Confusion confusion(std::span<const int> pred, std::span<const int> truth);
/// Zero denominators yield 0 for the affected metric.
Metrics metrics_from(const Confusion& c);
Metrics confusion_metrics(std::span<const int> pred, std::span<const int> truth);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_train = 0, n_test = 0;
  Metrics metrics;
  std::vector<double> loss_curve;
};

struct CvReport {
  std::string model;
  std::string dataset;
  std::size_t k = 0;
  std::vector<FoldResult> folds;
  Metrics mean;
  Metrics std;  // population standard deviation over folds
};

/// Mean and population standard deviation of each metric.
void aggregate(CvReport& report);

struct CrossvalOptions {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string dataset;
  /// z-score X features with statistics of each training fold.
  bool standardize = true;
};

/// Fold f trains a fresh model seeded with seed+f (data order seed+f too) on
/// the other folds and scores argmax predictions on fold f.
CvReport crossval(const models::ModelSpec& spec, std::span<const features::SequenceSample> dataset,
                  const train::TrainConfig& train_cfg, const CrossvalOptions& options);

}  // namespace eegatt::eval
