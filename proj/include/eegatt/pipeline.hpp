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

// End-to-end stages shared by the command-line tool and the tests:
// recordings -> frame features -> sequences -> trained models and reports.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegatt/eval.hpp"
#include "eegatt/features.hpp"
#include "eegatt/models.hpp"
#include "eegatt/signal.hpp"
#include "eegatt/store.hpp"
#include "eegatt/train.hpp"

namespace eegatt::pipeline {

using io::Json;

struct FeaturizeSettings {
  double frame_secs = 2;
  double overlap = 0;
  double target_fs = 250;
  double band_lo_hz = 0.1;
  double band_hi_hz = 47;
  /// Re-apply min-max centring to every frame after segmentation.
  bool normalize_frames = false;
};

Json to_json(const FeaturizeSettings& s);
void merge_featurize_settings(FeaturizeSettings& s, const Json& j);

/// Decimate to the target rate, band-pass, min-max centre the whole
/// recording, cut frames and extract features.
std::vector<features::FrameFeatures> featurize_recording(const signal::Recording& rec, const FeaturizeSettings& s);
/// Frames of every recording in input order; recordings are processed on up
/// to `jobs` threads.
std::vector<features::FrameFeatures> featurize(std::span<const signal::Recording> recs, const FeaturizeSettings& s,
                                               std::size_t jobs = 1);
/// Feature store with meta {dataset, channels, featurize, source}.
io::FeatureStore featurize_store(std::span<const signal::Recording> recs, const FeaturizeSettings& s,
                                 const std::string& dataset, const Json& source, std::size_t jobs = 1);

/// Settings for train, crossval and eval. File layout:
///   {"model": {"kind": ..., <spec fields>}, "T": 8, "max_width": 32,
///    "train": {...}, "folds": 10, "seed": 0, "jobs": 1, "standardize": true}
struct RunConfig {
  models::ModelKind kind = models::ModelKind::instagats;
  std::size_t T = 8;
  std::optional<std::size_t> max_width;
  Json model_overrides = Json::object();
  train::TrainConfig train;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool standardize = true;
};

/// Overlays a config document onto `cfg`. Throws ConfigError on unknown keys.
void merge_run_config(RunConfig& cfg, const Json& j);
/// Default hyper-parameters for the kind, capped to max_width, then the overrides.
models::ModelSpec resolve_spec(const RunConfig& cfg, std::size_t channels);
/// Effective settings, including the resolved spec; `jobs` is left out so
/// outputs do not depend on parallelism.
Json effective_config(const RunConfig& cfg, std::size_t channels);

std::vector<features::SequenceSample> sequences(const io::FeatureStore& store, std::size_t T);
std::string dataset_name(const io::FeatureStore& store);

/// Cross-validation report JSON embedding the effective config and the
/// feature store meta.
Json run_crossval(const io::FeatureStore& store, const RunConfig& cfg);

/// Fits a scaler and a model on every sequence; returns checkpoint JSON.
Json run_train(const io::FeatureStore& store, const RunConfig& cfg);

/// Scores a checkpoint on every sequence of `store` (one-fold report).
Json run_eval(const io::Checkpoint& ckpt, const io::FeatureStore& store);

}  // namespace eegatt::pipeline
