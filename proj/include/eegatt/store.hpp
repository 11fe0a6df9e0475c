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

// On-disk artifacts: dataset manifests, the recording cache, the feature
// store, model checkpoints and cross-validation reports. Everything except
// EDF is JSON (the feature store is JSON Lines).

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "eegatt/eval.hpp"
#include "eegatt/features.hpp"
#include "eegatt/models.hpp"
#include "eegatt/signal.hpp"
#include "eegatt/train.hpp"

namespace eegatt::io {

using Json = nlohmann::ordered_json;

// ---- manifests -------------------------------------------------------------

struct ManifestEntry {
  std::string path;           // as written; relative paths resolve against the manifest
  std::string format = "edf";  // "edf" or "csv"
  std::optional<int> label;
  std::vector<signal::LabeledInterval> intervals;
  std::vector<std::string> channels;  // empty: every channel of the file
  std::optional<double> fs;           // required for csv

  bool operator==(const ManifestEntry&) const;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;
};

/// Parses manifest text. Throws DataError on malformed content or labels
/// outside {0, 1}.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
/// Reads and parses a manifest file, then checks every referenced file exists.
DatasetManifest load_manifest(const std::filesystem::path& path);
/// Canonical text; parse_manifest followed by write_manifest reproduces it.
std::string write_manifest(const DatasetManifest& manifest);
std::filesystem::path resolve(const DatasetManifest& manifest, const ManifestEntry& entry);

/// Upper-cased, whitespace-trimmed channel name used for matching.
std::string channel_key(std::string_view name);
/// Channels present in every list, in the order of the first list. Throws
/// DataError when the intersection is empty.
std::vector<std::string> common_channels(std::span<const std::vector<std::string>> lists);

/// Header row of channel names followed by one row of samples per time step.
signal::Recording read_csv_recording(const std::filesystem::path& path, double fs);

/// Reads every entry, restricts all recordings to the common channel set
/// (in a shared order) and attaches labels.
std::vector<signal::Recording> load_recordings(const DatasetManifest& manifest);

// ---- recording cache -------------------------------------------------------

struct RecordingCache {
  Json config;
  std::vector<signal::Recording> recordings;
};

/// Writes index.json plus one EDF file per recording into `dir`.
void write_recording_cache(const std::filesystem::path& dir, const RecordingCache& cache);
RecordingCache read_recording_cache(const std::filesystem::path& dir);

// ---- feature store ---------------------------------------------------------

struct FeatureStore {
  Json meta;  // effective configuration of the run that produced the frames
  std::vector<features::FrameFeatures> frames;
};

/// First line {"meta": ...}, then one object per frame.
void write_feature_store(std::ostream& out, const FeatureStore& store);
FeatureStore read_feature_store(std::istream& in);
void write_feature_store_file(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore read_feature_store_file(const std::filesystem::path& path);

// ---- configuration ---------------------------------------------------------

Json to_json(const models::ModelSpec& spec);
/// Overlays the keys present in `j`; a null value clears an optional field.
/// Throws ConfigError on unknown keys or wrongly typed values.
void apply_spec_overrides(models::ModelSpec& spec, const Json& j);
/// Inverse of to_json; "kind" and "channels" are required.
models::ModelSpec spec_from_json(const Json& j);
Json to_json(const train::TrainConfig& cfg);
/// Overlays the keys present in `j` onto `cfg`.
void merge_train_config(train::TrainConfig& cfg, const Json& j);

// ---- checkpoints -----------------------------------------------------------

struct Checkpoint {
  models::ModelSpec spec;
  Json params;  // name -> {shape, values}
  features::FeatureScaler scaler;
  Json config;
  std::vector<double> loss_curve;
};

Json checkpoint_json(const models::Model& model, const features::FeatureScaler& scaler, const Json& config,
                     std::span<const double> loss_curve);
Checkpoint parse_checkpoint(const Json& j);
/// Rebuilds the model and overwrites every parameter from the checkpoint.
models::Model restore_model(const Checkpoint& ckpt);

// ---- reports ---------------------------------------------------------------

Json report_json(const eval::CvReport& report, const Json& config);
eval::CvReport parse_report(const Json& j);

/// One row per report: mean +- std of each metric in percent.
std::string render_table(std::span<const eval::CvReport> reports);
/// model,dataset,fold,f1 rows for box plots.
std::string render_fold_csv(std::span<const eval::CvReport> reports);

// ---- files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
Json read_json_file(const std::filesystem::path& path);
/// Two-space indented JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace eegatt::io
