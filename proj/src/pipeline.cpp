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

#include "eegatt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "eegatt/errors.hpp"

namespace eegatt::pipeline {

Json to_json(const FeaturizeSettings& s) {
  Json j;
  j["frame_secs"] = s.frame_secs;
  j["overlap"] = s.overlap;
  j["target_fs"] = s.target_fs;
  j["band"] = {s.band_lo_hz, s.band_hi_hz};
  j["normalize_frames"] = s.normalize_frames;
  return j;
}

void merge_featurize_settings(FeaturizeSettings& s, const Json& j) {
  if (!j.is_object()) throw ConfigError("featurize settings must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "frame_secs") {
        s.frame_secs = v.get<double>();
      } else if (key == "overlap") {
        s.overlap = v.get<double>();
      } else if (key == "target_fs") {
        s.target_fs = v.get<double>();
      } else if (key == "band") {
        const auto band = v.get<std::vector<double>>();
        if (band.size() != 2) throw ConfigError("band needs two edges");
        s.band_lo_hz = band[0];
        s.band_hi_hz = band[1];
      } else if (key == "normalize_frames") {
        s.normalize_frames = v.get<bool>();
      } else {
        throw ConfigError("unknown featurize setting '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("featurize setting has the wrong type: ") + e.what());
  }
}

std::vector<features::FrameFeatures> featurize_recording(const signal::Recording& rec, const FeaturizeSettings& s) {
  signal::Recording r = signal::decimate_to(rec, s.target_fs);
  r = signal::bandpass(r, s.band_lo_hz, s.band_hi_hz);
  r.samples = signal::minmax_center(r.samples);
  std::vector<features::FrameFeatures> out;
  for (auto& frame : signal::segment(r, s.frame_secs, s.overlap)) {
    if (s.normalize_frames) frame.data = signal::minmax_center(frame.data);
    out.push_back(features::frame_features(frame, r.fs));
  }
  return out;
}

std::vector<features::FrameFeatures> featurize(std::span<const signal::Recording> recs, const FeaturizeSettings& s,
                                               std::size_t jobs) {
  std::vector<std::vector<features::FrameFeatures>> per(recs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (std::size_t i = next++; i < recs.size(); i = next++) {
      try {
        per[i] = featurize_recording(recs[i], s);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, recs.size()));
  std::vector<std::thread> workers;
  for (std::size_t j = 1; j < n; ++j) workers.emplace_back(work);
  work();
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<features::FrameFeatures> out;
  for (auto& frames : per) std::move(frames.begin(), frames.end(), std::back_inserter(out));
  return out;
}

io::FeatureStore featurize_store(std::span<const signal::Recording> recs, const FeaturizeSettings& s,
                                 const std::string& dataset, const Json& source, std::size_t jobs) {
  if (recs.empty()) throw DataError("no recordings to featurize");
  io::FeatureStore store;
  store.meta["dataset"] = dataset;
  store.meta["channels"] = recs.front().channels;
  store.meta["featurize"] = to_json(s);
  store.meta["source"] = source;
  store.frames = featurize(recs, s, jobs);
  return store;
}

void merge_run_config(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") {
        if (!v.is_object()) throw ConfigError("'model' must be an object");
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "kind") {
            cfg.kind = models::parse_kind(mv.get<std::string>());
          } else {
            cfg.model_overrides[mk] = mv;
          }
        }
      } else if (key == "T") {
        cfg.T = v.get<std::size_t>();
      } else if (key == "max_width") {
        cfg.max_width = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      } else if (key == "train") {
        io::merge_train_config(cfg.train, v);
      } else if (key == "folds") {
        cfg.folds = v.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        cfg.jobs = v.get<std::size_t>();
      } else if (key == "standardize") {
        cfg.standardize = v.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
}

models::ModelSpec resolve_spec(const RunConfig& cfg, std::size_t channels) {
  models::ModelSpec spec = models::ModelSpec::defaults(cfg.kind, channels, cfg.T);
  if (cfg.max_width) spec = spec.capped(*cfg.max_width);
  io::apply_spec_overrides(spec, cfg.model_overrides);
  spec.validate();
  return spec;
}

Json effective_config(const RunConfig& cfg, std::size_t channels) {
  Json j;
  j["model"] = io::to_json(resolve_spec(cfg, channels));
  if (cfg.max_width) j["max_width"] = *cfg.max_width;
  j["train"] = io::to_json(cfg.train);
  j["folds"] = cfg.folds;
  j["seed"] = cfg.seed;
  j["standardize"] = cfg.standardize;
  return j;
}

std::vector<features::SequenceSample> sequences(const io::FeatureStore& store, std::size_t T) {
  auto out = features::build_sequences(store.frames, T);
  if (out.empty()) throw DataError("no complete sequences of " + std::to_string(T) + " same-label frames");
  return out;
}

std::string dataset_name(const io::FeatureStore& store) {
  if (store.meta.contains("dataset") && store.meta["dataset"].is_string()) return store.meta["dataset"];
  return "dataset";
}

namespace {

std::size_t channel_count(const io::FeatureStore& store) {
  if (store.frames.empty()) throw DataError("feature store has no frames");
  return store.frames.front().channels;
}

}  // namespace

Json run_crossval(const io::FeatureStore& store, const RunConfig& cfg) {
  const std::size_t C = channel_count(store);
  const auto spec = resolve_spec(cfg, C);
  const auto data = sequences(store, cfg.T);
  eval::CrossvalOptions opt;
  opt.k = cfg.folds;
  opt.seed = cfg.seed;
  opt.jobs = cfg.jobs;
  opt.dataset = dataset_name(store);
  opt.standardize = cfg.standardize;
  const auto report = eval::crossval(spec, data, cfg.train, opt);
  Json config = effective_config(cfg, C);
  config["features"] = store.meta;
  config["sequences"] = data.size();
  return io::report_json(report, config);
}

Json run_train(const io::FeatureStore& store, const RunConfig& cfg) {
  const std::size_t C = channel_count(store);
  const auto spec = resolve_spec(cfg, C);
  auto data = sequences(store, cfg.T);
  features::FeatureScaler scaler;
  if (cfg.standardize) {
    scaler = features::FeatureScaler::fit(data);
    data = scaler.apply(data);
  }
  models::Model model(spec, cfg.seed);
  train::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const auto fitted = train::fit(model, data, tc);
  Json config = effective_config(cfg, C);
  config["features"] = store.meta;
  config["sequences"] = data.size();
  return io::checkpoint_json(model, scaler, config, fitted.epoch_loss);
}

Json run_eval(const io::Checkpoint& ckpt, const io::FeatureStore& store) {
  const std::size_t C = channel_count(store);
  if (C != ckpt.spec.channels) {
    throw DataError("checkpoint expects " + std::to_string(ckpt.spec.channels) + " channels, features have " +
                    std::to_string(C));
  }
  const auto model = io::restore_model(ckpt);
  auto data = sequences(store, ckpt.spec.T);
  if (!ckpt.scaler.empty()) data = ckpt.scaler.apply(data);
  const auto pred = train::predict(model, data);
  std::vector<int> truth;
  for (const auto& s : data) truth.push_back(s.label());
  eval::CvReport report;
  report.model = std::string(models::to_string(ckpt.spec.kind));
  report.dataset = dataset_name(store);
  report.k = 1;
  eval::FoldResult fold;
  fold.n_test = data.size();
  fold.metrics = eval::confusion_metrics(pred, truth);
  report.folds.push_back(fold);
  eval::aggregate(report);
  Json config;
  config["checkpoint"] = ckpt.config;
  config["features"] = store.meta;
  return io::report_json(report, config);
}

}  // namespace eegatt::pipeline
