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

#include "eegatt/store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eegatt/edf.hpp"
#include "eegatt/errors.hpp"

namespace eegatt::io {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointVersion = "ckpt-v1";
constexpr const char* kCacheIndex = "index.json";

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": '" + key + "' has the wrong type");
  }
}

Json intervals_json(const std::vector<signal::LabeledInterval>& intervals) {
  Json out = Json::array();
  for (const auto& iv : intervals) out.push_back({{"start", iv.start_s}, {"end", iv.end_s}, {"label", iv.label}});
  return out;
}

std::vector<signal::LabeledInterval> parse_intervals(const Json& j, const std::string& where) {
  if (!j.is_array()) throw DataError(where + ": intervals must be an array");
  std::vector<signal::LabeledInterval> out;
  for (const auto& iv : j) {
    signal::LabeledInterval v{field<double>(iv, "start", where), field<double>(iv, "end", where),
                              field<int>(iv, "label", where)};
    if (v.label != 0 && v.label != 1) throw DataError(where + ": interval label must be 0 or 1");
    if (!(v.end_s > v.start_s)) throw DataError(where + ": interval end must follow its start");
    out.push_back(v);
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

Json metrics_json(const eval::Metrics& m) {
  return {{"accuracy", m.accuracy}, {"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
}

eval::Metrics parse_metrics(const Json& j, const std::string& where) {
  return {field<double>(j, "accuracy", where), field<double>(j, "recall", where), field<double>(j, "precision", where),
          field<double>(j, "f1", where)};
}

template <typename T>
void set_optional(std::optional<T>& slot, const Json& v, const std::string& key) {
  if (v.is_null()) {
    slot.reset();
    return;
  }
  try {
    if constexpr (std::is_same_v<T, std::size_t>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else {
      if (!v.is_number()) throw ConfigError("");
    }
    slot = v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("model setting '" + key + "' has the wrong type");
  }
}

}  // namespace

// ---- manifests -------------------------------------------------------------

bool ManifestEntry::operator==(const ManifestEntry& o) const {
  auto same_intervals = [&]() {
    if (intervals.size() != o.intervals.size()) return false;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto &a = intervals[i], &b = o.intervals[i];
      if (a.start_s != b.start_s || a.end_s != b.end_s || a.label != b.label) return false;
    }
    return true;
  };
  return path == o.path && format == o.format && label == o.label && same_intervals() && channels == o.channels &&
         fs == o.fs;
}

DatasetManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw DataError("manifest needs an 'entries' array");
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  std::size_t i = 0;
  for (const auto& e : j["entries"]) {
    const std::string where = "manifest entry " + std::to_string(i++);
    if (!e.is_object()) throw DataError(where + ": not an object");
    for (const auto& [key, _] : e.items()) {
      if (key != "path" && key != "format" && key != "label" && key != "intervals" && key != "channels" &&
          key != "fs") {
        throw DataError(where + ": unknown key '" + key + "'");
      }
    }
    ManifestEntry entry;
    entry.path = field<std::string>(e, "path", where);
    if (e.contains("format")) entry.format = field<std::string>(e, "format", where);
    if (entry.format != "edf" && entry.format != "csv") throw DataError(where + ": format must be edf or csv");
    if (e.contains("label")) {
      entry.label = field<int>(e, "label", where);
      if (*entry.label != 0 && *entry.label != 1) throw DataError(where + ": label must be 0 or 1");
    }
    if (e.contains("intervals")) entry.intervals = parse_intervals(e["intervals"], where);
    if (!entry.label && entry.intervals.empty()) throw DataError(where + ": needs a label or labeled intervals");
    if (e.contains("channels")) entry.channels = field<std::vector<std::string>>(e, "channels", where);
    if (e.contains("fs")) entry.fs = field<double>(e, "fs", where);
    if (entry.format == "csv" && !(entry.fs && *entry.fs > 0)) throw DataError(where + ": csv entries need fs");
    m.entries.push_back(std::move(entry));
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  DatasetManifest m = parse_manifest(read_text_file(path), path.parent_path());
  for (const auto& e : m.entries) {
    if (!fs::exists(resolve(m, e))) throw DataError("manifest references missing file " + resolve(m, e).string());
  }
  return m;
}

std::string write_manifest(const DatasetManifest& manifest) {
  Json entries = Json::array();
  for (const auto& e : manifest.entries) {
    Json j;
    j["path"] = e.path;
    j["format"] = e.format;
    if (e.label) j["label"] = *e.label;
    if (!e.intervals.empty()) j["intervals"] = intervals_json(e.intervals);
    if (!e.channels.empty()) j["channels"] = e.channels;
    if (e.fs) j["fs"] = *e.fs;
    entries.push_back(std::move(j));
  }
  Json root;
  root["entries"] = std::move(entries);
  return root.dump(2) + "\n";
}

fs::path resolve(const DatasetManifest& manifest, const ManifestEntry& entry) {
  const fs::path p(entry.path);
  return p.is_absolute() || manifest.base_dir.empty() ? p : manifest.base_dir / p;
}

std::string channel_key(std::string_view name) {
  std::string out = trim(name);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> common_channels(std::span<const std::vector<std::string>> lists) {
  if (lists.empty()) throw DataError("no channel lists to intersect");
  std::vector<std::string> out;
  for (const auto& name : lists.front()) {
    const std::string key = channel_key(name);
    const bool everywhere = std::all_of(lists.begin() + 1, lists.end(), [&](const auto& list) {
      return std::any_of(list.begin(), list.end(), [&](const auto& n) { return channel_key(n) == key; });
    });
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& n) { return channel_key(n) == key; });
    if (everywhere && !seen) out.push_back(trim(name));
  }
  if (out.empty()) throw DataError("recordings share no channels");
  return out;
}

signal::Recording read_csv_recording(const fs::path& path, double sampling_rate) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  signal::Recording rec;
  rec.id = path.stem().string();
  rec.fs = sampling_rate;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    return cells;
  };
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty csv");
  ++line_no;
  rec.channels = split(line);
  rec.samples.resize(rec.channels.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != rec.channels.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(rec.channels.size()) + " columns");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0;
      const auto* end = cells[c].data() + cells[c].size();
      const auto [ptr, ec] = std::from_chars(cells[c].data(), end, v);
      if (ec != std::errc() || ptr != end) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + cells[c] + "'");
      }
      rec.samples[c].push_back(v);
    }
  }
  return rec;
}

std::vector<signal::Recording> load_recordings(const DatasetManifest& manifest) {
  std::vector<signal::Recording> recs;
  std::vector<std::vector<std::string>> available;
  for (const auto& e : manifest.entries) {
    const fs::path p = resolve(manifest, e);
    signal::Recording rec = e.format == "csv" ? read_csv_recording(p, *e.fs) : read_edf_file(p);
    rec.id = p.stem().string();
    rec.label = e.label.value_or(0);
    rec.intervals = e.intervals;
    std::vector<std::string> names;
    for (const auto& ch : rec.channels) {
      const bool wanted = e.channels.empty() || std::any_of(e.channels.begin(), e.channels.end(), [&](const auto& n) {
                            return channel_key(n) == channel_key(ch);
                          });
      if (wanted) names.push_back(ch);
    }
    available.push_back(std::move(names));
    recs.push_back(std::move(rec));
  }
  const auto common = common_channels(available);
  for (auto& rec : recs) {
    signal::Recording sub = rec;
    sub.channels.clear();
    sub.samples.clear();
    sub.physical_range.clear();
    for (const auto& name : common) {
      for (std::size_t c = 0; c < rec.channels.size(); ++c) {
        if (channel_key(rec.channels[c]) != channel_key(name)) continue;
        sub.channels.push_back(name);
        sub.samples.push_back(rec.samples[c]);
        if (c < rec.physical_range.size()) sub.physical_range.push_back(rec.physical_range[c]);
        break;
      }
    }
    rec = std::move(sub);
    rec.validate();
  }
  return recs;
}

// ---- recording cache -------------------------------------------------------

void write_recording_cache(const fs::path& dir, const RecordingCache& cache) {
  fs::create_directories(dir);
  Json index;
  index["config"] = cache.config;
  index["recordings"] = Json::array();
  std::size_t i = 0;
  for (const auto& rec : cache.recordings) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%04zu-", i++);
    const std::string file = prefix + safe_name(rec.id) + ".edf";
    write_edf_file(dir / file, rec);
    Json entry;
    entry["file"] = file;
    entry["id"] = rec.id;
    entry["label"] = rec.label;
    entry["intervals"] = intervals_json(rec.intervals);
    index["recordings"].push_back(std::move(entry));
  }
  write_json_file(dir / kCacheIndex, index);
}

RecordingCache read_recording_cache(const fs::path& dir) {
  const Json index = read_json_file(dir / kCacheIndex);
  RecordingCache cache;
  cache.config = index.value("config", Json::object());
  if (!index.contains("recordings") || !index["recordings"].is_array()) {
    throw DataError((dir / kCacheIndex).string() + ": missing 'recordings'");
  }
  for (const auto& e : index["recordings"]) {
    const std::string where = (dir / kCacheIndex).string();
    signal::Recording rec = read_edf_file(dir / field<std::string>(e, "file", where));
    rec.id = field<std::string>(e, "id", where);
    rec.label = field<int>(e, "label", where);
    rec.intervals = parse_intervals(e.value("intervals", Json::array()), where);
    cache.recordings.push_back(std::move(rec));
  }
  return cache;
}

// ---- feature store ---------------------------------------------------------

void write_feature_store(std::ostream& out, const FeatureStore& store) {
  out << Json{{"meta", store.meta}}.dump() << '\n';
  for (const auto& f : store.frames) {
    Json j;
    j["recording_id"] = f.recording_id;
    j["frame_index"] = f.frame_index;
    j["label"] = f.label;
    j["X"] = f.X;
    j["R"] = f.R;
    j["fs"] = f.fs;
    j["C"] = f.channels;
    out << j.dump() << '\n';
  }
}

FeatureStore read_feature_store(std::istream& in) {
  FeatureStore store;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "feature store line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!have_meta) {
      if (!j.contains("meta")) throw DataError(where + ": expected the meta record first");
      store.meta = j["meta"];
      have_meta = true;
      continue;
    }
    features::FrameFeatures f;
    f.recording_id = field<std::string>(j, "recording_id", where);
    f.frame_index = field<std::size_t>(j, "frame_index", where);
    f.label = field<int>(j, "label", where);
    f.fs = field<double>(j, "fs", where);
    f.channels = field<std::size_t>(j, "C", where);
    f.X = field<std::vector<double>>(j, "X", where);
    f.R = field<std::vector<double>>(j, "R", where);
    if (f.X.size() != f.channels * features::kFeatureCount || f.R.size() != f.channels * f.channels) {
      throw DataError(where + ": X or R size does not match the channel count");
    }
    if (!store.frames.empty() && store.frames.front().channels != f.channels) {
      throw DataError(where + ": channel count differs from earlier frames");
    }
    store.frames.push_back(std::move(f));
  }
  if (!have_meta) throw DataError("feature store is empty");
  return store;
}

void write_feature_store_file(const fs::path& path, const FeatureStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_feature_store(out, store);
}

FeatureStore read_feature_store_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_feature_store(in);
}

// ---- configuration ---------------------------------------------------------

Json to_json(const models::ModelSpec& s) {
  Json j;
  j["kind"] = std::string(models::to_string(s.kind));
  j["channels"] = s.channels;
  j["features"] = s.features;
  j["T"] = s.T;
  j["learning_rate"] = s.learning_rate;
  auto put = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("gat_out_channels", s.gat_out_channels);
  put("lstm_hidden", s.lstm_hidden);
  put("dense_dropout", s.dense_dropout);
  put("input_dropout", s.input_dropout);
  put("layer1_dropout", s.layer1_dropout);
  put("layer2_dropout", s.layer2_dropout);
  put("l2_reg", s.l2_reg);
  put("conv_kernel", s.conv_kernel);
  put("conv_filters", s.conv_filters);
  put("cbam_ratio", s.cbam_ratio);
  put("cbam_spatial_kernel", s.cbam_spatial_kernel);
  put("node_correlations", s.node_correlations);
  put("mean_pool_nodes", s.mean_pool_nodes);
  return j;
}

void apply_spec_overrides(models::ModelSpec& s, const Json& j) {
  if (!j.is_object()) throw ConfigError("model settings must be an object");
  for (const auto& [key, v] : j.items()) {
    auto whole = [&]() -> std::size_t {
      if (!v.is_number_unsigned()) throw ConfigError("model setting '" + key + "' must be a non-negative integer");
      return v.get<std::size_t>();
    };
    if (key == "kind") {
      if (!v.is_string()) throw ConfigError("model setting 'kind' must be a string");
      s.kind = models::parse_kind(v.get<std::string>());
    } else if (key == "channels") {
      s.channels = whole();
    } else if (key == "features") {
      s.features = whole();
    } else if (key == "T") {
      s.T = whole();
    } else if (key == "learning_rate") {
      if (!v.is_number()) throw ConfigError("model setting 'learning_rate' must be a number");
      s.learning_rate = v.get<double>();
    } else if (key == "gat_out_channels") {
      set_optional(s.gat_out_channels, v, key);
    } else if (key == "lstm_hidden") {
      set_optional(s.lstm_hidden, v, key);
    } else if (key == "dense_dropout") {
      set_optional(s.dense_dropout, v, key);
    } else if (key == "input_dropout") {
      set_optional(s.input_dropout, v, key);
    } else if (key == "layer1_dropout") {
      set_optional(s.layer1_dropout, v, key);
    } else if (key == "layer2_dropout") {
      set_optional(s.layer2_dropout, v, key);
    } else if (key == "l2_reg") {
      set_optional(s.l2_reg, v, key);
    } else if (key == "conv_kernel") {
      set_optional(s.conv_kernel, v, key);
    } else if (key == "conv_filters") {
      set_optional(s.conv_filters, v, key);
    } else if (key == "cbam_ratio") {
      set_optional(s.cbam_ratio, v, key);
    } else if (key == "cbam_spatial_kernel") {
      set_optional(s.cbam_spatial_kernel, v, key);
    } else if (key == "node_correlations") {
      set_optional(s.node_correlations, v, key);
    } else if (key == "mean_pool_nodes") {
      set_optional(s.mean_pool_nodes, v, key);
    } else {
      throw ConfigError("unknown model setting '" + key + "'");
    }
  }
}

models::ModelSpec spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("channels")) {
    throw ConfigError("model spec needs 'kind' and 'channels'");
  }
  models::ModelSpec s;
  apply_spec_overrides(s, j);
  s.validate();
  return s;
}

Json to_json(const train::TrainConfig& c) {
  Json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  if (c.learning_rate) j["learning_rate"] = *c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["shuffle"] = c.shuffle;
  j["drop_last"] = c.drop_last;
  return j;
}

void merge_train_config(train::TrainConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("training settings must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "epochs") {
        c.epochs = v.get<std::size_t>();
      } else if (key == "batch_size") {
        c.batch_size = v.get<std::size_t>();
      } else if (key == "learning_rate") {
        c.learning_rate = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      } else if (key == "beta1") {
        c.beta1 = v.get<double>();
      } else if (key == "beta2") {
        c.beta2 = v.get<double>();
      } else if (key == "epsilon") {
        c.epsilon = v.get<double>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "shuffle") {
        c.shuffle = v.get<bool>();
      } else if (key == "drop_last") {
        c.drop_last = v.get<bool>();
      } else {
        throw ConfigError("unknown training setting '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training setting has the wrong type: ") + e.what());
  }
}

// ---- checkpoints -----------------------------------------------------------

Json checkpoint_json(const models::Model& model, const features::FeatureScaler& scaler, const Json& config,
                     std::span<const double> loss_curve) {
  Json j;
  j["version"] = kCheckpointVersion;
  j["spec"] = to_json(model.spec());
  Json params = Json::object();
  for (const auto& [name, value] : model.params().entries()) {
    const auto data = value.data();
    params[name] = {{"shape", value.shape()}, {"values", std::vector<double>(data.begin(), data.end())}};
  }
  j["params"] = std::move(params);
  j["scaler"] = {{"mean", scaler.mean()}, {"scale", scaler.scale()}};
  j["config"] = config;
  j["loss_curve"] = std::vector<double>(loss_curve.begin(), loss_curve.end());
  return j;
}

Checkpoint parse_checkpoint(const Json& j) {
  const std::string where = "checkpoint";
  if (field<std::string>(j, "version", where) != kCheckpointVersion) throw DataError("unsupported checkpoint version");
  Checkpoint c;
  try {
    c.spec = spec_from_json(j.at("spec"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint spec: ") + e.what());
  }
  c.params = field<Json>(j, "params", where);
  const Json scaler = field<Json>(j, "scaler", where);
  c.scaler = features::FeatureScaler(field<std::vector<double>>(scaler, "mean", where),
                                     field<std::vector<double>>(scaler, "scale", where));
  c.config = j.value("config", Json::object());
  c.loss_curve = field<std::vector<double>>(j, "loss_curve", where);
  return c;
}

models::Model restore_model(const Checkpoint& ckpt) {
  models::Model model(ckpt.spec, 0);
  for (const auto& [name, value] : model.params().entries()) {
    if (!ckpt.params.contains(name)) throw DataError("checkpoint lacks parameter " + name);
    const Json& p = ckpt.params.at(name);
    const auto shape = field<nd::Shape>(p, "shape", name);
    const auto values = field<std::vector<double>>(p, "values", name);
    if (shape != value.shape() || values.size() != value.size()) {
      throw DataError("checkpoint parameter " + name + " has shape " + nd::to_string(shape) + ", expected " +
                      nd::to_string(value.shape()));
    }
    std::copy(values.begin(), values.end(), value.mutable_data().begin());
  }
  if (ckpt.params.size() != model.params().entries().size()) throw DataError("checkpoint has extra parameters");
  return model;
}

// ---- reports ---------------------------------------------------------------

Json report_json(const eval::CvReport& r, const Json& config) {
  Json j;
  j["model"] = r.model;
  j["dataset"] = r.dataset;
  j["k"] = r.k;
  j["mean"] = metrics_json(r.mean);
  j["std"] = metrics_json(r.std);
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    Json fj;
    fj["fold"] = f.fold;
    fj["n_train"] = f.n_train;
    fj["n_test"] = f.n_test;
    fj["metrics"] = metrics_json(f.metrics);
    fj["loss_curve"] = f.loss_curve;
    folds.push_back(std::move(fj));
  }
  j["per_fold"] = std::move(folds);
  j["config"] = config;
  return j;
}

eval::CvReport parse_report(const Json& j) {
  const std::string where = "report";
  eval::CvReport r;
  r.model = field<std::string>(j, "model", where);
  r.dataset = field<std::string>(j, "dataset", where);
  r.k = field<std::size_t>(j, "k", where);
  r.mean = parse_metrics(field<Json>(j, "mean", where), where);
  r.std = parse_metrics(field<Json>(j, "std", where), where);
  for (const auto& fj : field<Json>(j, "per_fold", where)) {
    eval::FoldResult f;
    f.fold = field<std::size_t>(fj, "fold", where);
    f.n_train = field<std::size_t>(fj, "n_train", where);
    f.n_test = field<std::size_t>(fj, "n_test", where);
    f.metrics = parse_metrics(field<Json>(fj, "metrics", where), where);
    f.loss_curve = fj.value("loss_curve", std::vector<double>{});
    r.folds.push_back(std::move(f));
  }
  return r;
}

std::string render_table(std::span<const eval::CvReport> reports) {
  std::vector<std::vector<std::string>> rows = {{"model", "dataset", "accuracy", "recall", "precision", "f1"}};
  auto cell = [](double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100 * mean, 100 * sd);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    rows.push_back({r.model, r.dataset, cell(r.mean.accuracy, r.std.accuracy), cell(r.mean.recall, r.std.recall),
                    cell(r.mean.precision, r.std.precision), cell(r.mean.f1, r.std.f1)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  };
  emit(rows.front());
  std::size_t total = 0;
  for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c + 1 < width.size() ? 2 : 0);
  out += std::string(total, '-') + '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  return out;
}

std::string render_fold_csv(std::span<const eval::CvReport> reports) {
  std::string out = "model,dataset,fold,f1\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", f.fold, f.metrics.f1);
      out += r.model + "," + r.dataset + "," + buf;
    }
  }
  return out;
}

// ---- files -----------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Json read_json_file(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace eegatt::io
