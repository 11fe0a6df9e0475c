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

// eegatt: command-line front end for the EEG classification pipeline.
//
//   synth | ingest -> recording cache directory
//   featurize      -> feature store (JSON Lines)
//   train          -> checkpoint
//   crossval, eval -> report
//   report         -> results table or per-fold CSV
//
// Settings precedence: built-in defaults < --config file < explicit flags.
// Exit status: 0 success, 1 usage or configuration error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eegatt/errors.hpp"
#include "eegatt/pipeline.hpp"
#include "eegatt/runtime.hpp"
#include "eegatt/store.hpp"
#include "eegatt/synth.hpp"

namespace {

namespace fs = std::filesystem;
using eegatt::io::Json;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct SynthArgs {
  std::string out;
  eegatt::io::SynthOptions options;
  std::string effect = "spatial_alpha";
};

struct IngestArgs {
  std::string manifest, out;
};

struct FeaturizeArgs {
  std::string in, out, band = "0.1:47", dataset;
  eegatt::pipeline::FeaturizeSettings settings;
  std::size_t jobs = 1;
};

// Flags shared by train and crossval; unset values defer to the config file.
struct RunArgs {
  std::string model, features, config, out;
  std::optional<std::size_t> folds, T, epochs, batch, jobs, max_width;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  bool no_standardize = false;
};

struct EvalArgs {
  std::string ckpt, features, report;
};

struct ReportArgs {
  std::vector<std::string> in;
  std::string format = "table";
  std::string out;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool with_folds) {
  cmd->add_option("--model", a.model, "Model kind: instagats, gnn, lstm_att, lstm, cnn_att, cnn");
  cmd->add_option("--features", a.features, "Feature store file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", a.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Seed for initialisation, shuffling and fold assignment");
  cmd->add_option("--T", a.T, "Frames per sequence (default 8)");
  cmd->add_option("--epochs", a.epochs, "Training epochs (default 50)");
  cmd->add_option("--batch", a.batch, "Mini-batch size (default 32)");
  cmd->add_option("--lr", a.lr, "Learning rate (default: the model's table value)");
  cmd->add_option("--max-width", a.max_width, "Cap on GAT, LSTM and conv widths");
  cmd->add_flag("--no-standardize", a.no_standardize, "Skip per-fold z-scoring of node features");
  if (with_folds) {
    cmd->add_option("--folds", a.folds, "Cross-validation folds (default 10)");
    cmd->add_option("--jobs", a.jobs, "Folds trained in parallel (default 1)");
  }
}

eegatt::pipeline::RunConfig run_config(const RunArgs& a) {
  eegatt::pipeline::RunConfig cfg;
  if (!a.config.empty()) eegatt::pipeline::merge_run_config(cfg, eegatt::io::read_json_file(a.config));
  if (!a.model.empty()) cfg.kind = eegatt::models::parse_kind(a.model);
  if (a.seed) cfg.seed = *a.seed;
  if (a.T) cfg.T = *a.T;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.batch) cfg.train.batch_size = *a.batch;
  if (a.lr) cfg.train.learning_rate = *a.lr;
  if (a.max_width) cfg.max_width = *a.max_width;
  if (a.folds) cfg.folds = *a.folds;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (a.no_standardize) cfg.standardize = false;
  return cfg;
}

void run_synth(SynthArgs& a) {
  a.options.effect = eegatt::io::parse_effect(a.effect);
  const auto& o = a.options;
  std::ostringstream name;
  name << "synth-" << a.effect << "-snr" << o.snr << "-seed" << o.seed;
  Json config;
  config["dataset"] = name.str();
  config["synth"] = {{"channels", o.channels},   {"fs", o.fs},   {"seconds_per_class", o.seconds_per_class},
                     {"effect", a.effect},       {"snr", o.snr}, {"seed", o.seed},
                     {"recording_secs", o.recording_secs}, {"noise_uv", o.noise_uv}};
  eegatt::io::write_recording_cache(a.out, {config, eegatt::io::synth_dataset(o)});
}

void run_ingest(const IngestArgs& a) {
  const auto manifest = eegatt::io::load_manifest(a.manifest);
  Json config;
  config["dataset"] = fs::path(a.manifest).stem().string();
  config["manifest"] = Json::parse(eegatt::io::write_manifest(manifest));
  eegatt::io::write_recording_cache(a.out, {config, eegatt::io::load_recordings(manifest)});
}

void run_featurize(FeaturizeArgs& a) {
  const auto colon = a.band.find(':');
  if (colon == std::string::npos) throw eegatt::ConfigError("--band expects LO:HI, got '" + a.band + "'");
  try {
    a.settings.band_lo_hz = std::stod(a.band.substr(0, colon));
    a.settings.band_hi_hz = std::stod(a.band.substr(colon + 1));
  } catch (const std::exception&) {
    throw eegatt::ConfigError("--band expects LO:HI, got '" + a.band + "'");
  }
  const auto cache = eegatt::io::read_recording_cache(a.in);
  std::string dataset = a.dataset;
  if (dataset.empty()) {
    dataset = cache.config.contains("dataset") && cache.config["dataset"].is_string()
                  ? cache.config["dataset"].get<std::string>()
                  : fs::path(a.in).filename().string();
  }
  const auto store = eegatt::pipeline::featurize_store(cache.recordings, a.settings, dataset, cache.config, a.jobs);
  eegatt::io::write_feature_store_file(a.out, store);
}

void run_train(const RunArgs& a) {
  const auto store = eegatt::io::read_feature_store_file(a.features);
  eegatt::io::write_json_file(a.out, eegatt::pipeline::run_train(store, run_config(a)));
}

void run_crossval(const RunArgs& a) {
  const auto store = eegatt::io::read_feature_store_file(a.features);
  const Json report = eegatt::pipeline::run_crossval(store, run_config(a));
  if (a.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    eegatt::io::write_json_file(a.out, report);
  }
}

void run_eval(const EvalArgs& a) {
  const auto ckpt = eegatt::io::parse_checkpoint(eegatt::io::read_json_file(a.ckpt));
  const auto store = eegatt::io::read_feature_store_file(a.features);
  const Json report = eegatt::pipeline::run_eval(ckpt, store);
  if (a.report.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    eegatt::io::write_json_file(a.report, report);
  }
}

void run_report(const ReportArgs& a) {
  std::vector<eegatt::eval::CvReport> reports;
  for (const auto& path : a.in) reports.push_back(eegatt::io::parse_report(eegatt::io::read_json_file(path)));
  const std::string text =
      a.format == "csv" ? eegatt::io::render_fold_csv(reports) : eegatt::io::render_table(reports);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    eegatt::io::write_text_file(a.out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  eegatt::tune_allocator();
  CLI::App app{"EEG abnormality classification with graph attention and recurrent models", "eegatt"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded two-class synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output recording directory")->required();
  synth_cmd->add_option("--channels", synth.options.channels, "Channel count")->capture_default_str();
  synth_cmd->add_option("--seconds", synth.options.seconds_per_class, "Seconds of data per class")
      ->capture_default_str();
  synth_cmd->add_option("--effect", synth.effect, "spatial_alpha, temporal_burst or broadband_noise")
      ->capture_default_str();
  synth_cmd->add_option("--snr", synth.options.snr, "Effect RMS over background RMS")->capture_default_str();
  synth_cmd->add_option("--seed", synth.options.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--fs", synth.options.fs, "Sampling rate in Hz")->capture_default_str();
  synth_cmd->add_option("--recording-secs", synth.options.recording_secs, "Length of each recording")
      ->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Read EDF/CSV files listed in a manifest into a recording cache");
  ingest_cmd->add_option("--manifest", ingest.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest.out, "Output recording directory")->required();

  FeaturizeArgs feat;
  auto* feat_cmd = app.add_subcommand("featurize", "Filter, segment and extract per-frame features");
  feat_cmd->add_option("--in", feat.in, "Recording directory")->required()->check(CLI::ExistingDirectory);
  feat_cmd->add_option("--out", feat.out, "Feature store file")->required();
  feat_cmd->add_option("--frame-secs", feat.settings.frame_secs, "Frame length in seconds")->capture_default_str();
  feat_cmd->add_option("--overlap", feat.settings.overlap, "Frame overlap fraction")->capture_default_str();
  feat_cmd->add_option("--target-fs", feat.settings.target_fs, "Sampling rate after decimation")
      ->capture_default_str();
  feat_cmd->add_option("--band", feat.band, "Band-pass edges LO:HI in Hz")->capture_default_str();
  feat_cmd->add_flag("--normalize-frames", feat.settings.normalize_frames, "Min-max centre every frame again");
  feat_cmd->add_option("--dataset", feat.dataset, "Dataset name recorded in reports");
  feat_cmd->add_option("--jobs", feat.jobs, "Recordings processed in parallel")->capture_default_str();

  RunArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one model on every sequence and save a checkpoint");
  add_run_flags(train_cmd, train, false);
  train_cmd->add_option("--out", train.out, "Checkpoint file")->required();

  RunArgs cv;
  auto* cv_cmd = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  add_run_flags(cv_cmd, cv, true);
  cv_cmd->add_option("--report", cv.out, "Report file (default: stdout)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a feature store");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--features", ev.features, "Feature store file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", ev.report, "Report file (default: stdout)");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Render reports as a results table or per-fold F1 CSV");
  report_cmd->add_option("--in", rep.in, "Report files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", rep.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  report_cmd->add_option("--out", rep.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*synth_cmd) run_synth(synth);
    if (*ingest_cmd) run_ingest(ingest);
    if (*feat_cmd) run_featurize(feat);
    if (*train_cmd) run_train(train);
    if (*cv_cmd) run_crossval(cv);
    if (*eval_cmd) run_eval(ev);
    if (*report_cmd) run_report(rep);
  } catch (const eegatt::ConfigError& e) {
    std::cerr << "eegatt: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "eegatt: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
