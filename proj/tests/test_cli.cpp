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

#include <cstdlib>
#include <filesystem>
#include <string>

#include "eegatt/edf.hpp"
#include "eegatt/store.hpp"

#ifndef EEGATT_CLI_PATH
#error "EEGATT_CLI_PATH must name the command-line binary"
#endif

namespace fs = std::filesystem;
namespace io = eegatt::io;

namespace {

const fs::path kWork = fs::temp_directory_path() / "eegatt_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(EEGATT_CLI_PATH) + " " + args + " >" + (kWork / "stdout.txt").string() +
                          " 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (kWork / name).string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    ASSERT_EQ(run("synth --out " + path("rec") + " --channels 3 --seconds 48 --seed 3"), 0);
    ASSERT_EQ(run("featurize --in " + path("rec") + " --out " + path("feat.jsonl")), 0);
  }
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("train --features " + path("feat.jsonl")), 1);  // --out missing
  EXPECT_EQ(run("train --model perceptron --features " + path("feat.jsonl") + " --out " + path("x.json")), 1);
  EXPECT_FALSE(io::read_text_file(path("stderr.txt")).empty());
}

TEST_F(Cli, DataErrorsExitTwo) {
  io::write_text_file(path("broken.jsonl"), "{\"meta\":{}}\nnot json\n");
  EXPECT_EQ(run("train --features " + path("broken.jsonl") + " --out " + path("x.json")), 2);
  io::write_text_file(path("m.json"), R"({"entries":[{"path":"missing.edf","label":0}]})");
  EXPECT_EQ(run("ingest --manifest " + path("m.json") + " --out " + path("ingested")), 2);
}

TEST_F(Cli, FeaturizeDefaults) {
  const auto store = io::read_feature_store_file(path("feat.jsonl"));
  const auto& f = store.meta["featurize"];
  EXPECT_EQ(f["frame_secs"], 2.0);
  EXPECT_EQ(f["target_fs"], 250.0);
  EXPECT_EQ(f["band"][0], 0.1);
  EXPECT_EQ(f["band"][1], 47.0);
  EXPECT_EQ(store.frames.size(), 48u);
  EXPECT_EQ(store.frames.front().channels, 3u);
}

TEST_F(Cli, TrainDefaultsAndEval) {
  ASSERT_EQ(run("train --model lstm --features " + path("feat.jsonl") + " --T 2 --max-width 4 --out " +
                path("ckpt.json")),
            0);
  const auto ckpt = io::read_json_file(path("ckpt.json"));
  EXPECT_EQ(ckpt["version"], "ckpt-v1");
  EXPECT_EQ(ckpt["config"]["train"]["epochs"], 50);
  EXPECT_EQ(ckpt["config"]["train"]["batch_size"], 32);
  ASSERT_EQ(run("eval --ckpt " + path("ckpt.json") + " --features " + path("feat.jsonl")), 0);
  const auto report = io::parse_report(io::read_json_file(path("stdout.txt")));
  EXPECT_EQ(report.k, 1u);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  io::write_text_file(path("cfg.json"), R"({"T": 2, "max_width": 4, "train": {"epochs": 3, "batch_size": 8}})");
  ASSERT_EQ(run("train --model cnn --features " + path("feat.jsonl") + " --config " + path("cfg.json") +
                " --epochs 2 --out " + path("ckpt2.json")),
            0);
  const auto ckpt = io::read_json_file(path("ckpt2.json"));
  EXPECT_EQ(ckpt["config"]["train"]["epochs"], 2);
  EXPECT_EQ(ckpt["config"]["train"]["batch_size"], 8);
  EXPECT_EQ(ckpt["loss_curve"].size(), 2u);
  io::write_text_file(path("bad_cfg.json"), R"({"train": {"epochz": 3}})");
  EXPECT_EQ(run("train --model cnn --features " + path("feat.jsonl") + " --config " + path("bad_cfg.json") +
                " --out " + path("ckpt3.json")),
            1);
}

TEST_F(Cli, CrossvalIsDeterministicAndRenders) {
  const std::string args = "crossval --model gnn --features " + path("feat.jsonl") +
                           " --T 2 --max-width 4 --epochs 3 --folds 3 --seed 5 --report ";
  ASSERT_EQ(run(args + path("r1.json")), 0);
  ASSERT_EQ(run(args + path("r2.json") + " --jobs 2"), 0);
  EXPECT_EQ(io::read_text_file(path("r1.json")), io::read_text_file(path("r2.json")));
  ASSERT_EQ(run("report --in " + path("r1.json") + " --format csv"), 0);
  const auto csv = io::read_text_file(path("stdout.txt"));
  EXPECT_EQ(csv.rfind("model,dataset,fold,f1\ngnn,", 0), 0u);
  ASSERT_EQ(run("report --in " + path("r1.json") + " " + path("r2.json")), 0);
  EXPECT_NE(io::read_text_file(path("stdout.txt")).find("gnn"), std::string::npos);
}

TEST_F(Cli, IngestManifestThenCrossval) {
  const auto cache = io::read_recording_cache(path("rec"));
  std::string entries;
  for (std::size_t i = 0; i < cache.recordings.size(); ++i) {
    const auto name = "in" + std::to_string(i) + ".edf";
    io::write_edf_file(kWork / name, cache.recordings[i]);
    entries += (i ? "," : "") + std::string(R"({"path":")") + name + R"(","label":)" +
               std::to_string(cache.recordings[i].label) + "}";
  }
  io::write_text_file(path("manifest.json"), R"({"entries":[)" + entries + "]}");
  ASSERT_EQ(run("ingest --manifest " + path("manifest.json") + " --out " + path("ingested")), 0);
  ASSERT_EQ(run("featurize --in " + path("ingested") + " --out " + path("ingested.jsonl")), 0);
  ASSERT_EQ(run("crossval --model instagats --features " + path("ingested.jsonl") +
                " --T 2 --max-width 4 --epochs 2 --folds 3 --report " + path("ingested_report.json")),
            0);
  const auto report = io::parse_report(io::read_json_file(path("ingested_report.json")));
  EXPECT_EQ(report.model, "instagats");
  EXPECT_EQ(report.folds.size(), 3u);
}
