/* Copyright 2026 The semsurf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <torch/torch.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "semsurf/checkpoint.h"
#include "semsurf/cli.h"
#include "semsurf/export.h"
#include "semsurf/synthetic.h"
#include "semsurf/trainer.h"
#include "temp_dir.h"

namespace semsurf {
namespace {

namespace fs = std::filesystem;

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "semsurf");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TrainData tiny_data() {
  std::vector<Scene> scenes;
  for (std::uint64_t i = 0; i < 2; ++i) scenes.push_back(synth_scene(SynthSpec{}, 40 + i));
  return prepare_training_data(std::move(scenes), Config::reduced().targets);
}

TEST_CASE("one-cycle schedule endpoints") {
  TrainConfig c;
  c.lr = 0.01;
  const OneCycleSchedule s(c, 100);
  CHECK(s.lr(0) == doctest::Approx(0.001));
  CHECK(s.lr(40) == doctest::Approx(0.01));
  CHECK(s.lr(100) == doctest::Approx(0.001 / 1e4));
  CHECK(s.beta1(0) == doctest::Approx(0.95));
  CHECK(s.beta1(40) == doctest::Approx(0.85));
  CHECK(s.beta1(100) == doctest::Approx(0.95));
  for (int i = 1; i <= 40; ++i) CHECK(s.lr(i) >= s.lr(i - 1));
  for (int i = 41; i <= 100; ++i) CHECK(s.lr(i) <= s.lr(i - 1));
}

TEST_CASE("checkpoints round trip and reject mismatches") {
  TempDir dir("ckpt");
  torch::manual_seed(0);
  const Config config = Config::reduced();
  Detector a(config);
  save_checkpoint(dir.path() / "a.bin", *a, config, 17);
  const Checkpoint ck = read_checkpoint(dir.path() / "a.bin");
  CHECK(ck.step == 17);
  CHECK(ck.config == config);

  torch::manual_seed(1);
  Detector b(config);
  load_parameters(*b, ck);
  const auto pa = a->named_parameters();
  const auto pb = b->named_parameters();
  for (const auto& item : pa) CHECK(torch::equal(item.value(), pb[item.key()]));

  std::string bytes = slurp(dir.path() / "a.bin");
  bytes[0] = 'X';
  std::ofstream(dir.path() / "bad.bin", std::ios::binary) << bytes;
  CHECK_THROWS_AS(read_checkpoint(dir.path() / "bad.bin"), CheckpointError);
  std::ofstream(dir.path() / "short.bin", std::ios::binary) << slurp(dir.path() / "a.bin").substr(0, 64);
  CHECK_THROWS_AS(read_checkpoint(dir.path() / "short.bin"), CheckpointError);

  Config wider = config;
  wider.rpg.semantic_dim = 16;
  Detector c(wider);
  CHECK_THROWS_AS(load_parameters(*c, ck), CheckpointError);
}

TEST_CASE("deterministic training repeats exactly") {
  const TrainData data = tiny_data();
  Config config = Config::reduced();
  config.train.max_steps = 2;
  config.train.batch_size = 2;
  std::vector<std::vector<StepRecord>> runs;
  for (int r = 0; r < 2; ++r) {
    seed_everything(config.train.seed, true);
    Detector model(config);
    runs.push_back(train(model, data, TrainOptions{}));
  }
  REQUIRE(runs[0].size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(runs[0][i].total == runs[1][i].total);
    CHECK(runs[0][i].components == runs[1][i].components);
  }
}

TEST_CASE("non-finite losses stop training with the component name") {
  const TrainData data = tiny_data();
  Config config = Config::reduced();
  config.train.max_steps = 1;
  seed_everything(0, true);
  Detector model(config);
  {
    torch::NoGradGuard no_grad;
    for (auto& item : model->rpn->named_parameters()) {
      if (item.key().starts_with("cls")) item.value().fill_(std::numeric_limits<float>::quiet_NaN());
    }
  }
  try {
    train(model, data, TrainOptions{});
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("rpn_cls") != std::string::npos);
  }
}

TEST_CASE("command line workflow") {
  TempDir dir("cli");
  const std::string data = (dir.path() / "data").string();
  const std::string run = (dir.path() / "run").string();
  REQUIRE(cli({"make-synthetic", "--out", data, "--train-frames", "2", "--val-frames", "1", "--seed", "5"}) == 0);
  CHECK(fs::exists(dir.path() / "data" / "velodyne" / "000002.bin"));

  const std::string t1 = (dir.path() / "targets1").string();
  const std::string t2 = (dir.path() / "targets2").string();
  REQUIRE(cli({"build-targets", "--preset", "reduced", "--data-root", data, "--out", t1}) == 0);
  REQUIRE(cli({"build-targets", "--preset", "reduced", "--data-root", data, "--out", t2}) == 0);
  CHECK(slurp(fs::path(t1) / "index.json") == slurp(fs::path(t2) / "index.json"));
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(t1)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    CHECK(slurp(entry.path()) == slurp(fs::path(t2) / fs::relative(entry.path(), t1)));
  }
  CHECK(files > 1);

  REQUIRE(cli({"train", "--preset", "reduced", "--data-root", data, "--out", run, "--max-steps", "2",
               "--targets", t1}) == 0);
  CHECK(fs::exists(fs::path(run) / "checkpoint.bin"));
  CHECK(fs::exists(fs::path(run) / "metrics.csv"));
  CHECK(fs::exists(fs::path(run) / "config.yaml"));

  REQUIRE(cli({"eval", "--data-root", data, "--out", run}) == 0);
  CHECK(slurp(fs::path(run) / "ap_val.txt").find("Car") != std::string::npos);

  const Detector model = load_detector(fs::path(run) / "checkpoint.bin");
  const int g = model->config().roi.grid_size;
  const std::string all = (dir.path() / "all").string();
  const std::string high = (dir.path() / "high").string();
  const std::string none = (dir.path() / "none").string();
  REQUIRE(cli({"infer", "--data-root", data, "--checkpoint", run + "/checkpoint.bin", "--out", all,
               "--export-points", "--score-threshold", "0"}) == 0);
  REQUIRE(cli({"infer", "--data-root", data, "--checkpoint", run + "/checkpoint.bin", "--out", high,
               "--export-points", "--score-threshold", "0.6"}) == 0);
  REQUIRE(cli({"infer", "--data-root", data, "--checkpoint", run + "/checkpoint.bin", "--out", none,
               "--export-points", "--score-threshold", "1.5"}) == 0);
  CHECK(fs::exists(fs::path(all) / "detections" / "000002.txt"));
  const auto every = read_ply(fs::path(all) / "points" / "000002.ply");
  CHECK(every.size() % static_cast<std::size_t>(g * g * g) == 0);
  std::vector<ScoredPoint> expected;
  for (const ScoredPoint& p : every) {
    if (p.score >= 0.6F) expected.push_back(p);
  }
  const auto kept = read_ply(fs::path(high) / "points" / "000002.ply");
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(kept[i].score == expected[i].score);
    CHECK(kept[i].position == expected[i].position);
  }
  CHECK(read_ply(fs::path(none) / "points" / "000002.ply").empty());

  const std::string probe = (dir.path() / "probe").string();
  REQUIRE(cli({"probe-misaligned", "--data-root", data, "--checkpoint", run + "/checkpoint.bin",
               "--frame", "000000", "--out", probe}) == 0);
  const std::string csv = slurp(fs::path(probe) / "probe_000000.csv");
  CHECK(csv.rfind("gt,iou_before,iou_after\n", 0) == 0);

  CHECK(cli({"probe-misaligned", "--data-root", data}) != 0);
  CHECK(cli({"train", "--data-root", data}) != 0);
}

}  // namespace
}  // namespace semsurf
