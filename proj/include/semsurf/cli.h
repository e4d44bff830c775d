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

#ifndef SEMSURF_CLI_H_
#define SEMSURF_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "semsurf/config.h"
#include "semsurf/detector.h"

namespace semsurf {

struct CommonOptions {
  std::filesystem::path config_path;
  // Built-in configuration used when no config file is given.
  std::string preset = "full";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::filesystem::path data_root;
  std::filesystem::path out;
};

// Config file or preset, with --seed and --deterministic applied.
Config resolve_config(const CommonOptions& options);

struct TrainOptionsCli {
  std::optional<int> max_steps;
  std::filesystem::path targets_dir;
};
int command_train(const CommonOptions& common, const TrainOptionsCli& options, std::ostream& log);

struct EvalOptionsCli {
  std::filesystem::path checkpoint;
  std::string split = "val";
  std::optional<double> iou;
};
int command_eval(const CommonOptions& common, const EvalOptionsCli& options, std::ostream& log);

struct InferOptionsCli {
  std::filesystem::path checkpoint;
  std::string split = "val";
  bool export_points = false;
  float score_threshold = 0.6F;
};
int command_infer(const CommonOptions& common, const InferOptionsCli& options, std::ostream& log);

struct ProbeOptionsCli {
  std::filesystem::path checkpoint;
  std::string frame;
  Distortion distortion;
};
int command_probe(const CommonOptions& common, const ProbeOptionsCli& options, std::ostream& log);

int command_build_targets(const CommonOptions& common, std::ostream& log);

struct SyntheticOptionsCli {
  int train_frames = 20;
  int val_frames = 0;
  int objects = 3;
  // Comma-separated subset of Car, Pedestrian, Cyclist.
  std::string classes = "Car";
};
int command_make_synthetic(const CommonOptions& common, const SyntheticOptionsCli& options,
                           std::ostream& log);

// Parses argv and dispatches to the commands above.
int run_cli(int argc, char** argv);

// Loads a checkpoint into a fresh detector built from its stored config.
Detector load_detector(const std::filesystem::path& checkpoint);

}  // namespace semsurf

#endif  // SEMSURF_CLI_H_
