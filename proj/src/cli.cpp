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

#include "semsurf/cli.h"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "semsurf/checkpoint.h"
#include "semsurf/completion_target.h"
#include "semsurf/export.h"
#include "semsurf/kitti_io.h"
#include "semsurf/synthetic.h"
#include "semsurf/trainer.h"

namespace semsurf {
namespace fs = std::filesystem;
namespace {

fs::path checkpoint_or_default(const fs::path& given, const CommonOptions& common) {
  if (!given.empty()) return given;
  return common.out / "checkpoint.bin";
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Config resolve_config(const CommonOptions& options) {
  Config config;
  if (!options.config_path.empty()) {
    config = load_config(options.config_path);
  } else if (options.preset == "full") {
    config = Config::full();
  } else if (options.preset == "reduced") {
    config = Config::reduced();
  } else {
    throw ConfigError("unknown preset '" + options.preset + "'");
  }
  if (options.seed) config.train.seed = *options.seed;
  if (options.deterministic) config.train.deterministic = true;
  config.validate();
  return config;
}

Detector load_detector(const fs::path& checkpoint) {
  const Checkpoint ck = read_checkpoint(checkpoint);
  seed_everything(ck.config.train.seed, ck.config.train.deterministic);
  Detector model(ck.config);
  load_parameters(*model, ck);
  model->eval();
  return model;
}

int command_train(const CommonOptions& common, const TrainOptionsCli& options, std::ostream& log) {
  require(!common.data_root.empty(), "train needs --data-root");
  require(!common.out.empty(), "train needs --out");
  Config config = resolve_config(common);
  if (options.max_steps) config.train.max_steps = *options.max_steps;
  seed_everything(config.train.seed, config.train.deterministic);

  std::vector<Scene> scenes = load_split(common.data_root, "train");
  TrainData data;
  if (!options.targets_dir.empty()) {
    auto [bank, targets] = load_bank(options.targets_dir);
    for (Scene& s : scenes) bank.attach(s);
    data = {std::move(scenes), std::move(bank), std::move(targets)};
  } else {
    data = prepare_training_data(std::move(scenes), config.targets);
  }
  log << "training on " << data.scenes.size() << " frames, " << data.bank.size()
      << " bank instances" << std::endl;

  Detector model(config);
  log << "trainable parameters: " << count_parameters(*model) << std::endl;
  fs::create_directories(common.out);
  save_config(common.out / "config.yaml", config);
  TrainOptions opts;
  opts.log = &log;
  opts.out_dir = common.out;
  train(model, data, opts);
  log << "wrote " << (common.out / "checkpoint.bin").string() << std::endl;
  return 0;
}

int command_eval(const CommonOptions& common, const EvalOptionsCli& options, std::ostream& log) {
  require(!common.data_root.empty(), "eval needs --data-root");
  Detector model = load_detector(checkpoint_or_default(options.checkpoint, common));
  std::array<double, kNumClasses> thresholds = model->config().eval.iou_thresholds;
  if (!common.config_path.empty()) thresholds = load_config(common.config_path).eval.iou_thresholds;
  if (options.iou) thresholds.fill(*options.iou);

  const std::vector<Scene> scenes = load_split(common.data_root, options.split);
  const auto started = std::chrono::steady_clock::now();
  const std::vector<FrameEvaluation> frames = evaluate_frames(model, scenes);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::string table = format_ap_table(evaluate_ap_table(frames, model->config().rpn.classes, thresholds));
  log << table;
  log << "frames " << scenes.size() << ", " << std::setprecision(4)
      << (scenes.empty() ? 0.0 : seconds / static_cast<double>(scenes.size())) << " s/frame" << std::endl;
  if (!common.out.empty()) {
    fs::create_directories(common.out);
    std::ofstream(common.out / ("ap_" + options.split + ".txt")) << table;
  }
  return 0;
}

int command_infer(const CommonOptions& common, const InferOptionsCli& options, std::ostream& log) {
  require(!common.data_root.empty(), "infer needs --data-root");
  require(!common.out.empty(), "infer needs --out");
  Detector model = load_detector(checkpoint_or_default(options.checkpoint, common));
  const KittiLayout layout{common.data_root};
  fs::create_directories(common.out / "detections");
  if (options.export_points) fs::create_directories(common.out / "points");
  int failures = 0;
  torch::NoGradGuard no_grad;
  for (const std::string& id : read_split(layout.split(options.split))) {
    Scene scene;
    Calibration calib;
    try {
      scene = read_frame(layout, id);
      calib = read_calibration(layout.calib(id));
    } catch (const std::exception& e) {
      log << "warning: skipping frame " << id << ": " << e.what() << std::endl;
      ++failures;
      continue;
    }
    const auto started = std::chrono::steady_clock::now();
    const InferenceResult result = model->infer(scene);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_detections(common.out / "detections" / (id + ".txt"), result.detections, calib);
    if (options.export_points) {
      const std::vector<Vec3> pts = tensor_to_points(result.stage_two.generated.points);
      const torch::Tensor scores = result.stage_two.generated.scores.reshape({-1}).contiguous();
      std::vector<ScoredPoint> all;
      all.reserve(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        all.push_back({pts[i], scores[static_cast<int64_t>(i)].item<float>()});
      }
      write_ply(common.out / "points" / (id + ".ply"), filter_by_score(all, options.score_threshold));
    }
    log << id << ": " << result.detections.size() << " detections, " << std::setprecision(3)
        << seconds << " s" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

int command_probe(const CommonOptions& common, const ProbeOptionsCli& options, std::ostream& log) {
  require(!common.data_root.empty(), "probe-misaligned needs --data-root");
  require(!options.frame.empty(), "probe-misaligned needs --frame");
  Detector model = load_detector(checkpoint_or_default(options.checkpoint, common));
  const Scene scene = read_frame(KittiLayout{common.data_root}, options.frame);
  const ProbeReport report =
      probe_misaligned(model, scene, options.distortion, common.seed.value_or(model->config().train.seed));
  std::ostringstream text;
  text << "gt,iou_before,iou_after\n" << std::setprecision(6);
  for (const ProbeRow& row : report.rows) {
    text << row.gt_index << ',' << row.iou_before << ',' << row.iou_after << '\n';
  }
  log << text.str() << "mean before " << report.mean_before() << ", mean after "
      << report.mean_after() << std::endl;
  if (!common.out.empty()) {
    fs::create_directories(common.out);
    std::ofstream(common.out / ("probe_" + options.frame + ".csv")) << text.str();
    const GeneratedPoints& g = report.stage_two.generated;
    const std::vector<Vec3> pts = tensor_to_points(g.points);
    const torch::Tensor scores = g.scores.reshape({-1}).contiguous();
    std::vector<ScoredPoint> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out.push_back({pts[i], scores[static_cast<int64_t>(i)].item<float>()});
    }
    write_ply(common.out / ("probe_" + options.frame + ".ply"), out);
  }
  return 0;
}

int command_build_targets(const CommonOptions& common, std::ostream& log) {
  require(!common.data_root.empty(), "build-targets needs --data-root");
  require(!common.out.empty(), "build-targets needs --out");
  const Config config = resolve_config(common);
  std::vector<Scene> scenes = load_split(common.data_root, "train");
  const InstanceBank bank = InstanceBank::build(scenes);
  for (ObjectClass cls : kAllClasses) {
    const bool present = std::any_of(bank.instances().begin(), bank.instances().end(),
                                     [&](const BankInstance& b) { return b.cls == cls; });
    if (!present) log << "warning: no " << class_name(cls) << " instances, class skipped" << std::endl;
  }
  const TargetBank targets = TargetBank::build(bank, config.targets);
  save_bank(common.out, bank, targets);
  log << "wrote " << bank.size() << " instances to " << common.out.string() << std::endl;
  return 0;
}

int command_make_synthetic(const CommonOptions& common, const SyntheticOptionsCli& options,
                           std::ostream& log) {
  require(!common.out.empty(), "make-synthetic needs --out");
  SynthSpec spec;
  spec.num_objects = options.objects;
  spec.class_weights = {0.0, 0.0, 0.0};
  std::stringstream list(options.classes);
  for (std::string name; std::getline(list, name, ',');) {
    const std::optional<ObjectClass> cls = parse_class(name);
    require(cls.has_value(), "unknown class '" + name + "'");
    spec.class_weights[static_cast<std::size_t>(*cls)] = 1.0;
  }
  const KittiLayout layout{common.out};
  const std::uint64_t seed = common.seed.value_or(0);
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  for (int i = 0; i < options.train_frames + options.val_frames; ++i) {
    std::ostringstream id;
    id << std::setw(6) << std::setfill('0') << i;
    write_frame(layout, synth_scene(spec, seed * 1000003ULL + static_cast<std::uint64_t>(i), id.str()));
    (i < options.train_frames ? train_ids : val_ids).push_back(id.str());
  }
  write_split(layout.split("train"), train_ids);
  write_split(layout.split("val"), val_ids);
  log << "wrote " << train_ids.size() << " train and " << val_ids.size() << " val frames to "
      << common.out.string() << std::endl;
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Two-stage LiDAR detector with RoI point generation"};
  app.require_subcommand(1);

  CommonOptions common;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "Configuration file");
    cmd->add_option("--preset", common.preset, "Built-in configuration when --config is absent")
        ->check(CLI::IsMember({"full", "reduced"}));
    cmd->add_option("--seed", common.seed, "Random seed");
    cmd->add_flag("--deterministic", common.deterministic, "Deterministic execution");
    cmd->add_option("--data-root", common.data_root, "Dataset root in KITTI layout");
    cmd->add_option("--out", common.out, "Output directory");
  };

  TrainOptionsCli train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the detector");
  add_common(train_cmd);
  train_cmd->add_option("--max-steps", train_opts.max_steps, "Override the number of steps");
  train_cmd->add_option("--targets", train_opts.targets_dir, "Prebuilt target bank");

  EvalOptionsCli eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "AP_R40 evaluation");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint (default OUT/checkpoint.bin)");
  eval_cmd->add_option("--split", eval_opts.split, "Split name");
  eval_cmd->add_option("--iou", eval_opts.iou, "IoU threshold for every class");

  InferOptionsCli infer_opts;
  CLI::App* infer_cmd = app.add_subcommand("infer", "Write detections and generated points");
  add_common(infer_cmd);
  infer_cmd->add_option("--checkpoint", infer_opts.checkpoint, "Checkpoint (default OUT/checkpoint.bin)");
  infer_cmd->add_option("--split", infer_opts.split, "Split name");
  infer_cmd->add_flag("--export-points", infer_opts.export_points, "Write generated points as PLY");
  infer_cmd->add_option("--score-threshold", infer_opts.score_threshold, "Export score threshold");

  ProbeOptionsCli probe_opts;
  CLI::App* probe_cmd = app.add_subcommand("probe-misaligned", "Refine distorted ground truths");
  add_common(probe_cmd);
  probe_cmd->add_option("--checkpoint", probe_opts.checkpoint, "Checkpoint (default OUT/checkpoint.bin)");
  probe_cmd->add_option("--frame", probe_opts.frame, "Frame id")->required();
  probe_cmd->add_option("--translation", probe_opts.distortion.translation, "Max translation (m)");
  probe_cmd->add_option("--yaw", probe_opts.distortion.yaw, "Max yaw change (rad)");
  probe_cmd->add_option("--scale", probe_opts.distortion.scale, "Max relative size change");

  CLI::App* targets_cmd = app.add_subcommand("build-targets", "Build the completion target bank");
  add_common(targets_cmd);

  SyntheticOptionsCli synth_opts;
  CLI::App* synth_cmd = app.add_subcommand("make-synthetic", "Write synthetic frames in KITTI layout");
  add_common(synth_cmd);
  synth_cmd->add_option("--train-frames", synth_opts.train_frames, "Training frames");
  synth_cmd->add_option("--val-frames", synth_opts.val_frames, "Validation frames");
  synth_cmd->add_option("--objects", synth_opts.objects, "Objects per frame");
  synth_cmd->add_option("--classes", synth_opts.classes, "Comma-separated classes");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return command_train(common, train_opts, std::cout);
    if (*eval_cmd) return command_eval(common, eval_opts, std::cout);
    if (*infer_cmd) return command_infer(common, infer_opts, std::cout);
    if (*probe_cmd) return command_probe(common, probe_opts, std::cout);
    if (*targets_cmd) return command_build_targets(common, std::cout);
    if (*synth_cmd) return command_make_synthetic(common, synth_opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}

}  // namespace semsurf
