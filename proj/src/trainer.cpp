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

#include "semsurf/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "semsurf/augment.h"
#include "semsurf/checkpoint.h"
#include "semsurf/kitti_io.h"

namespace semsurf {
namespace {

double cosine(double from, double to, double t) {
  return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

OneCycleSchedule::OneCycleSchedule(const TrainConfig& config, int total_steps)
    : config_(config), total_steps_(std::max(1, total_steps)) {
  up_steps_ = std::max(1, static_cast<int>(config.pct_start * total_steps_));
}

double OneCycleSchedule::lr(int step) const {
  const double low = config_.lr / config_.div_factor;
  if (step < up_steps_) return cosine(low, config_.lr, static_cast<double>(step) / up_steps_);
  const double t = static_cast<double>(step - up_steps_) / std::max(1, total_steps_ - up_steps_);
  return cosine(config_.lr, low / config_.final_div_factor, std::min(1.0, t));
}

double OneCycleSchedule::beta1(int step) const {
  if (step < up_steps_) {
    return cosine(config_.beta1_max, config_.beta1_min, static_cast<double>(step) / up_steps_);
  }
  const double t = static_cast<double>(step - up_steps_) / std::max(1, total_steps_ - up_steps_);
  return cosine(config_.beta1_min, config_.beta1_max, std::min(1.0, t));
}

TrainData prepare_training_data(std::vector<Scene> scenes, const TargetConfig& config) {
  TrainData data;
  data.bank = InstanceBank::build(scenes);
  for (Scene& s : scenes) data.bank.attach(s);
  data.targets = TargetBank::build(data.bank, config);
  data.scenes = std::move(scenes);
  return data;
}

int total_training_steps(const TrainConfig& config, std::size_t num_scenes) {
  if (config.max_steps > 0) return config.max_steps;
  const auto per_epoch = static_cast<int>((num_scenes + static_cast<std::size_t>(config.batch_size) - 1) /
                                          static_cast<std::size_t>(config.batch_size));
  return std::max(1, per_epoch * config.epochs);
}

void seed_everything(std::uint64_t seed, bool deterministic) {
  torch::manual_seed(seed);
  if (deterministic) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, false);
  }
}

std::vector<StepRecord> train(Detector& model, const TrainData& data, const TrainOptions& options) {
  const Config& config = model->config();
  const TrainConfig& tc = config.train;
  if (data.scenes.empty()) throw TrainingError("no training scenes");
  const int steps = total_training_steps(tc, data.scenes.size());
  const OneCycleSchedule schedule(tc, steps);
  model->train();

  torch::optim::AdamW optimizer(
      model->parameters(),
      torch::optim::AdamWOptions(schedule.lr(0)).betas({schedule.beta1(0), tc.beta2}).weight_decay(tc.weight_decay));

  std::ofstream metrics;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    metrics.open(options.out_dir / "metrics.csv", std::ios::trunc);
    metrics << "step,lr,beta1";
    for (const char* name : kLossNames) metrics << ',' << name;
    metrics << ",total,offset_proposals,seconds\n";
    metrics << std::setprecision(9);
  }

  const std::size_t n = data.scenes.size();
  const auto batch = static_cast<std::size_t>(tc.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(steps));
  std::size_t cursor = n;
  int epoch = -1;
  for (int step = 0; step < steps; ++step) {
    const auto started = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = step;
    rec.lr = schedule.lr(step);
    rec.beta1 = schedule.beta1(step);
    for (auto& group : optimizer.param_groups()) {
      auto& opt = static_cast<torch::optim::AdamWOptions&>(group.options());
      opt.lr(rec.lr);
      opt.betas({rec.beta1, tc.beta2});
    }

    std::array<torch::Tensor, kNumLossComponents> sums;
    std::size_t used = 0;
    for (std::size_t b = 0; b < std::min(batch, n); ++b) {
      if (cursor >= n) {
        ++epoch;
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), std::mt19937_64(mix(tc.seed, static_cast<std::uint64_t>(epoch))));
        cursor = 0;
      }
      const Scene& source = data.scenes[order[cursor++]];
      const std::uint64_t sample_seed = mix(mix(tc.seed, static_cast<std::uint64_t>(step)), b);
      const Scene scene = config.augment.enabled
                              ? augment(source, config.augment, &data.bank, sample_seed)
                              : source;
      const LossBreakdown loss = model->training_loss(scene, &data.targets, sample_seed);
      for (std::size_t k = 0; k < sums.size(); ++k) {
        sums[k] = sums[k].defined() ? sums[k] + loss.parts[k] : loss.parts[k];
      }
      rec.offset_proposals += loss.num_offset_proposals;
      ++used;
    }
    torch::Tensor total;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      sums[k] = sums[k] / static_cast<double>(used);
      rec.components[k] = sums[k].item<double>();
      if (!std::isfinite(rec.components[k])) {
        throw TrainingError(std::string("non-finite ") + kLossNames[k] + " loss at step " +
                            std::to_string(step));
      }
      total = total.defined() ? total + sums[k] : sums[k];
    }
    rec.total = total.item<double>();

    optimizer.zero_grad();
    total.backward();
    torch::nn::utils::clip_grad_norm_(model->parameters(), tc.grad_clip);
    optimizer.step();

    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (options.log != nullptr && tc.log_every > 0 && (step % tc.log_every == 0 || step + 1 == steps)) {
      std::ostringstream line;
      line << "step " << step << " lr " << std::setprecision(4) << rec.lr;
      for (std::size_t k = 0; k < kLossNames.size(); ++k) {
        line << ' ' << kLossNames[k] << ' ' << std::setprecision(6) << rec.components[k];
      }
      line << " total " << rec.total << " (" << std::setprecision(3) << rec.seconds << " s)";
      *options.log << line.str() << std::endl;
    }
    if (metrics.is_open()) {
      metrics << rec.step << ',' << rec.lr << ',' << rec.beta1;
      for (double c : rec.components) metrics << ',' << c;
      metrics << ',' << rec.total << ',' << rec.offset_proposals << ',' << rec.seconds << '\n';
    }
    if (!options.out_dir.empty() && tc.checkpoint_every > 0 && (step + 1) % tc.checkpoint_every == 0) {
      save_checkpoint(options.out_dir / ("checkpoint_" + std::to_string(step + 1) + ".bin"), *model,
                      config, static_cast<std::uint64_t>(step + 1));
    }
    if (options.on_step) options.on_step(rec);
    records.push_back(rec);
  }
  if (!options.out_dir.empty()) {
    save_checkpoint(options.out_dir / "checkpoint.bin", *model, config, static_cast<std::uint64_t>(steps));
  }
  return records;
}

std::vector<FrameEvaluation> evaluate_frames(Detector& model, const std::vector<Scene>& scenes) {
  torch::NoGradGuard no_grad;
  model->eval();
  std::vector<FrameEvaluation> frames;
  frames.reserve(scenes.size());
  for (const Scene& scene : scenes) {
    frames.push_back({model->infer(scene).detections, detectable_objects(scene, model->config())});
  }
  return frames;
}

double mean_offset_on_ground_truth(Detector& model, const std::vector<Scene>& scenes,
                                   const TargetBank& targets) {
  torch::NoGradGuard no_grad;
  double sum = 0.0;
  int count = 0;
  for (const Scene& scene : scenes) {
    RoiSet rois;
    std::vector<const GroundTruth*> used;
    for (const GroundTruth& gt : scene.objects) {
      if (!targets.contains(gt.bank_id)) continue;
      rois.boxes.push_back(gt.box);
      rois.classes.push_back(gt.cls);
      used.push_back(&gt);
    }
    if (used.empty()) continue;
    const StageTwoOutput out = model->refine(scene, rois);
    for (std::size_t i = 0; i < used.size(); ++i) {
      const std::vector<Vec3> generated = tensor_to_points(out.generated.points[static_cast<int64_t>(i)]);
      const std::vector<Vec3> target = targets.posed(used[i]->bank_id, used[i]->box, scene.flipped);
      sum += chamfer_distance(generated, target).value;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

std::vector<Scene> load_split(const std::filesystem::path& root, const std::string& split) {
  const KittiLayout layout{root};
  std::vector<Scene> scenes;
  for (const std::string& id : read_split(layout.split(split))) scenes.push_back(read_frame(layout, id));
  return scenes;
}

}  // namespace semsurf
