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

#ifndef SEMSURF_TRAINER_H_
#define SEMSURF_TRAINER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "semsurf/completion_target.h"
#include "semsurf/detector.h"
#include "semsurf/evaluation.h"
#include "semsurf/instance_bank.h"

namespace semsurf {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cosine one-cycle schedule: the learning rate rises from lr / div_factor to
// lr over the first pct_start of training and then decays to
// lr / div_factor / final_div_factor, while beta1 moves the opposite way
// between beta1_max and beta1_min.
class OneCycleSchedule {
 public:
  OneCycleSchedule(const TrainConfig& config, int total_steps);
  double lr(int step) const;
  double beta1(int step) const;

 private:
  TrainConfig config_;
  int total_steps_;
  int up_steps_;
};

struct StepRecord {
  int step = 0;
  double lr = 0.0;
  double beta1 = 0.0;
  // Batch means, indexed like kLossNames.
  std::array<double, kNumLossComponents> components{};
  double total = 0.0;
  int offset_proposals = 0;
  double seconds = 0.0;
};

struct TrainData {
  std::vector<Scene> scenes;
  InstanceBank bank;
  TargetBank targets;
};

// Builds the instance bank and completion targets of `scenes` and attaches
// bank ids to their objects.
TrainData prepare_training_data(std::vector<Scene> scenes, const TargetConfig& config);

struct TrainOptions {
  std::ostream* log = nullptr;
  // When set, receives metrics.csv and periodic checkpoints.
  std::filesystem::path out_dir;
  std::function<void(const StepRecord&)> on_step;
};

int total_training_steps(const TrainConfig& config, std::size_t num_scenes);

// Minimizes the summed loss with AdamW under the one-cycle schedule. Throws
// TrainingError naming the component when a loss becomes non-finite.
std::vector<StepRecord> train(Detector& model, const TrainData& data, const TrainOptions& options);

std::vector<FrameEvaluation> evaluate_frames(Detector& model, const std::vector<Scene>& scenes);

// Mean Chamfer distance between the points generated for every ground truth
// (used directly as the RoI) and its completion target.
double mean_offset_on_ground_truth(Detector& model, const std::vector<Scene>& scenes,
                                   const TargetBank& targets);

std::vector<Scene> load_split(const std::filesystem::path& root, const std::string& split);

void seed_everything(std::uint64_t seed, bool deterministic);

}  // namespace semsurf

#endif  // SEMSURF_TRAINER_H_
