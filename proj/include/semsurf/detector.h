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

#ifndef SEMSURF_DETECTOR_H_
#define SEMSURF_DETECTOR_H_

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semsurf/anchors.h"
#include "semsurf/backbone.h"
#include "semsurf/completion_target.h"
#include "semsurf/config.h"
#include "semsurf/detect_head.h"
#include "semsurf/evaluation.h"
#include "semsurf/roi_pool.h"
#include "semsurf/rpg.h"
#include "semsurf/scene.h"

namespace semsurf {

inline constexpr int kNumLossComponents = 6;
inline constexpr std::array<const char*, kNumLossComponents> kLossNames{
    "rpn_cls", "rpn_reg", "head_conf", "head_reg", "score", "offset"};

struct LossBreakdown {
  // Indexed like kLossNames.
  std::array<torch::Tensor, kNumLossComponents> parts;
  int num_offset_proposals = 0;

  torch::Tensor total() const;
};

struct RoiSet {
  std::vector<Box3D> boxes;
  std::vector<ObjectClass> classes;
};

struct StageTwoOutput {
  RoiSet rois;
  GeneratedPoints generated;
  HeadOutput head;
  std::vector<Box3D> refined;
  std::vector<double> confidence;
};

struct InferenceResult {
  std::vector<Proposal> proposals;
  StageTwoOutput stage_two;
  std::vector<Detection> detections;
};

class DetectorImpl : public torch::nn::Module {
 public:
  explicit DetectorImpl(const Config& config);

  const Config& config() const { return config_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }

  BackboneOutput extract(const Scene& scene);
  // Decoded, NMS-filtered proposals of the RPN output.
  std::vector<Proposal> propose(const RpnOutput& rpn, bool training) const;
  StageTwoOutput stage_two(const BackboneOutput& features, RoiSet rois);

  // Every loss component for one scene. `targets` supplies
  // completion targets by bank id; `seed` drives RoI sampling.
  LossBreakdown training_loss(const Scene& scene, const TargetBank* targets, std::uint64_t seed);
  InferenceResult infer(const Scene& scene);
  // Stage two on externally supplied RoIs.
  StageTwoOutput refine(const Scene& scene, RoiSet rois);

  Backbone3d backbone{nullptr};
  RpnHead rpn{nullptr};
  RoiGridPool pool{nullptr};
  Rpg rpg{nullptr};
  DetectHead head{nullptr};

 private:
  RoiSet sample_training_rois(const std::vector<Proposal>& proposals,
                              const std::vector<GroundTruth>& gts, std::uint64_t seed) const;

  Config config_;
  std::vector<Anchor> anchors_;
};
TORCH_MODULE(Detector);

// Ground truths of the classes the detector handles.
std::vector<GroundTruth> detectable_objects(const Scene& scene, const Config& config);

struct Distortion {
  double translation = 0.5;
  double yaw = 0.2;
  double scale = 0.0;
};

struct ProbeRow {
  int gt_index = -1;
  Box3D proposal;
  Box3D refined;
  double iou_before = 0.0;
  double iou_after = 0.0;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  StageTwoOutput stage_two;
  double mean_before() const;
  double mean_after() const;
};

// Perturbs each ground truth by a planar translation of length at most
// `translation`, a yaw change in [-yaw, yaw] and a size factor in
// [1 - scale, 1 + scale], then refines the perturbed boxes in stage two.
ProbeReport probe_misaligned(Detector& detector, const Scene& scene, const Distortion& distortion,
                             std::uint64_t seed);

}  // namespace semsurf

#endif  // SEMSURF_DETECTOR_H_
