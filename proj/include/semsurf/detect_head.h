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

#ifndef SEMSURF_DETECT_HEAD_H_
#define SEMSURF_DETECT_HEAD_H_

#include <torch/torch.h>

#include <span>
#include <vector>

#include "semsurf/anchors.h"
#include "semsurf/config.h"
#include "semsurf/nn.h"
#include "semsurf/rpg.h"

namespace semsurf {

struct BoxTensors {
  torch::Tensor centers;  // [R, 3]
  torch::Tensor dims;     // [R, 3]
  torch::Tensor yaw;      // [R]
};
BoxTensors box_tensors(std::span<const Box3D> boxes);

// Box-frame coordinates of points [R, N, 3] with respect to their own box.
torch::Tensor canonical_coordinates(const torch::Tensor& points, const BoxTensors& boxes);

// [x_c, y_c, z_c, d, s] per point, [R, N, 5].
torch::Tensor local_spatial_inputs(const GeneratedPoints& generated, const BoxTensors& boxes);

// FPS over `points` starting from the point farthest from their mean (lowest
// index on ties), which makes the selected set independent of input order.
std::vector<int> centroid_sampling(std::span<const Vec3> points, int k);

// One grouping level: `centroids` points chosen by centroid_sampling, each
// grouping every input point within `radius`, and a shared perceptron over
// [member - centroid; feature] max-pooled per group.
class SetAbstractionImpl : public torch::nn::Module {
 public:
  SetAbstractionImpl(int64_t in_channels, std::vector<int64_t> widths, double radius, int centroids);
  // coords [R, N, 3], features [R, N, C] -> (coords [R, k, 3], features [R, k, C']).
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& coords,
                                                  const torch::Tensor& features);

  Mlp mlp{nullptr};

 private:
  double radius_;
  int centroids_;
};
TORCH_MODULE(SetAbstraction);

struct HeadOutput {
  torch::Tensor roi_features;  // [R, F]
  torch::Tensor conf_logits;   // [R]
  torch::Tensor residuals;     // [R, 7]
};

class DetectHeadImpl : public torch::nn::Module {
 public:
  DetectHeadImpl(const HeadConfig& config, int64_t semantic_dim);
  HeadOutput forward(const GeneratedPoints& generated, std::span<const Box3D> boxes);
  // Encoder alone: canonical normalized coordinates [R, N, 3] and merged
  // point features [R, N, C] to the RoI feature [R, F].
  torch::Tensor encode(const torch::Tensor& coords, const torch::Tensor& features);

  Mlp local{nullptr};
  SetAbstraction sa1{nullptr};
  SetAbstraction sa2{nullptr};
  Mlp global{nullptr};
  Mlp conf_branch{nullptr};
  Mlp reg_branch{nullptr};
};
TORCH_MODULE(DetectHead);

struct RoiMatch {
  // Best 3D IoU with a same-class ground truth and its row (-1 when none).
  std::vector<double> iou;
  std::vector<int> gt_index;
};
RoiMatch match_rois(std::span<const Box3D> rois, std::span<const ObjectClass> classes,
                    std::span<const GroundTruth> gts);

// clip((iou - bg) / (fg - bg), 0, 1)
double confidence_target(double iou, const HeadConfig& config);

struct HeadLoss {
  torch::Tensor conf;
  torch::Tensor reg;
};

// Binary cross-entropy against the IoU-ramp targets, averaged over RoIs, and
// residual loss over RoIs with IoU >= reg_fg_iou divided by max(1, count).
HeadLoss head_loss(const HeadOutput& out, std::span<const Box3D> rois, const RoiMatch& match,
                   std::span<const GroundTruth> gts, const HeadConfig& config, double beta);

// Decodes the head output against the RoIs (size terms clamped as in
// clamp_size_residual).
std::vector<Box3D> refine_boxes(const torch::Tensor& residuals, std::span<const Box3D> rois);

}  // namespace semsurf

#endif  // SEMSURF_DETECT_HEAD_H_
