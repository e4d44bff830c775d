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

#ifndef SEMSURF_BACKBONE_H_
#define SEMSURF_BACKBONE_H_

#include <torch/torch.h>

#include <array>
#include <vector>

#include "semsurf/config.h"
#include "semsurf/sparse_conv.h"

namespace semsurf {

struct BackboneOutput {
  // Stages 1-4 at strides 1, 2, 4, 8.
  std::vector<SparseTensor> volumes;
  // [C * Z, X, Y]; channel z * C + c holds channel c of Z-slice z.
  torch::Tensor bev;
};

// Four stages of sparse convolutions with ReLU: stage 1 is two submanifold
// layers, stages 2-4 a strided layer followed by two submanifold layers.
class Backbone3dImpl : public torch::nn::Module {
 public:
  Backbone3dImpl(const BackboneConfig& config, const GridGeometry& input_geometry);
  BackboneOutput forward(const SparseVoxelGrid& grid);
  BackboneOutput forward(const SparseTensor& input);

  // Shape of the BEV map for the configured input geometry: (C * Z, X, Y).
  std::array<int64_t, 3> bev_shape() const;
  const std::vector<SparseConv3d>& layers() const { return layers_; }
  GridGeometry stage_geometry(int stage) const;

 private:
  BackboneConfig config_;
  GridGeometry input_geometry_;
  std::vector<SparseConv3d> layers_;
};
TORCH_MODULE(Backbone3d);

torch::Tensor sparse_to_bev(const SparseTensor& volume, int64_t channels);

struct RpnOutput {
  // Flattened in (x, y, anchor) order to line up with generate_anchors.
  torch::Tensor cls_logits;  // [X * Y * A]
  torch::Tensor residuals;   // [X * Y * A, 7]
};

// Two 2D conv blocks at BEV strides 1 and 2, each upsampled back to stride 1,
// concatenated, and read out by 1x1 classification and regression layers.
class RpnHeadImpl : public torch::nn::Module {
 public:
  RpnHeadImpl(int64_t in_channels, const RpnConfig& config, int64_t anchors_per_cell);
  RpnOutput forward(const torch::Tensor& bev);
  // Sets the classification bias so every anchor starts at objectness `prior`.
  void set_class_prior(double prior);

 private:
  torch::nn::Sequential block1_{nullptr};
  torch::nn::Sequential block2_{nullptr};
  torch::nn::Sequential deblock1_{nullptr};
  torch::nn::Sequential deblock2_{nullptr};
  torch::nn::Conv2d cls_{nullptr};
  torch::nn::Conv2d reg_{nullptr};
  int64_t anchors_per_cell_;
};
TORCH_MODULE(RpnHead);

}  // namespace semsurf

#endif  // SEMSURF_BACKBONE_H_
