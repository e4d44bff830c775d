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

#ifndef SEMSURF_ROI_POOL_H_
#define SEMSURF_ROI_POOL_H_

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "semsurf/config.h"
#include "semsurf/nn.h"
#include "semsurf/sparse_conv.h"

namespace semsurf {

// Sampled voxel neighbors of a set of query points on one stage.
struct NeighborTable {
  // [M, K] voxel rows; unused slots hold the stage's voxel count.
  torch::Tensor index;
  // [M, K, 3] voxel center minus query point, zero in unused slots.
  torch::Tensor relative;
  // [M, K] true where the slot holds a neighbor.
  torch::Tensor mask;
};

NeighborTable gather_neighbors(const VoxelLayout& layout, std::span<const Vec3> points,
                               int manhattan_radius, int k, std::uint64_t seed);

// Max over the valid neighbor slots of mlp([relative; feature]); rows with no
// neighbor are zero. `mlp` must end in a ReLU.
torch::Tensor pool_neighbors(Mlp& mlp, const torch::Tensor& voxel_features,
                             const NeighborTable& table);

// Aggregates features of the last three backbone stages at each grid point
// and concatenates the per-stage results.
class RoiGridPoolImpl : public torch::nn::Module {
 public:
  RoiGridPoolImpl(const RoiPoolConfig& config, std::array<int64_t, 3> stage_channels);
  // `stages` are the stage 2-4 volumes. Returns [points.size(), 3 * stage_channels].
  torch::Tensor forward(std::span<const SparseTensor> stages, std::span<const Vec3> points);
  int64_t output_channels() const { return 3 * config_.stage_channels; }
  Mlp& stage_mlp(int i) { return mlps_[static_cast<std::size_t>(i)]; }

 private:
  RoiPoolConfig config_;
  std::vector<Mlp> mlps_;
};
TORCH_MODULE(RoiGridPool);

}  // namespace semsurf

#endif  // SEMSURF_ROI_POOL_H_
