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

#include "semsurf/roi_pool.h"

namespace semsurf {

NeighborTable gather_neighbors(const VoxelLayout& layout, std::span<const Vec3> points,
                               int manhattan_radius, int k, std::uint64_t seed) {
  const auto m = static_cast<int64_t>(points.size());
  const auto pad = static_cast<int64_t>(layout.size());
  NeighborTable t;
  t.index = torch::full({m, k}, pad, torch::kInt64);
  t.relative = torch::zeros({m, k, 3}, torch::kFloat32);
  t.mask = torch::zeros({m, k}, torch::kBool);
  auto idx = t.index.accessor<int64_t, 2>();
  auto rel = t.relative.accessor<float, 3>();
  auto mask = t.mask.accessor<bool, 2>();
  const GridGeometry& geometry = layout.geometry();
  for (int64_t i = 0; i < m; ++i) {
    const Vec3& p = points[static_cast<std::size_t>(i)];
    const std::uint64_t point_seed = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i);
    const std::vector<int> rows =
        neighbor_voxel_query(layout, geometry.quantize(p), manhattan_radius, k, point_seed);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto s = static_cast<int64_t>(j);
      idx[i][s] = rows[j];
      mask[i][s] = true;
      const Vec3 d = geometry.voxel_center(layout.indices()[static_cast<std::size_t>(rows[j])]) - p;
      rel[i][s][0] = static_cast<float>(d.x);
      rel[i][s][1] = static_cast<float>(d.y);
      rel[i][s][2] = static_cast<float>(d.z);
    }
  }
  return t;
}

torch::Tensor pool_neighbors(Mlp& mlp, const torch::Tensor& voxel_features,
                             const NeighborTable& table) {
  const int64_t m = table.index.size(0);
  const int64_t k = table.index.size(1);
  const int64_t c = voxel_features.size(1);
  const torch::Tensor padded = torch::cat({voxel_features, torch::zeros({1, c}, voxel_features.options())});
  const torch::Tensor gathered = padded.index_select(0, table.index.reshape({-1})).reshape({m, k, c});
  const torch::Tensor h = mlp->forward(torch::cat({table.relative, gathered}, 2));
  // Activations are non-negative, so zeroed slots never win the max and an
  // empty neighborhood pools to zero.
  const torch::Tensor masked = h * table.mask.unsqueeze(2).to(h.dtype());
  if (k == 0) return torch::zeros({m, h.size(2)});
  return std::get<0>(masked.max(1));
}

RoiGridPoolImpl::RoiGridPoolImpl(const RoiPoolConfig& config, std::array<int64_t, 3> stage_channels)
    : config_(config) {
  for (int i = 0; i < 3; ++i) {
    mlps_.push_back(register_module(
        "stage" + std::to_string(i + 2),
        Mlp(std::vector<int64_t>{3 + stage_channels[static_cast<std::size_t>(i)], config.mlp_hidden,
                                 config.stage_channels},
            true)));
  }
}

torch::Tensor RoiGridPoolImpl::forward(std::span<const SparseTensor> stages,
                                       std::span<const Vec3> points) {
  if (stages.size() != 3) throw ConfigError("RoI pooling needs exactly three stages");
  std::vector<torch::Tensor> parts;
  for (std::size_t s = 0; s < 3; ++s) {
    const NeighborTable table = gather_neighbors(stages[s].layout, points, config_.neighbor_radius,
                                                 config_.neighbor_samples, s + 2);
    parts.push_back(pool_neighbors(mlps_[s], stages[s].features, table));
  }
  return torch::cat(parts, 1);
}

}  // namespace semsurf
