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

#ifndef SEMSURF_POINTCLOUD_OPS_H_
#define SEMSURF_POINTCLOUD_OPS_H_

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "semsurf/geometry.h"
#include "semsurf/point_cloud.h"

namespace semsurf {

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;
  constexpr bool operator==(const VoxelIndex&) const = default;
};

// Placement of a voxel lattice in the world. Voxel (i, j, k) covers
// origin + [i, i+1) * voxel_size per axis.
struct GridGeometry {
  Vec3 origin;
  Vec3 voxel_size;
  std::array<int, 3> shape{0, 0, 0};

  bool contains(const VoxelIndex& v) const {
    return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < shape[0] && v.y < shape[1] &&
           v.z < shape[2];
  }
  Vec3 voxel_center(const VoxelIndex& v) const {
    return {origin.x + (v.x + 0.5) * voxel_size.x, origin.y + (v.y + 0.5) * voxel_size.y,
            origin.z + (v.z + 0.5) * voxel_size.z};
  }
  // Unbounded floor quantization; callers check `contains`.
  VoxelIndex quantize(const Vec3& p) const;
  // Geometry of the lattice after a stride-2 downsampling.
  GridGeometry downsampled() const;
};

// Occupied voxel indices plus a lookup table from index to row.
class VoxelLayout {
 public:
  VoxelLayout() = default;
  VoxelLayout(GridGeometry geometry, std::vector<VoxelIndex> indices);

  const GridGeometry& geometry() const { return geometry_; }
  const std::vector<VoxelIndex>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  // Row of `v`, or -1 when unoccupied or out of bounds.
  int find(const VoxelIndex& v) const;

 private:
  std::int64_t key(const VoxelIndex& v) const;

  GridGeometry geometry_;
  std::vector<VoxelIndex> indices_;
  std::unordered_map<std::int64_t, int> lookup_;
};

// Sparse index -> feature map; immutable after construction.
class SparseVoxelGrid {
 public:
  SparseVoxelGrid(VoxelLayout layout, int channels, std::vector<float> features, int stage_id);

  const VoxelLayout& layout() const { return layout_; }
  const GridGeometry& geometry() const { return layout_.geometry(); }
  int channels() const { return channels_; }
  int stage_id() const { return stage_id_; }
  std::size_t size() const { return layout_.size(); }
  std::span<const float> feature(std::size_t row) const {
    return {features_.data() + row * static_cast<std::size_t>(channels_),
            static_cast<std::size_t>(channels_)};
  }
  const std::vector<float>& features() const { return features_; }

 private:
  VoxelLayout layout_;
  int channels_;
  std::vector<float> features_;
  int stage_id_;
};

// Quantizes points into [origin, origin + shape * voxel_size) (half-open).
// Each voxel's feature is the mean offset of its member points from the voxel
// center followed by their mean intensity (feature column 0 of the cloud, or 0
// when the cloud has no features). Only the first max_points_per_voxel points
// that land in a voxel contribute; max_points_per_voxel <= 0 disables the cap.
SparseVoxelGrid voxelize(const PointCloud& cloud, const GridGeometry& geometry,
                         int max_points_per_voxel);

// Occupied voxels within Manhattan distance `manhattan_radius` of `center`,
// in ascending offset enumeration order. When more than `k` exist, a uniform
// subsample of size k drawn from `seed` (order preserved).
std::vector<int> neighbor_voxel_query(const VoxelLayout& layout, const VoxelIndex& center,
                                      int manhattan_radius, int k, std::uint64_t seed);

// Greedy max-min sampling from `start_index` using squared distances; ties go
// to the lowest index. Returns all indices when k >= N.
std::vector<int> farthest_point_sampling(std::span<const Vec3> points, int k, int start_index);

struct ChamferResult {
  double value = 0.0;
  // d value / d p_i and d value / d q_j.
  std::vector<Vec3> grad_p;
  std::vector<Vec3> grad_q;
};

// Symmetric mean squared nearest-neighbor distance between two non-empty sets.
ChamferResult chamfer_distance(std::span<const Vec3> p, std::span<const Vec3> q);

}  // namespace semsurf

#endif  // SEMSURF_POINTCLOUD_OPS_H_
