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

#include "semsurf/pointcloud_ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace semsurf {

VoxelIndex GridGeometry::quantize(const Vec3& p) const {
  return {static_cast<int>(std::floor((p.x - origin.x) / voxel_size.x)),
          static_cast<int>(std::floor((p.y - origin.y) / voxel_size.y)),
          static_cast<int>(std::floor((p.z - origin.z) / voxel_size.z))};
}

GridGeometry GridGeometry::downsampled() const {
  GridGeometry out = *this;
  out.voxel_size = voxel_size * 2.0;
  for (int a = 0; a < 3; ++a) out.shape[a] = (shape[a] + 1) / 2;
  return out;
}

VoxelLayout::VoxelLayout(GridGeometry geometry, std::vector<VoxelIndex> indices)
    : geometry_(geometry), indices_(std::move(indices)) {
  lookup_.reserve(indices_.size() * 2);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (!geometry_.contains(indices_[i])) {
      throw std::invalid_argument("VoxelLayout: index outside the spatial shape");
    }
    if (!lookup_.emplace(key(indices_[i]), static_cast<int>(i)).second) {
      throw std::invalid_argument("VoxelLayout: duplicate voxel index");
    }
  }
}

std::int64_t VoxelLayout::key(const VoxelIndex& v) const {
  return (static_cast<std::int64_t>(v.x) * geometry_.shape[1] + v.y) * geometry_.shape[2] + v.z;
}

int VoxelLayout::find(const VoxelIndex& v) const {
  if (!geometry_.contains(v)) return -1;
  const auto it = lookup_.find(key(v));
  return it == lookup_.end() ? -1 : it->second;
}

SparseVoxelGrid::SparseVoxelGrid(VoxelLayout layout, int channels, std::vector<float> features,
                                 int stage_id)
    : layout_(std::move(layout)),
      channels_(channels),
      features_(std::move(features)),
      stage_id_(stage_id) {
  if (channels_ < 0 || features_.size() != layout_.size() * static_cast<std::size_t>(channels_)) {
    throw std::invalid_argument("SparseVoxelGrid: feature buffer does not match " +
                                std::to_string(layout_.size()) + " voxels x " +
                                std::to_string(channels_) + " channels");
  }
}

SparseVoxelGrid voxelize(const PointCloud& cloud, const GridGeometry& geometry,
                         int max_points_per_voxel) {
  if (!(geometry.voxel_size.x > 0.0 && geometry.voxel_size.y > 0.0 &&
        geometry.voxel_size.z > 0.0)) {
    throw std::invalid_argument("voxelize: voxel size must be positive on every axis");
  }
  constexpr int kChannels = 4;
  std::vector<VoxelIndex> indices;
  std::vector<double> sums;
  std::vector<int> counts;
  std::unordered_map<std::int64_t, int> rows;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.coords[i];
    const VoxelIndex v = geometry.quantize(p);
    if (!geometry.contains(v)) continue;
    const std::int64_t key =
        (static_cast<std::int64_t>(v.x) * geometry.shape[1] + v.y) * geometry.shape[2] + v.z;
    auto [it, inserted] = rows.emplace(key, static_cast<int>(indices.size()));
    if (inserted) {
      indices.push_back(v);
      sums.resize(sums.size() + kChannels, 0.0);
      counts.push_back(0);
    }
    const int row = it->second;
    if (max_points_per_voxel > 0 && counts[row] >= max_points_per_voxel) continue;
    const Vec3 offset = p - geometry.voxel_center(v);
    const double intensity = cloud.feature_dim > 0 ? cloud.feature_row(i)[0] : 0.0;
    double* sum = sums.data() + static_cast<std::size_t>(row) * kChannels;
    sum[0] += offset.x;
    sum[1] += offset.y;
    sum[2] += offset.z;
    sum[3] += intensity;
    ++counts[row];
  }
  std::vector<float> features(sums.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (int c = 0; c < kChannels; ++c) {
      features[r * kChannels + c] = static_cast<float>(sums[r * kChannels + c] / counts[r]);
    }
  }
  return SparseVoxelGrid(VoxelLayout(geometry, std::move(indices)), kChannels,
                         std::move(features), 0);
}

std::vector<int> neighbor_voxel_query(const VoxelLayout& layout, const VoxelIndex& center,
                                      int manhattan_radius, int k, std::uint64_t seed) {
  if (manhattan_radius < 0) throw std::invalid_argument("neighbor_voxel_query: radius < 0");
  if (k < 1) throw std::invalid_argument("neighbor_voxel_query: k < 1");
  std::vector<int> found;
  const int r = manhattan_radius;
  for (int dx = -r; dx <= r; ++dx) {
    const int ry = r - std::abs(dx);
    for (int dy = -ry; dy <= ry; ++dy) {
      const int rz = ry - std::abs(dy);
      for (int dz = -rz; dz <= rz; ++dz) {
        const int row = layout.find({center.x + dx, center.y + dy, center.z + dz});
        if (row >= 0) found.push_back(row);
      }
    }
  }
  if (static_cast<int>(found.size()) <= k) return found;
  std::vector<int> sampled;
  sampled.reserve(static_cast<std::size_t>(k));
  std::mt19937_64 rng(seed);
  std::sample(found.begin(), found.end(), std::back_inserter(sampled), k, rng);
  return sampled;
}

std::vector<int> farthest_point_sampling(std::span<const Vec3> points, int k, int start_index) {
  if (k <= 0) throw std::invalid_argument("farthest_point_sampling: k must be positive");
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("farthest_point_sampling: empty input");
  if (start_index < 0 || start_index >= n) {
    throw std::invalid_argument("farthest_point_sampling: start index out of range");
  }
  if (k >= n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(k));
  std::vector<double> min_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  int current = start_index;
  for (int s = 0; s < k; ++s) {
    selected.push_back(current);
    const Vec3& c = points[static_cast<std::size_t>(current)];
    int best = -1;
    double best_dist = -1.0;
    for (int i = 0; i < n; ++i) {
      double& d = min_dist[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points[static_cast<std::size_t>(i)], c));
      if (d > best_dist) {
        best_dist = d;
        best = i;
      }
    }
    current = best;
  }
  return selected;
}

ChamferResult chamfer_distance(std::span<const Vec3> p, std::span<const Vec3> q) {
  if (p.empty() || q.empty()) {
    throw std::invalid_argument("chamfer_distance: both point sets must be non-empty");
  }
  ChamferResult result;
  result.grad_p.assign(p.size(), Vec3{});
  result.grad_q.assign(q.size(), Vec3{});
  const double inv_p = 1.0 / static_cast<double>(p.size());
  const double inv_q = 1.0 / static_cast<double>(q.size());

  // For every point of one set, its nearest neighbor in the other set; the
  // squared distance term d = |a - b|^2 contributes 2 (a - b) to a and the
  // negation to b.
  const auto accumulate = [](std::span<const Vec3> from, std::span<const Vec3> to, double weight,
                             std::vector<Vec3>& grad_from, std::vector<Vec3>& grad_to) {
    double sum = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < to.size(); ++j) {
        const double d = squared_distance(from[i], to[j]);
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      sum += best;
      const Vec3 g = (from[i] - to[arg]) * (2.0 * weight);
      grad_from[i] += g;
      grad_to[arg] += g * -1.0;
    }
    return sum * weight;
  };

  result.value = accumulate(p, q, inv_p, result.grad_p, result.grad_q) +
                 accumulate(q, p, inv_q, result.grad_q, result.grad_p);
  return result;
}

}  // namespace semsurf
