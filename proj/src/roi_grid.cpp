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

#include "semsurf/roi_grid.h"

namespace semsurf {

std::vector<Vec3> make_grid_points(const Box3D& box, int grid_size) {
  std::vector<Vec3> points;
  if (grid_size < 1) return points;
  points.reserve(static_cast<std::size_t>(grid_size * grid_size * grid_size));
  const auto frac = [&](int i) { return (i + 0.5) / grid_size - 0.5; };
  for (int k = 0; k < grid_size; ++k) {
    for (int j = 0; j < grid_size; ++j) {
      for (int i = 0; i < grid_size; ++i) {
        const Vec3 local{frac(i) * box.length(), frac(j) * box.width(), frac(k) * box.height()};
        points.push_back(from_box_frame(local, box));
      }
    }
  }
  return points;
}

std::array<double, kPositionInputWidth> position_input(const Vec3& grid_point, const Box3D& box) {
  std::array<double, kPositionInputWidth> out{};
  const Vec3 g = to_box_frame(grid_point, box);
  const Vec3 half = box.dims() * 0.5;
  // Box center is the origin of the box frame; corners follow `corners()`.
  out[0] = g.x;
  out[1] = g.y;
  out[2] = g.z;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner{(i & 1) ? -half.x : half.x, (i & 2) ? -half.y : half.y,
                      (i & 4) ? -half.z : half.z};
    const Vec3 d = g - corner;
    out[static_cast<std::size_t>(3 + 3 * i)] = d.x;
    out[static_cast<std::size_t>(4 + 3 * i)] = d.y;
    out[static_cast<std::size_t>(5 + 3 * i)] = d.z;
  }
  return out;
}

std::array<double, kLocalSpatialInputWidth> local_spatial_input(const Vec3& point, double score,
                                                                const Box3D& box) {
  const CanonicalPoint c = canonical_transform(point, box);
  return {c.local.x, c.local.y, c.local.z, c.depth, score};
}

}  // namespace semsurf
