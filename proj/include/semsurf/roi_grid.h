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

#ifndef SEMSURF_ROI_GRID_H_
#define SEMSURF_ROI_GRID_H_

#include <array>
#include <vector>

#include "semsurf/geometry.h"

namespace semsurf {

// Centers of the G x G x G sub-voxels of `box` in world coordinates.
// Enumeration is x fastest, then y, then z: index = (k * G + j) * G + i.
std::vector<Vec3> make_grid_points(const Box3D& box, int grid_size);

inline constexpr int kPositionInputWidth = 27;

// [g - r_c; g - r_1; ...; g - r_8] with every difference expressed in the box
// frame, so the vector does not change when the proposal moves rigidly.
std::array<double, kPositionInputWidth> position_input(const Vec3& grid_point, const Box3D& box);

inline constexpr int kLocalSpatialInputWidth = 5;

// (x_c, y_c, z_c, d, s): box-frame coordinates, depth of the world point and
// its foreground score.
std::array<double, kLocalSpatialInputWidth> local_spatial_input(const Vec3& point, double score,
                                                                const Box3D& box);

}  // namespace semsurf

#endif  // SEMSURF_ROI_GRID_H_
