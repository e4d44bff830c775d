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

#ifndef SEMSURF_POINT_CLOUD_H_
#define SEMSURF_POINT_CLOUD_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "semsurf/geometry.h"

namespace semsurf {

// N points with optional per-point feature rows and scores. Features are
// stored row-major (N x feature_dim); scores are either empty or length N.
struct PointCloud {
  std::vector<Vec3> coords;
  int feature_dim = 0;
  std::vector<float> features;
  std::vector<float> scores;

  std::size_t size() const { return coords.size(); }
  bool empty() const { return coords.empty(); }
  bool has_scores() const { return !scores.empty(); }

  std::span<const float> feature_row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(feature_dim),
            static_cast<std::size_t>(feature_dim)};
  }

  // Appends one point; `feature` must have feature_dim entries.
  void push_back(const Vec3& p, std::span<const float> feature = {},
                 std::optional<float> score = std::nullopt);
  void append(const PointCloud& other);
  PointCloud select(std::span<const int> indices) const;

  // Throws std::invalid_argument when coordinates are non-finite or the
  // feature/score arrays disagree with the point count.
  void validate() const;
};

}  // namespace semsurf

#endif  // SEMSURF_POINT_CLOUD_H_
