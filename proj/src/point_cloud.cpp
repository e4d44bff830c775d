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

#include "semsurf/point_cloud.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace semsurf {

void PointCloud::push_back(const Vec3& p, std::span<const float> feature,
                           std::optional<float> score) {
  if (static_cast<int>(feature.size()) != feature_dim) {
    throw std::invalid_argument("PointCloud::push_back: expected " + std::to_string(feature_dim) +
                                " features, got " + std::to_string(feature.size()));
  }
  if (!empty() && score.has_value() != has_scores()) {
    throw std::invalid_argument("PointCloud::push_back: score presence must match the cloud");
  }
  coords.push_back(p);
  features.insert(features.end(), feature.begin(), feature.end());
  if (score) scores.push_back(*score);
}

void PointCloud::append(const PointCloud& other) {
  if (other.empty()) return;
  if (empty() && feature_dim == 0 && scores.empty()) {
    feature_dim = other.feature_dim;
  }
  if (other.feature_dim != feature_dim) {
    throw std::invalid_argument("PointCloud::append: feature width mismatch");
  }
  if (!empty() && other.has_scores() != has_scores()) {
    throw std::invalid_argument("PointCloud::append: score presence mismatch");
  }
  coords.insert(coords.end(), other.coords.begin(), other.coords.end());
  features.insert(features.end(), other.features.begin(), other.features.end());
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
}

PointCloud PointCloud::select(std::span<const int> indices) const {
  PointCloud out;
  out.feature_dim = feature_dim;
  out.coords.reserve(indices.size());
  for (int i : indices) {
    const auto idx = static_cast<std::size_t>(i);
    out.coords.push_back(coords.at(idx));
    if (feature_dim > 0) {
      const auto row = feature_row(idx);
      out.features.insert(out.features.end(), row.begin(), row.end());
    }
    if (has_scores()) out.scores.push_back(scores[idx]);
  }
  return out;
}

void PointCloud::validate() const {
  for (const Vec3& p : coords) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::invalid_argument("PointCloud has non-finite coordinates");
    }
  }
  if (feature_dim < 0 || features.size() != coords.size() * static_cast<std::size_t>(feature_dim)) {
    throw std::invalid_argument("PointCloud feature rows do not match the point count");
  }
  if (!scores.empty() && scores.size() != coords.size()) {
    throw std::invalid_argument("PointCloud score count does not match the point count");
  }
}

}  // namespace semsurf
