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

#ifndef SEMSURF_EXPORT_H_
#define SEMSURF_EXPORT_H_

#include <filesystem>
#include <vector>

#include "semsurf/evaluation.h"
#include "semsurf/kitti_io.h"

namespace semsurf {

struct ScoredPoint {
  Vec3 position;
  float score = 0.0F;
};

// ASCII PLY with one vertex element carrying float x, y, z, score.
void write_ply(const std::filesystem::path& path, const std::vector<ScoredPoint>& points);
std::vector<ScoredPoint> read_ply(const std::filesystem::path& path);

// Points with score >= threshold, order preserved.
std::vector<ScoredPoint> filter_by_score(const std::vector<ScoredPoint>& points, float threshold);

// KITTI result lines (one per detection, camera frame via `calib`).
void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections,
                      const Calibration& calib);
std::vector<Detection> read_detections(const std::filesystem::path& path, const Calibration& calib);

}  // namespace semsurf

#endif  // SEMSURF_EXPORT_H_
