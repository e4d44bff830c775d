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

#ifndef SEMSURF_SCENE_H_
#define SEMSURF_SCENE_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semsurf/geometry.h"
#include "semsurf/point_cloud.h"

namespace semsurf {

enum class ObjectClass { kCar = 0, kPedestrian = 1, kCyclist = 2 };
inline constexpr int kNumClasses = 3;
inline constexpr std::array<ObjectClass, kNumClasses> kAllClasses{
    ObjectClass::kCar, ObjectClass::kPedestrian, ObjectClass::kCyclist};

std::string_view class_name(ObjectClass cls);
// Accepts the KITTI type names "Car", "Pedestrian" and "Cyclist".
std::optional<ObjectClass> parse_class(std::string_view name);

// KITTI difficulty levels; each level also contains the easier ones.
enum class Difficulty { kEasy = 0, kModerate = 1, kHard = 2 };
std::string_view difficulty_name(Difficulty d);

struct GroundTruth {
  Box3D box;
  ObjectClass cls = ObjectClass::kCar;
  // Absent for objects too small/occluded for any level and for synthetic data.
  std::optional<Difficulty> difficulty;
  // Row of the instance in the completion-target bank, -1 when unknown.
  int bank_id = -1;
};

// A LiDAR frame. Cloud feature column 0 is the intensity.
struct Scene {
  std::string frame_id;
  PointCloud cloud;
  std::vector<GroundTruth> objects;
  // Toggled by flip augmentation so that canonical-frame data (completion
  // targets) can be re-oriented consistently.
  bool flipped = false;
};

}  // namespace semsurf

#endif  // SEMSURF_SCENE_H_
