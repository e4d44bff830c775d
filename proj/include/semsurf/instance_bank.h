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

#ifndef SEMSURF_INSTANCE_BANK_H_
#define SEMSURF_INSTANCE_BANK_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semsurf/scene.h"

namespace semsurf {

// Interior points of one ground-truth object, kept in its canonical frame and
// divided by the box extents so objects of different size are comparable.
struct BankInstance {
  int id = -1;
  ObjectClass cls = ObjectClass::kCar;
  Box3D box;
  std::vector<Vec3> normalized;
  std::string frame_id;
  int object_index = -1;
};

std::vector<Vec3> normalize_to_box(std::span<const Vec3> world, const Box3D& box);
// Inverse of normalize_to_box. `mirror_y` negates the canonical y first, which
// maps data captured before a flip augmentation onto the flipped box.
std::vector<Vec3> denormalize_from_box(std::span<const Vec3> normalized, const Box3D& box,
                                       bool mirror_y = false);

class InstanceBank {
 public:
  // Collects every ground truth with at least one interior point, in scene
  // then object order.
  static InstanceBank build(std::span<const Scene> scenes);

  const std::vector<BankInstance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  const BankInstance& at(int id) const { return instances_.at(static_cast<std::size_t>(id)); }

  int add(ObjectClass cls, const Box3D& box, std::span<const Vec3> world_points,
          std::string frame_id, int object_index);
  int add_normalized(ObjectClass cls, const Box3D& box, std::vector<Vec3> normalized,
                     std::string frame_id, int object_index);
  std::optional<int> find(const std::string& frame_id, int object_index) const;

  // Sets GroundTruth::bank_id on every object of `scene` found in the bank.
  void attach(Scene& scene) const;

 private:
  std::vector<BankInstance> instances_;
};

}  // namespace semsurf

#endif  // SEMSURF_INSTANCE_BANK_H_
