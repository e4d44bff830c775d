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

#include "semsurf/instance_bank.h"

namespace semsurf {

std::vector<Vec3> normalize_to_box(std::span<const Vec3> world, const Box3D& box) {
  std::vector<Vec3> out;
  out.reserve(world.size());
  for (const Vec3& p : world) {
    const Vec3 local = to_box_frame(p, box);
    out.push_back({local.x / box.length(), local.y / box.width(), local.z / box.height()});
  }
  return out;
}

std::vector<Vec3> denormalize_from_box(std::span<const Vec3> normalized, const Box3D& box,
                                       bool mirror_y) {
  std::vector<Vec3> out;
  out.reserve(normalized.size());
  for (const Vec3& n : normalized) {
    const Vec3 local{n.x * box.length(), (mirror_y ? -n.y : n.y) * box.width(), n.z * box.height()};
    out.push_back(from_box_frame(local, box));
  }
  return out;
}

InstanceBank InstanceBank::build(std::span<const Scene> scenes) {
  InstanceBank bank;
  for (const Scene& scene : scenes) {
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
      const GroundTruth& gt = scene.objects[k];
      std::vector<Vec3> interior;
      for (const Vec3& p : scene.cloud.coords) {
        if (point_in_box(p, gt.box)) interior.push_back(p);
      }
      if (interior.empty()) continue;
      bank.add(gt.cls, gt.box, interior, scene.frame_id, static_cast<int>(k));
    }
  }
  return bank;
}

int InstanceBank::add(ObjectClass cls, const Box3D& box, std::span<const Vec3> world_points,
                      std::string frame_id, int object_index) {
  const int id = static_cast<int>(instances_.size());
  instances_.push_back(
      {id, cls, box, normalize_to_box(world_points, box), std::move(frame_id), object_index});
  return id;
}

int InstanceBank::add_normalized(ObjectClass cls, const Box3D& box, std::vector<Vec3> normalized,
                                 std::string frame_id, int object_index) {
  const int id = static_cast<int>(instances_.size());
  instances_.push_back({id, cls, box, std::move(normalized), std::move(frame_id), object_index});
  return id;
}

std::optional<int> InstanceBank::find(const std::string& frame_id, int object_index) const {
  for (const BankInstance& inst : instances_) {
    if (inst.frame_id == frame_id && inst.object_index == object_index) return inst.id;
  }
  return std::nullopt;
}

void InstanceBank::attach(Scene& scene) const {
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto id = find(scene.frame_id, static_cast<int>(k));
    scene.objects[k].bank_id = id.value_or(-1);
  }
}

}  // namespace semsurf
