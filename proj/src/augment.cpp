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

#include "semsurf/augment.h"

#include <algorithm>
#include <random>

namespace semsurf {
namespace {

template <typename PointFn, typename BoxFn>
Scene transform_scene(const Scene& scene, PointFn&& point_fn, BoxFn&& box_fn) {
  Scene out = scene;
  for (Vec3& p : out.cloud.coords) p = point_fn(p);
  for (GroundTruth& gt : out.objects) gt.box = box_fn(gt.box);
  return out;
}

}  // namespace

Scene flip_scene(const Scene& scene) {
  Scene out = transform_scene(
      scene, [](const Vec3& p) { return Vec3{p.x, -p.y, p.z}; },
      [](const Box3D& b) {
        const Vec3& c = b.center();
        return Box3D({c.x, -c.y, c.z}, b.length(), b.width(), b.height(), -b.yaw());
      });
  out.flipped = !scene.flipped;
  return out;
}

Scene rotate_scene(const Scene& scene, double angle) {
  return transform_scene(
      scene, [&](const Vec3& p) { return rotate_z(p, angle); },
      [&](const Box3D& b) {
        return Box3D(rotate_z(b.center(), angle), b.length(), b.width(), b.height(),
                     b.yaw() + angle);
      });
}

Scene scale_scene(const Scene& scene, double factor) {
  return transform_scene(
      scene, [&](const Vec3& p) { return p * factor; },
      [&](const Box3D& b) {
        return Box3D(b.center() * factor, b.length() * factor, b.width() * factor,
                     b.height() * factor, b.yaw());
      });
}

Scene paste_instances(const Scene& scene, const InstanceBank& bank, ObjectClass cls, int count,
                      std::uint64_t seed) {
  std::vector<int> candidates;
  for (const BankInstance& inst : bank.instances()) {
    if (inst.cls != cls || inst.frame_id == scene.frame_id) continue;
    candidates.push_back(inst.id);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  Scene out = scene;
  int pasted = 0;
  for (int id : candidates) {
    if (pasted >= count) break;
    const BankInstance& inst = bank.at(id);
    const bool collides = std::any_of(out.objects.begin(), out.objects.end(), [&](const auto& gt) {
      return bev_intersection_area(gt.box, inst.box) > 0.0;
    });
    if (collides) continue;
    PointCloud kept;
    kept.feature_dim = out.cloud.feature_dim;
    for (std::size_t i = 0; i < out.cloud.size(); ++i) {
      if (point_in_box(out.cloud.coords[i], inst.box)) continue;
      kept.push_back(out.cloud.coords[i], out.cloud.feature_row(i));
    }
    // Bank records carry geometry only; pasted points get a neutral intensity.
    const std::vector<float> feature(static_cast<std::size_t>(kept.feature_dim), 0.5F);
    for (const Vec3& p : denormalize_from_box(inst.normalized, inst.box)) {
      kept.push_back(p, feature);
    }
    out.cloud = std::move(kept);
    out.objects.push_back({inst.box, inst.cls, std::nullopt, inst.id});
    ++pasted;
  }
  return out;
}

Scene augment(const Scene& scene, const AugmentConfig& config, const InstanceBank* bank,
              std::uint64_t seed) {
  if (!config.enabled) return scene;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scene out = scene;
  if (bank != nullptr) {
    for (ObjectClass cls : kAllClasses) {
      const int count = config.gt_samples[static_cast<std::size_t>(cls)];
      if (count > 0) out = paste_instances(out, *bank, cls, count, rng());
    }
  }
  if (unit(rng) < config.flip_probability) out = flip_scene(out);
  const double angle = (2.0 * unit(rng) - 1.0) * config.rotation_max;
  out = rotate_scene(out, angle);
  const double factor = config.scale_min + unit(rng) * (config.scale_max - config.scale_min);
  return scale_scene(out, factor);
}

}  // namespace semsurf
