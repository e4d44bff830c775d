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

#include "semsurf/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace semsurf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr float kObjectIntensity = 0.6F;
constexpr float kGroundIntensity = 0.2F;

struct Face {
  Vec3 center;  // box frame
  Vec3 normal;  // box frame
  Vec3 u;       // half-extent vectors spanning the face
  Vec3 v;
};

std::array<Face, 5> cuboid_faces(const Vec3& dims) {
  const Vec3 h = dims * 0.5;
  // Bottom face omitted: it rests on the ground.
  return {{
      {{h.x, 0, 0}, {1, 0, 0}, {0, h.y, 0}, {0, 0, h.z}},
      {{-h.x, 0, 0}, {-1, 0, 0}, {0, h.y, 0}, {0, 0, h.z}},
      {{0, h.y, 0}, {0, 1, 0}, {h.x, 0, 0}, {0, 0, h.z}},
      {{0, -h.y, 0}, {0, -1, 0}, {h.x, 0, 0}, {0, 0, h.z}},
      {{0, 0, h.z}, {0, 0, 1}, {h.x, 0, 0}, {0, h.y, 0}},
  }};
}

double point_budget(double area, double range, const SynthSpec& spec) {
  const double r = std::max(range, 1.0);
  return std::min<double>(area * spec.density_at_10m * (100.0 / (r * r)),
                          static_cast<double>(spec.max_points_per_face));
}

void add_point(PointCloud& cloud, const Vec3& p, float intensity) {
  const float feature[1] = {intensity};
  cloud.push_back(p, feature);
}

// Sensor-facing surface samples of one object, in world coordinates.
std::vector<Vec3> sample_surface(const Box3D& box, ObjectClass cls, const SynthSpec& spec,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.point_noise);
  const Vec3 sensor_local = to_box_frame(Vec3{0, 0, 0}, box);
  const double range = box.center().norm();
  std::vector<Vec3> local;

  if (cls == ObjectClass::kPedestrian) {
    const double radius = 0.5 * std::min(box.length(), box.width());
    const double hz = 0.5 * box.height();
    const double side_area = kPi * radius * box.height();  // visible half of the mantle
    const int n_side = static_cast<int>(point_budget(side_area, range, spec));
    const double toward = std::atan2(sensor_local.y, sensor_local.x);
    for (int i = 0; i < n_side; ++i) {
      const double theta = toward + unit(rng) * kPi / 2.0;
      local.push_back({radius * std::cos(theta), radius * std::sin(theta), unit(rng) * hz});
    }
    const int n_top = static_cast<int>(point_budget(kPi * radius * radius, range, spec));
    for (int i = 0; i < n_top; ++i) {
      const double r = radius * std::sqrt(0.5 * (unit(rng) + 1.0));
      const double theta = unit(rng) * kPi;
      local.push_back({r * std::cos(theta), r * std::sin(theta), hz});
    }
  } else {
    for (const Face& f : cuboid_faces(box.dims())) {
      const Vec3 to_sensor = sensor_local - f.center;
      const double facing =
          to_sensor.x * f.normal.x + to_sensor.y * f.normal.y + to_sensor.z * f.normal.z;
      if (facing <= 0.0) continue;
      const double area = 4.0 * std::sqrt(f.u.squared_norm()) * std::sqrt(f.v.squared_norm());
      const int n = static_cast<int>(point_budget(area, range, spec));
      for (int i = 0; i < n; ++i) {
        local.push_back(f.center + f.u * unit(rng) + f.v * unit(rng));
      }
    }
  }

  std::vector<Vec3> world;
  world.reserve(local.size());
  for (const Vec3& p : local) {
    world.push_back(from_box_frame(p, box) + Vec3{noise(rng), noise(rng), noise(rng)});
  }
  return world;
}

// Drops points whose azimuth falls in a random sub-interval covering
// `fraction` of the object's azimuth span.
std::vector<Vec3> occlude(std::vector<Vec3> points, const Box3D& box, double fraction,
                          std::mt19937_64& rng) {
  if (fraction <= 0.0 || points.empty()) return points;
  const double ref = std::atan2(box.center().y, box.center().x);
  double lo = 0.0;
  double hi = 0.0;
  for (const Vec3& c : bev_corners(box)) {
    const double a = normalize_angle(std::atan2(c.y, c.x) - ref);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  for (const Vec3& p : points) {
    const double a = normalize_angle(std::atan2(p.y, p.x) - ref);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double width = (hi - lo) * std::min(fraction, 1.0);
  std::uniform_real_distribution<double> start(lo, std::max(lo, hi - width));
  const double a0 = fraction >= 1.0 ? lo : start(rng);
  const double a1 = fraction >= 1.0 ? hi : a0 + width;
  std::erase_if(points, [&](const Vec3& p) {
    const double a = normalize_angle(std::atan2(p.y, p.x) - ref);
    return a >= a0 && a <= a1;
  });
  return points;
}

ObjectClass draw_class(const SynthSpec& spec, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(spec.class_weights.begin(), spec.class_weights.end());
  return kAllClasses[static_cast<std::size_t>(pick(rng))];
}

}  // namespace

Vec3 nominal_dims(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kCar:
      return {3.9, 1.6, 1.56};
    case ObjectClass::kPedestrian:
      return {0.8, 0.6, 1.73};
    case ObjectClass::kCyclist:
      return {1.76, 0.6, 1.73};
  }
  return {1.0, 1.0, 1.0};
}

Scene synth_scene(const SynthSpec& spec, std::uint64_t seed, std::string frame_id) {
  if (spec.num_objects < 0 || spec.occlusion_fraction < 0.0 || spec.occlusion_fraction > 1.0) {
    throw GenerationError("synth_scene: invalid spec");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scene scene;
  scene.frame_id = std::move(frame_id);
  scene.cloud.feature_dim = 1;

  for (int n = 0; n < spec.num_objects; ++n) {
    const ObjectClass cls = draw_class(spec, rng);
    const Vec3 nominal = nominal_dims(cls);
    std::optional<Box3D> placed;
    for (int attempt = 0; attempt < spec.max_placement_attempts && !placed; ++attempt) {
      const auto jitter = [&] { return 1.0 + spec.size_jitter * (2.0 * unit(rng) - 1.0); };
      const Vec3 dims{nominal.x * jitter(), nominal.y * jitter(), nominal.z * jitter()};
      const double yaw = (2.0 * unit(rng) - 1.0) * kPi;
      const double x = spec.range_min.x + spec.margin +
                       unit(rng) * (spec.range_max.x - spec.range_min.x - 2.0 * spec.margin);
      const double y = spec.range_min.y + spec.margin +
                       unit(rng) * (spec.range_max.y - spec.range_min.y - 2.0 * spec.margin);
      const Box3D candidate({x, y, spec.ground_z + dims.z * 0.5}, dims.x, dims.y, dims.z, yaw);
      bool ok = true;
      for (const Vec3& c : bev_corners(candidate)) {
        ok = ok && c.x >= spec.range_min.x + spec.margin && c.x <= spec.range_max.x - spec.margin &&
             c.y >= spec.range_min.y + spec.margin && c.y <= spec.range_max.y - spec.margin;
      }
      for (const GroundTruth& gt : scene.objects) {
        ok = ok && bev_intersection_area(candidate, gt.box) <= 0.0;
      }
      if (ok) placed = candidate;
    }
    if (!placed) {
      throw GenerationError("synth_scene: could not place object " + std::to_string(n) +
                            " without overlap");
    }
    scene.objects.push_back({*placed, cls, std::nullopt, -1});
    const auto surface =
        occlude(sample_surface(*placed, cls, spec, rng), *placed, spec.occlusion_fraction, rng);
    for (const Vec3& p : surface) {
      add_point(scene.cloud, p, kObjectIntensity + 0.1F * static_cast<float>(unit(rng)));
    }
  }

  std::normal_distribution<double> noise(0.0, spec.point_noise);
  for (int i = 0; i < spec.clutter_points; ++i) {
    Vec3 p{spec.range_min.x + unit(rng) * (spec.range_max.x - spec.range_min.x),
           spec.range_min.y + unit(rng) * (spec.range_max.y - spec.range_min.y),
           spec.ground_z + noise(rng)};
    // A fifth of the clutter floats above the ground.
    if (unit(rng) < 0.2) p.z = spec.ground_z + unit(rng) * (spec.range_max.z - spec.ground_z);
    const bool inside = std::any_of(scene.objects.begin(), scene.objects.end(),
                                    [&](const GroundTruth& gt) { return point_in_box(p, gt.box); });
    if (inside) continue;
    add_point(scene.cloud, p, kGroundIntensity * static_cast<float>(unit(rng)));
  }
  return scene;
}

}  // namespace semsurf
