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

#ifndef SEMSURF_SYNTHETIC_H_
#define SEMSURF_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "semsurf/scene.h"

namespace semsurf {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters of a synthetic LiDAR frame. The sensor sits at the world origin.
struct SynthSpec {
  int num_objects = 3;
  // Relative sampling weights, indexed by ObjectClass.
  std::array<double, kNumClasses> class_weights{1.0, 0.0, 0.0};
  Vec3 range_min{0.0, -12.8, -3.0};
  Vec3 range_max{25.6, 12.8, 1.0};
  double ground_z = -1.73;
  // Surface points per square meter at 10 m; density falls off with 1/r^2.
  double density_at_10m = 40.0;
  int max_points_per_face = 400;
  double point_noise = 0.01;
  // Fraction of each object's azimuth span that is masked out.
  double occlusion_fraction = 0.0;
  int clutter_points = 600;
  double size_jitter = 0.05;
  // Minimum gap kept between object footprints and the range border.
  double margin = 1.0;
  int max_placement_attempts = 200;
};

// Boxes are placed without BEV overlap; cars and cyclists are sampled as
// cuboid shells, pedestrians as vertical cylinder shells, and only faces that
// face the sensor receive points. Deterministic for a given seed.
Scene synth_scene(const SynthSpec& spec, std::uint64_t seed, std::string frame_id = {});

// Nominal box dimensions (l, w, h) used by the generator.
Vec3 nominal_dims(ObjectClass cls);

}  // namespace semsurf

#endif  // SEMSURF_SYNTHETIC_H_
