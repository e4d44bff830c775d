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

#ifndef SEMSURF_AUGMENT_H_
#define SEMSURF_AUGMENT_H_

#include <cstdint>

#include "semsurf/config.h"
#include "semsurf/instance_bank.h"
#include "semsurf/scene.h"

namespace semsurf {

// Negates y of points and boxes and the box yaw.
Scene flip_scene(const Scene& scene);
Scene rotate_scene(const Scene& scene, double angle);
Scene scale_scene(const Scene& scene, double factor);

// Pastes up to `count` bank instances of `cls` at their recorded pose,
// rejecting any that collide in BEV with an existing object. Points of the
// scene inside a pasted box are removed.
Scene paste_instances(const Scene& scene, const InstanceBank& bank, ObjectClass cls, int count,
                      std::uint64_t seed);

// GT sampling (when a bank is given), then random flip, global rotation and
// global scaling, all drawn from `seed`.
Scene augment(const Scene& scene, const AugmentConfig& config, const InstanceBank* bank,
              std::uint64_t seed);

}  // namespace semsurf

#endif  // SEMSURF_AUGMENT_H_
