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

#ifndef SEMSURF_ANCHORS_H_
#define SEMSURF_ANCHORS_H_

#include <array>
#include <span>
#include <vector>

#include "semsurf/config.h"
#include "semsurf/scene.h"

namespace semsurf {

using Residual = std::array<double, 7>;

// Residual of `gt` relative to `anchor`: center offsets normalized by the
// anchor's BEV diagonal (x, y) and height (z), log size ratios, and the yaw
// difference wrapped to [-pi, pi). Both boxes must have positive dimensions.
Residual encode_residual(const Box3D& anchor, const Box3D& gt);
Box3D decode_residual(const Box3D& anchor, const Residual& residual);

// Limits the log size ratios to [-4, 4] so decoding a network output always
// yields finite dimensions.
Residual clamp_size_residual(Residual residual);

struct Anchor {
  Box3D box;
  ObjectClass cls = ObjectClass::kCar;
};

// BEV cell (x, y) of a map with `cell_size` spacing starting at `origin`
// carries, for each class in `classes` and yaw in {0, pi/2}, one anchor
// centered at the cell center. Anchors are ordered x-major, then y, class,
// yaw, which matches the flattened RPN output layout.
std::vector<Anchor> generate_anchors(int bev_x, int bev_y, const Vec3& origin,
                                     const Vec3& cell_size, const std::vector<ObjectClass>& classes,
                                     const std::array<AnchorClassConfig, kNumClasses>& class_configs);

enum class AnchorLabel : int { kIgnore = -1, kBackground = 0, kForeground = 1 };

struct AnchorTargets {
  std::vector<AnchorLabel> labels;
  // Matched ground-truth row for foreground anchors, -1 otherwise.
  std::vector<int> matched_gt;
  // Valid for foreground anchors only.
  std::vector<Residual> residuals;
  int num_foreground = 0;
};

// Class-aware BEV-IoU assignment: an anchor is foreground when its best IoU
// with a same-class GT is >= that class's fg threshold, background below the
// bg threshold and ignored in between. Each GT's best anchor is forced to
// foreground.
AnchorTargets assign_targets(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                             const std::array<AnchorClassConfig, kNumClasses>& thresholds);

struct Proposal {
  Box3D box;
  double objectness = 0.0;
  ObjectClass cls = ObjectClass::kCar;
  int anchor_id = -1;
};

// Greedy BEV-IoU suppression in descending score order (ties: lower index
// first) over the best `pre_topk` boxes; returns indices of at most
// `post_topk` survivors.
std::vector<int> nms_bev(std::span<const Box3D> boxes, std::span<const double> scores,
                         double iou_threshold, int pre_topk, int post_topk);
std::vector<Proposal> nms_bev(const std::vector<Proposal>& proposals, double iou_threshold,
                              int pre_topk, int post_topk);

}  // namespace semsurf

#endif  // SEMSURF_ANCHORS_H_
