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

#include "semsurf/anchors.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace semsurf {
namespace {

double bev_diagonal(const Box3D& b) { return std::hypot(b.length(), b.width()); }

// Cheap rejection before polygon clipping.
bool may_overlap(const Box3D& a, const Box3D& b) {
  const double dx = a.center().x - b.center().x;
  const double dy = a.center().y - b.center().y;
  const double reach = 0.5 * (bev_diagonal(a) + bev_diagonal(b));
  return dx * dx + dy * dy <= reach * reach;
}

}  // namespace

Residual encode_residual(const Box3D& anchor, const Box3D& gt) {
  const double diag = bev_diagonal(anchor);
  return {(gt.center().x - anchor.center().x) / diag,
          (gt.center().y - anchor.center().y) / diag,
          (gt.center().z - anchor.center().z) / anchor.height(),
          std::log(gt.length() / anchor.length()),
          std::log(gt.width() / anchor.width()),
          std::log(gt.height() / anchor.height()),
          normalize_angle(gt.yaw() - anchor.yaw())};
}

Box3D decode_residual(const Box3D& anchor, const Residual& r) {
  const double diag = bev_diagonal(anchor);
  return Box3D({anchor.center().x + r[0] * diag, anchor.center().y + r[1] * diag,
                anchor.center().z + r[2] * anchor.height()},
               anchor.length() * std::exp(r[3]), anchor.width() * std::exp(r[4]),
               anchor.height() * std::exp(r[5]), anchor.yaw() + r[6]);
}

Residual clamp_size_residual(Residual residual) {
  for (std::size_t i = 3; i < 6; ++i) residual[i] = std::clamp(residual[i], -4.0, 4.0);
  return residual;
}

std::vector<Anchor> generate_anchors(int bev_x, int bev_y, const Vec3& origin,
                                     const Vec3& cell_size, const std::vector<ObjectClass>& classes,
                                     const std::array<AnchorClassConfig, kNumClasses>& class_configs) {
  std::vector<Anchor> anchors;
  anchors.reserve(static_cast<std::size_t>(bev_x) * static_cast<std::size_t>(bev_y) *
                  classes.size() * 2);
  for (int x = 0; x < bev_x; ++x) {
    for (int y = 0; y < bev_y; ++y) {
      const double cx = origin.x + (x + 0.5) * cell_size.x;
      const double cy = origin.y + (y + 0.5) * cell_size.y;
      for (ObjectClass cls : classes) {
        const AnchorClassConfig& cfg = class_configs[static_cast<std::size_t>(cls)];
        for (double yaw : {0.0, std::numbers::pi / 2.0}) {
          anchors.push_back(
              {Box3D({cx, cy, cfg.z_center}, cfg.size.x, cfg.size.y, cfg.size.z, yaw), cls});
        }
      }
    }
  }
  return anchors;
}

AnchorTargets assign_targets(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                             const std::array<AnchorClassConfig, kNumClasses>& thresholds) {
  AnchorTargets t;
  const std::size_t n = anchors.size();
  t.labels.assign(n, AnchorLabel::kBackground);
  t.matched_gt.assign(n, -1);
  t.residuals.assign(n, Residual{});
  if (gts.empty() || n == 0) return t;

  std::vector<double> best_iou(n, 0.0);
  std::vector<int> best_gt(n, -1);
  std::vector<double> gt_best_iou(gts.size(), -1.0);
  std::vector<int> gt_best_anchor(gts.size(), -1);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].cls != anchors[a].cls) continue;
      const double iou = may_overlap(anchors[a].box, gts[g].box) ? iou_bev(anchors[a].box, gts[g].box) : 0.0;
      if (iou > best_iou[a] || best_gt[a] < 0) {
        best_iou[a] = iou;
        best_gt[a] = static_cast<int>(g);
      }
      if (iou > gt_best_iou[g]) {
        gt_best_iou[g] = iou;
        gt_best_anchor[g] = static_cast<int>(a);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    const AnchorClassConfig& th = thresholds[static_cast<std::size_t>(anchors[a].cls)];
    if (best_gt[a] >= 0 && best_iou[a] >= th.fg_iou) {
      t.labels[a] = AnchorLabel::kForeground;
      t.matched_gt[a] = best_gt[a];
    } else if (best_gt[a] >= 0 && best_iou[a] >= th.bg_iou) {
      t.labels[a] = AnchorLabel::kIgnore;
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const int a = gt_best_anchor[g];
    if (a < 0) continue;
    t.labels[static_cast<std::size_t>(a)] = AnchorLabel::kForeground;
    t.matched_gt[static_cast<std::size_t>(a)] = static_cast<int>(g);
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (t.labels[a] != AnchorLabel::kForeground) continue;
    ++t.num_foreground;
    t.residuals[a] =
        encode_residual(anchors[a].box, gts[static_cast<std::size_t>(t.matched_gt[a])].box);
  }
  return t;
}

std::vector<int> nms_bev(std::span<const Box3D> boxes, std::span<const double> scores,
                         double iou_threshold, int pre_topk, int post_topk) {
  if (boxes.size() != scores.size()) throw std::invalid_argument("nms_bev: size mismatch");
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });
  if (pre_topk > 0 && static_cast<int>(order.size()) > pre_topk) {
    order.resize(static_cast<std::size_t>(pre_topk));
  }
  std::vector<int> kept;
  for (int i : order) {
    if (post_topk > 0 && static_cast<int>(kept.size()) >= post_topk) break;
    const Box3D& candidate = boxes[static_cast<std::size_t>(i)];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](int k) {
      const Box3D& other = boxes[static_cast<std::size_t>(k)];
      return may_overlap(candidate, other) && iou_bev(candidate, other) > iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<Proposal> nms_bev(const std::vector<Proposal>& proposals, double iou_threshold,
                              int pre_topk, int post_topk) {
  std::vector<Box3D> boxes;
  std::vector<double> scores;
  boxes.reserve(proposals.size());
  scores.reserve(proposals.size());
  for (const Proposal& p : proposals) {
    boxes.push_back(p.box);
    scores.push_back(p.objectness);
  }
  std::vector<Proposal> out;
  for (int i : nms_bev(boxes, scores, iou_threshold, pre_topk, post_topk)) {
    out.push_back(proposals[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace semsurf
