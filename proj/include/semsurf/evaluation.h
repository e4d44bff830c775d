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

#ifndef SEMSURF_EVALUATION_H_
#define SEMSURF_EVALUATION_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semsurf/scene.h"

namespace semsurf {

inline constexpr int kRecallPositions = 40;

struct Detection {
  Box3D box;
  double confidence = 0.0;
  ObjectClass cls = ObjectClass::kCar;
};

struct FrameEvaluation {
  std::vector<Detection> detections;
  std::vector<GroundTruth> ground_truth;
};

struct PrecisionRecallPoint {
  double score_threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int true_positives = 0;
  int num_ground_truth = 0;
};

// Precision/recall at every distinct confidence threshold of class `cls`.
// Within a frame, detections are matched greedily in descending confidence to
// the unmatched GT of highest 3D IoU >= iou_threshold. When `level` is set,
// only GTs at or below that difficulty count; detections matched to other GTs
// of the class are ignored rather than counted as false positives.
std::vector<PrecisionRecallPoint> precision_recall(const std::vector<FrameEvaluation>& frames,
                                                   ObjectClass cls, double iou_threshold,
                                                   std::optional<Difficulty> level = std::nullopt);

// Mean over recall positions r = 1/40 .. 40/40 of the best precision among
// points with recall >= r (0 when none reaches r).
double interpolated_ap(const std::vector<PrecisionRecallPoint>& curve);

double average_precision_r40(const std::vector<FrameEvaluation>& frames, ObjectClass cls,
                             double iou_threshold, std::optional<Difficulty> level = std::nullopt);

struct ApRow {
  ObjectClass cls = ObjectClass::kCar;
  double iou_threshold = 0.0;
  int num_ground_truth = 0;
  double ap_overall = 0.0;
  // Present only when the ground truth carries difficulty labels.
  std::map<Difficulty, double> ap_by_difficulty;
};

std::vector<ApRow> evaluate_ap_table(const std::vector<FrameEvaluation>& frames,
                                     const std::vector<ObjectClass>& classes,
                                     const std::array<double, kNumClasses>& iou_thresholds);

std::string format_ap_table(const std::vector<ApRow>& rows);

}  // namespace semsurf

#endif  // SEMSURF_EVALUATION_H_
