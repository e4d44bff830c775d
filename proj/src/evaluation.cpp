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

#include "semsurf/evaluation.h"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace semsurf {
namespace {

enum class Outcome { kTruePositive, kFalsePositive, kIgnored };

struct Scored {
  double confidence;
  Outcome outcome;
};

bool counts_at(const GroundTruth& gt, std::optional<Difficulty> level) {
  if (!level) return true;
  return gt.difficulty.has_value() && static_cast<int>(*gt.difficulty) <= static_cast<int>(*level);
}

}  // namespace

std::vector<PrecisionRecallPoint> precision_recall(const std::vector<FrameEvaluation>& frames,
                                                   ObjectClass cls, double iou_threshold,
                                                   std::optional<Difficulty> level) {
  std::vector<Scored> scored;
  int num_gt = 0;
  for (const FrameEvaluation& frame : frames) {
    std::vector<const GroundTruth*> gts;
    for (const GroundTruth& gt : frame.ground_truth) {
      if (gt.cls != cls) continue;
      gts.push_back(&gt);
      if (counts_at(gt, level)) ++num_gt;
    }
    std::vector<int> order;
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
      if (frame.detections[i].cls == cls) order.push_back(static_cast<int>(i));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return frame.detections[static_cast<std::size_t>(a)].confidence >
             frame.detections[static_cast<std::size_t>(b)].confidence;
    });
    std::vector<bool> taken(gts.size(), false);
    for (int d : order) {
      const Detection& det = frame.detections[static_cast<std::size_t>(d)];
      int best = -1;
      double best_iou = iou_threshold;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g]) continue;
        const double iou = iou_3d(det.box, gts[g]->box);
        if (iou >= best_iou && (best < 0 || iou > best_iou)) {
          best = static_cast<int>(g);
          best_iou = iou;
        }
      }
      Outcome outcome = Outcome::kFalsePositive;
      if (best >= 0) {
        taken[static_cast<std::size_t>(best)] = true;
        outcome = counts_at(*gts[static_cast<std::size_t>(best)], level) ? Outcome::kTruePositive
                                                                         : Outcome::kIgnored;
      }
      scored.push_back({det.confidence, outcome});
    }
  }
  std::vector<PrecisionRecallPoint> curve;
  if (num_gt == 0) return curve;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });
  int tp = 0;
  int fp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].outcome == Outcome::kTruePositive) ++tp;
    if (scored[i].outcome == Outcome::kFalsePositive) ++fp;
    const bool group_end = i + 1 == scored.size() || scored[i + 1].confidence != scored[i].confidence;
    if (!group_end || tp + fp == 0) continue;
    curve.push_back({scored[i].confidence, static_cast<double>(tp) / (tp + fp),
                     static_cast<double>(tp) / num_gt, tp, num_gt});
  }
  return curve;
}

double interpolated_ap(const std::vector<PrecisionRecallPoint>& curve) {
  double sum = 0.0;
  for (int k = 1; k <= kRecallPositions; ++k) {
    double best = 0.0;
    for (const PrecisionRecallPoint& pt : curve) {
      // recall >= k / 40, compared exactly on integer counts.
      if (kRecallPositions * pt.true_positives >= k * pt.num_ground_truth) {
        best = std::max(best, pt.precision);
      }
    }
    sum += best;
  }
  return sum / kRecallPositions;
}

double average_precision_r40(const std::vector<FrameEvaluation>& frames, ObjectClass cls,
                             double iou_threshold, std::optional<Difficulty> level) {
  return interpolated_ap(precision_recall(frames, cls, iou_threshold, level));
}

std::vector<ApRow> evaluate_ap_table(const std::vector<FrameEvaluation>& frames,
                                     const std::vector<ObjectClass>& classes,
                                     const std::array<double, kNumClasses>& iou_thresholds) {
  std::vector<ApRow> rows;
  for (ObjectClass cls : classes) {
    ApRow row;
    row.cls = cls;
    row.iou_threshold = iou_thresholds[static_cast<std::size_t>(cls)];
    bool has_difficulty = false;
    for (const auto& frame : frames) {
      for (const auto& gt : frame.ground_truth) {
        if (gt.cls != cls) continue;
        ++row.num_ground_truth;
        has_difficulty = has_difficulty || gt.difficulty.has_value();
      }
    }
    row.ap_overall = average_precision_r40(frames, cls, row.iou_threshold);
    if (has_difficulty) {
      for (Difficulty d : {Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard}) {
        row.ap_by_difficulty[d] = average_precision_r40(frames, cls, row.iou_threshold, d);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_ap_table(const std::vector<ApRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "class        iou   #gt   AP_R40(all)  easy    moderate  hard\n";
  for (const ApRow& row : rows) {
    os << std::left << std::setw(12) << class_name(row.cls) << ' ' << row.iou_threshold << "  "
       << std::setw(5) << row.num_ground_truth << ' ' << std::setw(12) << row.ap_overall * 100.0;
    for (Difficulty d : {Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard}) {
      const auto it = row.ap_by_difficulty.find(d);
      os << ' ' << std::setw(8);
      if (it == row.ap_by_difficulty.end()) {
        os << "-";
      } else {
        os << it->second * 100.0;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace semsurf
