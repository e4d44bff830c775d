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

#include <random>

#include "doctest.h"
#include "oracles.h"
#include "semsurf/evaluation.h"
#include "semsurf/export.h"
#include "semsurf/kitti_io.h"
#include "temp_dir.h"

namespace semsurf {
namespace {

const Box3D kGt(10, 0, -1, 4, 1.6, 1.5, 0.3);

FrameEvaluation frame(std::vector<Detection> dets) {
  FrameEvaluation f;
  f.ground_truth.push_back({kGt, ObjectClass::kCar, std::nullopt});
  f.detections = std::move(dets);
  return f;
}

TEST_CASE("AP examples") {
  const Box3D miss(30, 10, -1, 4, 1.6, 1.5, 0);
  CHECK(average_precision_r40({frame({{kGt, 0.9}})}, ObjectClass::kCar, 0.7) == 1.0);
  CHECK(average_precision_r40({frame({{miss, 0.9}, {kGt, 0.8}})}, ObjectClass::kCar, 0.7) == 0.5);
  CHECK(average_precision_r40({frame({})}, ObjectClass::kCar, 0.7) == 0.0);
  // A second detection of the same object is a false positive.
  CHECK(average_precision_r40({frame({{kGt, 0.9}, {kGt, 0.8}})}, ObjectClass::kCar, 0.7) == 1.0);
  // Other classes are ignored.
  CHECK(average_precision_r40({frame({{kGt, 0.9, ObjectClass::kCyclist}})}, ObjectClass::kCar,
                              0.7) == 0.0);
}

TEST_CASE("AP matches the brute-force oracle on random cases") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> jitter(-0.8, 0.8);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 4);
  for (int t = 0; t < 50; ++t) {
    std::vector<FrameEvaluation> frames(3);
    for (auto& f : frames) {
      const int g = count(rng);
      for (int i = 0; i < g; ++i) {
        f.ground_truth.push_back({Box3D(8.0 * i, 0, 0, 4, 2, 1.5, 0), ObjectClass::kCar, std::nullopt});
      }
      const int d = count(rng) + 1;
      for (int i = 0; i < d; ++i) {
        const double x = 8.0 * std::uniform_int_distribution<int>(0, 4)(rng) + jitter(rng);
        f.detections.push_back({Box3D(x, jitter(rng), 0, 4, 2, 1.5, jitter(rng)), conf(rng)});
      }
    }
    const double expected = oracle::average_precision_r40(frames, ObjectClass::kCar, 0.5);
    CHECK(average_precision_r40(frames, ObjectClass::kCar, 0.5) == expected);
  }
}

TEST_CASE("difficulty levels are cumulative") {
  FrameEvaluation f;
  f.ground_truth.push_back({kGt, ObjectClass::kCar, Difficulty::kEasy});
  f.ground_truth.push_back({Box3D(20, 5, -1, 4, 1.6, 1.5, 0), ObjectClass::kCar, Difficulty::kHard});
  f.detections.push_back({kGt, 0.9});
  const std::vector<FrameEvaluation> frames{f};
  CHECK(average_precision_r40(frames, ObjectClass::kCar, 0.7, Difficulty::kEasy) == 1.0);
  CHECK(average_precision_r40(frames, ObjectClass::kCar, 0.7, Difficulty::kHard) == 0.5);
  const auto rows = evaluate_ap_table(frames, {ObjectClass::kCar}, {0.7, 0.5, 0.5});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].num_ground_truth == 2);
  CHECK(rows[0].ap_by_difficulty.size() == 3);
  CHECK(format_ap_table(rows).find("Car") != std::string::npos);
}

TEST_CASE("PLY export round trip and score filter") {
  TempDir dir("ply");
  std::vector<ScoredPoint> pts;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  for (int i = 0; i < 50; ++i) pts.push_back({{u(rng) * 10.0, u(rng) * 5.0, u(rng)}, u(rng)});
  write_ply(dir.path() / "a.ply", pts);
  const auto back = read_ply(dir.path() / "a.ply");
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK((back[i].position - pts[i].position).norm() < 1e-5);
    CHECK(back[i].score == doctest::Approx(pts[i].score).epsilon(1e-6));
  }
  std::vector<ScoredPoint> expected;
  for (const auto& p : pts) {
    if (p.score >= 0.6F) expected.push_back(p);
  }
  const auto kept = filter_by_score(pts, 0.6F);
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].position == expected[i].position);

  write_ply(dir.path() / "empty.ply", {});
  CHECK(read_ply(dir.path() / "empty.ply").empty());
}

TEST_CASE("detection files round trip") {
  TempDir dir("det");
  const std::vector<Detection> dets{{kGt, 0.75, ObjectClass::kCar},
                                    {Box3D(5, 3, -0.8, 0.8, 0.6, 1.7, -2), 0.5,
                                     ObjectClass::kPedestrian}};
  write_detections(dir.path() / "0.txt", dets, Calibration::axis_swap());
  const auto back = read_detections(dir.path() / "0.txt", Calibration::axis_swap());
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(iou_3d(back[i].box, dets[i].box) > 0.999);
    CHECK(back[i].cls == dets[i].cls);
    CHECK(back[i].confidence == doctest::Approx(dets[i].confidence).epsilon(1e-4));
  }
  write_detections(dir.path() / "none.txt", {}, Calibration::axis_swap());
  CHECK(read_detections(dir.path() / "none.txt", Calibration::axis_swap()).empty());
}

}  // namespace
}  // namespace semsurf
