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

#include <torch/torch.h>

#include <cmath>

#include "doctest.h"
#include "semsurf/config.h"
#include "semsurf/detector.h"
#include "semsurf/synthetic.h"
#include "semsurf/trainer.h"

namespace semsurf {
namespace {

TrainData small_data(int frames) {
  std::vector<Scene> scenes;
  for (int i = 0; i < frames; ++i) scenes.push_back(synth_scene(SynthSpec{}, 100 + static_cast<std::uint64_t>(i)));
  return prepare_training_data(std::move(scenes), Config::reduced().targets);
}

TEST_CASE("training loss is the sum of its parts") {
  const TrainData data = small_data(2);
  torch::manual_seed(0);
  Detector model(Config::reduced());
  model->train();
  const LossBreakdown loss = model->training_loss(data.scenes[0], &data.targets, 7);
  double sum = 0.0;
  for (const torch::Tensor& part : loss.parts) {
    REQUIRE(part.defined());
    CHECK(std::isfinite(part.item<double>()));
    sum += part.item<double>();
  }
  CHECK(loss.total().item<double>() == doctest::Approx(sum).epsilon(1e-6));
  CHECK(loss.num_offset_proposals > 0);
}

TEST_CASE("ablated loss terms drop out of the objective") {
  const TrainData data = small_data(1);
  Config config = Config::reduced();
  config.loss.use_score_loss = false;
  config.loss.use_offset_loss = false;
  torch::manual_seed(0);
  Detector model(config);
  model->train();
  const LossBreakdown loss = model->training_loss(data.scenes[0], &data.targets, 7);
  CHECK(loss.parts[4].item<double>() == 0.0);
  CHECK(loss.parts[5].item<double>() == 0.0);
  const double four = loss.parts[0].item<double>() + loss.parts[1].item<double>() +
                      loss.parts[2].item<double>() + loss.parts[3].item<double>();
  CHECK(loss.total().item<double>() == doctest::Approx(four).epsilon(1e-6));

  // The generator follows the same switches end to end.
  model->eval();
  torch::NoGradGuard no_grad;
  const Scene& scene = data.scenes[0];
  const std::vector<GroundTruth> gts = detectable_objects(scene, config);
  RoiSet rois;
  for (const GroundTruth& gt : gts) {
    rois.boxes.push_back(gt.box);
    rois.classes.push_back(gt.cls);
  }
  const StageTwoOutput out = model->refine(scene, rois);
  CHECK(torch::equal(out.generated.scores, torch::ones_like(out.generated.scores)));
  CHECK(torch::equal(out.generated.points, out.generated.grid));
}

TEST_CASE("inference produces scored detections of the configured classes") {
  const TrainData data = small_data(1);
  torch::manual_seed(0);
  Detector model(Config::reduced());
  model->eval();
  torch::NoGradGuard no_grad;
  const InferenceResult result = model->infer(data.scenes[0]);
  const int g = model->config().roi.grid_size;
  CHECK(result.stage_two.generated.points.size(0) == static_cast<int64_t>(result.stage_two.rois.boxes.size()));
  if (!result.stage_two.rois.boxes.empty()) {
    CHECK(result.stage_two.generated.points.size(1) == g * g * g);
  }
  for (const Detection& d : result.detections) {
    CHECK(d.cls == ObjectClass::kCar);
    CHECK(d.confidence >= 0.0);
    CHECK(d.confidence <= 1.0);
  }
}

TEST_CASE("probe without distortion starts from the ground truth") {
  const TrainData data = small_data(1);
  torch::manual_seed(0);
  Detector model(Config::reduced());
  model->eval();
  const Scene& scene = data.scenes[0];
  const ProbeReport report = probe_misaligned(model, scene, Distortion{0.0, 0.0, 0.0}, 3);
  CHECK(report.rows.size() == detectable_objects(scene, model->config()).size());
  for (const ProbeRow& row : report.rows) CHECK(row.iou_before == doctest::Approx(1.0));
  CHECK(report.mean_before() == doctest::Approx(1.0));

  const ProbeReport moved = probe_misaligned(model, scene, Distortion{}, 3);
  for (const ProbeRow& row : moved.rows) CHECK(row.iou_before < 1.0);
  const ProbeReport again = probe_misaligned(model, scene, Distortion{}, 3);
  REQUIRE(again.rows.size() == moved.rows.size());
  for (std::size_t i = 0; i < moved.rows.size(); ++i) {
    CHECK(again.rows[i].iou_before == moved.rows[i].iou_before);
  }
}

}  // namespace
}  // namespace semsurf
