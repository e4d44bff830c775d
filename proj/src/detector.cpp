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

#include "semsurf/detector.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "semsurf/losses.h"
#include "semsurf/pointcloud_ops.h"
#include "semsurf/roi_grid.h"

namespace semsurf {
torch::Tensor LossBreakdown::total() const {
  torch::Tensor t = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) t = t + parts[i];
  return t;
}

std::vector<GroundTruth> detectable_objects(const Scene& scene, const Config& config) {
  std::vector<GroundTruth> out;
  for (const GroundTruth& gt : scene.objects) {
    if (std::find(config.rpn.classes.begin(), config.rpn.classes.end(), gt.cls) !=
        config.rpn.classes.end()) {
      out.push_back(gt);
    }
  }
  return out;
}

DetectorImpl::DetectorImpl(const Config& config) : config_(config) {
  config.validate();
  const GridGeometry geometry = config.voxel.geometry();
  backbone = register_module("backbone", Backbone3d(config.backbone, geometry));
  const auto bev = backbone->bev_shape();
  const auto per_cell = static_cast<int64_t>(2 * config.rpn.classes.size());
  rpn = register_module("rpn", RpnHead(bev[0], config.rpn, per_cell));
  rpn->set_class_prior(0.01);
  const auto& ch = config.backbone.channels;
  pool = register_module("pool", RoiGridPool(config.roi, std::array<int64_t, 3>{ch[1], ch[2], ch[3]}));
  rpg = register_module("rpg", Rpg(config.rpg, pool->output_channels(), config.loss.use_score_loss,
                                   config.loss.use_offset_loss));
  head = register_module("head", DetectHead(config.head, config.rpg.semantic_dim));
  {
    torch::NoGradGuard no_grad;
    auto& last = head->reg_branch->layers().back();
    last->weight.normal_(0.0, 0.001);
    last->bias.zero_();
  }
  const GridGeometry bev_geometry = backbone->stage_geometry(4);
  anchors_ = generate_anchors(bev_geometry.shape[0], bev_geometry.shape[1], geometry.origin,
                              bev_geometry.voxel_size, config.rpn.classes, config.rpn.anchors);
}

BackboneOutput DetectorImpl::extract(const Scene& scene) {
  const SparseVoxelGrid grid =
      voxelize(scene.cloud, config_.voxel.geometry(), config_.voxel.max_points_per_voxel);
  return backbone->forward(grid);
}

std::vector<Proposal> DetectorImpl::propose(const RpnOutput& out, bool training) const {
  const torch::Tensor logits = out.cls_logits.detach().to(torch::kFloat64).contiguous();
  const torch::Tensor residuals = out.residuals.detach().to(torch::kFloat64).contiguous();
  const auto n = static_cast<std::size_t>(logits.numel());
  const double* score = logits.data_ptr<double>();
  const int pre = training ? config_.rpn.train_pre_nms : config_.rpn.test_pre_nms;
  const int post = training ? config_.rpn.train_post_nms : config_.rpn.test_post_nms;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min<std::size_t>(n, static_cast<std::size_t>(pre));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](int a, int b) {
                      return score[a] != score[b] ? score[a] > score[b] : a < b;
                    });
  order.resize(keep);

  auto acc = residuals.accessor<double, 2>();
  std::vector<Proposal> candidates;
  candidates.reserve(keep);
  for (int i : order) {
    Residual r{};
    for (int j = 0; j < 7; ++j) r[static_cast<std::size_t>(j)] = acc[i][j];
    // Diverged outputs cannot form a box; the loss check reports them.
    if (!std::isfinite(score[i]) ||
        !std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) {
      continue;
    }
    const Anchor& a = anchors_[static_cast<std::size_t>(i)];
    candidates.push_back({decode_residual(a.box, clamp_size_residual(r)),
                          1.0 / (1.0 + std::exp(-score[i])), a.cls, i});
  }
  return nms_bev(candidates, config_.rpn.nms_iou, pre, post);
}

StageTwoOutput DetectorImpl::stage_two(const BackboneOutput& features, RoiSet rois) {
  StageTwoOutput out;
  const int g = config_.roi.grid_size;
  const int64_t n = static_cast<int64_t>(g) * g * g;
  const auto r = static_cast<int64_t>(rois.boxes.size());
  std::vector<Vec3> grid;
  grid.reserve(static_cast<std::size_t>(r * n));
  for (const Box3D& box : rois.boxes) {
    const std::vector<Vec3> pts = make_grid_points(box, g);
    grid.insert(grid.end(), pts.begin(), pts.end());
  }
  const std::span<const SparseTensor> stages(features.volumes.data() + 1, 3);
  const torch::Tensor pooled = pool->forward(stages, grid).reshape({r, n, pool->output_channels()});
  out.generated = rpg->forward(pooled, rois.boxes, g);
  out.head = head->forward(out.generated, rois.boxes);
  out.refined = refine_boxes(out.head.residuals, rois.boxes);
  const torch::Tensor conf = torch::sigmoid(out.head.conf_logits.detach()).to(torch::kFloat64).contiguous();
  out.confidence.assign(conf.data_ptr<double>(), conf.data_ptr<double>() + conf.numel());
  out.rois = std::move(rois);
  return out;
}

RoiSet DetectorImpl::sample_training_rois(const std::vector<Proposal>& proposals,
                                          const std::vector<GroundTruth>& gts,
                                          std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  RoiSet all;
  for (const Proposal& p : proposals) {
    all.boxes.push_back(p.box);
    all.classes.push_back(p.cls);
  }
  const HeadConfig& hc = config_.head;
  std::uniform_real_distribution<double> shift(-hc.roi_gt_jitter_translation, hc.roi_gt_jitter_translation);
  std::uniform_real_distribution<double> turn(-hc.roi_gt_jitter_yaw, hc.roi_gt_jitter_yaw);
  for (const GroundTruth& gt : gts) {
    for (int c = 0; c < hc.roi_gt_jitter_copies; ++c) {
      const Vec3 d{shift(rng), shift(rng), 0.0};
      all.boxes.push_back(gt.box.with_center(gt.box.center() + d).with_yaw(gt.box.yaw() + turn(rng)));
      all.classes.push_back(gt.cls);
    }
  }
  const RoiMatch match = match_rois(all.boxes, all.classes, gts);
  std::vector<int> fg;
  std::vector<int> bg;
  for (std::size_t i = 0; i < all.boxes.size(); ++i) {
    (match.iou[i] >= hc.reg_fg_iou ? fg : bg).push_back(static_cast<int>(i));
  }
  const auto total = static_cast<std::size_t>(hc.roi_samples);
  std::size_t n_fg = std::min(fg.size(), static_cast<std::size_t>(std::lround(hc.roi_samples * hc.roi_fg_fraction)));
  const std::size_t n_bg = std::min(bg.size(), total - n_fg);
  n_fg = std::min(fg.size(), total - n_bg);
  std::vector<int> chosen;
  std::sample(fg.begin(), fg.end(), std::back_inserter(chosen), n_fg, rng);
  std::sample(bg.begin(), bg.end(), std::back_inserter(chosen), n_bg, rng);
  RoiSet out;
  for (int i : chosen) {
    out.boxes.push_back(all.boxes[static_cast<std::size_t>(i)]);
    out.classes.push_back(all.classes[static_cast<std::size_t>(i)]);
  }
  return out;
}

LossBreakdown DetectorImpl::training_loss(const Scene& scene, const TargetBank* targets,
                                          std::uint64_t seed) {
  const std::vector<GroundTruth> gts = detectable_objects(scene, config_);
  const BackboneOutput features = extract(scene);
  const RpnOutput rpn_out = rpn->forward(features.bev);
  const AnchorTargets anchor_targets = assign_targets(anchors_, gts, config_.rpn.anchors);
  const RpnLoss rl = rpn_loss(rpn_out.cls_logits, rpn_out.residuals, anchor_targets, config_.rpn);

  LossBreakdown loss;
  loss.parts[0] = rl.cls;
  loss.parts[1] = rl.reg;

  const RoiSet rois = sample_training_rois(propose(rpn_out, true), gts, seed);
  StageTwoOutput s2 = stage_two(features, rois);
  const RoiMatch match = match_rois(s2.rois.boxes, s2.rois.classes, gts);
  const HeadLoss hl = head_loss(s2.head, s2.rois.boxes, match, gts, config_.head,
                                config_.loss.head_smooth_l1_beta);
  loss.parts[2] = hl.conf;
  loss.parts[3] = hl.reg;

  const GeneratedPoints& gen = s2.generated;
  const torch::Tensor zero = gen.points.sum() * 0.0;
  loss.parts[4] = zero;
  loss.parts[5] = zero;
  if (config_.loss.use_score_loss && gen.points.numel() > 0) {
    const std::vector<Vec3> pts = tensor_to_points(gen.points);
    int start = 0;
    if (!config_.train.deterministic) {
      start = static_cast<int>(std::mt19937_64(seed ^ 0x5C0DE)() % pts.size());
    }
    const std::vector<int> picked = farthest_point_sampling(pts, config_.loss.score_samples, start);
    std::vector<Vec3> sampled;
    sampled.reserve(picked.size());
    for (int i : picked) sampled.push_back(pts[static_cast<std::size_t>(i)]);
    const std::vector<float> labels = point_labels(sampled, gts);
    const torch::Tensor idx = torch::tensor(std::vector<int64_t>(picked.begin(), picked.end()), torch::kInt64);
    loss.parts[4] = score_loss(gen.logits.reshape({-1}).index_select(0, idx),
                               torch::tensor(labels, torch::kFloat32), config_.loss.score_gamma);
  }
  if (config_.loss.use_offset_loss && targets != nullptr) {
    std::vector<torch::Tensor> terms;
    for (std::size_t i = 0; i < s2.rois.boxes.size(); ++i) {
      if (match.gt_index[i] < 0 || match.iou[i] < config_.loss.fg_proposal_iou) continue;
      const GroundTruth& gt = gts[static_cast<std::size_t>(match.gt_index[i])];
      if (!targets->contains(gt.bank_id)) continue;
      const std::vector<Vec3> target = targets->posed(gt.bank_id, gt.box, scene.flipped);
      terms.push_back(chamfer_loss(gen.points[static_cast<int64_t>(i)], target));
    }
    loss.num_offset_proposals = static_cast<int>(terms.size());
    if (!terms.empty()) loss.parts[5] = torch::stack(terms).mean();
  }
  return loss;
}

InferenceResult DetectorImpl::infer(const Scene& scene) {
  InferenceResult out;
  const BackboneOutput features = extract(scene);
  out.proposals = propose(rpn->forward(features.bev), false);
  RoiSet rois;
  for (const Proposal& p : out.proposals) {
    rois.boxes.push_back(p.box);
    rois.classes.push_back(p.cls);
  }
  out.stage_two = stage_two(features, std::move(rois));
  const StageTwoOutput& s2 = out.stage_two;
  for (ObjectClass cls : config_.rpn.classes) {
    std::vector<Box3D> boxes;
    std::vector<double> scores;
    for (std::size_t i = 0; i < s2.refined.size(); ++i) {
      if (s2.rois.classes[i] != cls || s2.confidence[i] < config_.head.score_threshold) continue;
      boxes.push_back(s2.refined[i]);
      scores.push_back(s2.confidence[i]);
    }
    for (int k : nms_bev(boxes, scores, config_.head.final_nms_iou, 0, 0)) {
      out.detections.push_back({boxes[static_cast<std::size_t>(k)], scores[static_cast<std::size_t>(k)], cls});
    }
  }
  return out;
}

StageTwoOutput DetectorImpl::refine(const Scene& scene, RoiSet rois) {
  return stage_two(extract(scene), std::move(rois));
}

double ProbeReport::mean_before() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const ProbeRow& r : rows) s += r.iou_before;
  return s / static_cast<double>(rows.size());
}

double ProbeReport::mean_after() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const ProbeRow& r : rows) s += r.iou_after;
  return s / static_cast<double>(rows.size());
}

ProbeReport probe_misaligned(Detector& detector, const Scene& scene, const Distortion& distortion,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  RoiSet rois;
  for (const GroundTruth& gt : scene.objects) {
    // Rejection sampling of the disc of radius `translation`.
    double dx = 0.0;
    double dy = 0.0;
    do {
      dx = unit(rng);
      dy = unit(rng);
    } while (dx * dx + dy * dy > 1.0);
    const double yaw = distortion.yaw * unit(rng);
    const double scale = 1.0 + distortion.scale * unit(rng);
    const Box3D& b = gt.box;
    rois.boxes.emplace_back(b.center() + Vec3{dx * distortion.translation, dy * distortion.translation, 0.0},
                            b.length() * scale, b.width() * scale, b.height() * scale, b.yaw() + yaw);
    rois.classes.push_back(gt.cls);
  }
  ProbeReport report;
  {
    torch::NoGradGuard no_grad;
    report.stage_two = detector->refine(scene, rois);
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const Box3D& gt = scene.objects[i].box;
    report.rows.push_back({static_cast<int>(i), rois.boxes[i], report.stage_two.refined[i],
                           iou_3d(rois.boxes[i], gt), iou_3d(report.stage_two.refined[i], gt)});
  }
  return report;
}

}  // namespace semsurf
