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

#include "semsurf/detect_head.h"

#include <algorithm>
#include <limits>

#include "semsurf/losses.h"
#include "semsurf/pointcloud_ops.h"
#include "semsurf/roi_grid.h"

namespace semsurf {

BoxTensors box_tensors(std::span<const Box3D> boxes) {
  const auto r = static_cast<int64_t>(boxes.size());
  BoxTensors t{torch::empty({r, 3}), torch::empty({r, 3}), torch::empty({r})};
  auto c = t.centers.accessor<float, 2>();
  auto d = t.dims.accessor<float, 2>();
  auto y = t.yaw.accessor<float, 1>();
  for (int64_t i = 0; i < r; ++i) {
    const Box3D& b = boxes[static_cast<std::size_t>(i)];
    c[i][0] = static_cast<float>(b.center().x);
    c[i][1] = static_cast<float>(b.center().y);
    c[i][2] = static_cast<float>(b.center().z);
    d[i][0] = static_cast<float>(b.length());
    d[i][1] = static_cast<float>(b.width());
    d[i][2] = static_cast<float>(b.height());
    y[i] = static_cast<float>(b.yaw());
  }
  return t;
}

torch::Tensor canonical_coordinates(const torch::Tensor& points, const BoxTensors& boxes) {
  const torch::Tensor rel = points - boxes.centers.unsqueeze(1);
  const torch::Tensor c = torch::cos(boxes.yaw).view({-1, 1});
  const torch::Tensor s = torch::sin(boxes.yaw).view({-1, 1});
  const torch::Tensor x = rel.select(2, 0);
  const torch::Tensor y = rel.select(2, 1);
  return torch::stack({c * x + s * y, -s * x + c * y, rel.select(2, 2)}, 2);
}

torch::Tensor local_spatial_inputs(const GeneratedPoints& generated, const BoxTensors& boxes) {
  const torch::Tensor local = canonical_coordinates(generated.points, boxes);
  const torch::Tensor depth = generated.points.norm(2, 2, true);
  return torch::cat({local, depth, generated.scores.unsqueeze(2)}, 2);
}

std::vector<int> centroid_sampling(std::span<const Vec3> points, int k) {
  Vec3 mean{};
  for (const Vec3& p : points) mean += p;
  mean = mean * (1.0 / static_cast<double>(points.size()));
  int start = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared_distance(points[i], mean);
    if (d > best) {
      best = d;
      start = static_cast<int>(i);
    }
  }
  return farthest_point_sampling(points, k, start);
}

SetAbstractionImpl::SetAbstractionImpl(int64_t in_channels, std::vector<int64_t> widths,
                                       double radius, int centroids)
    : radius_(radius), centroids_(centroids) {
  widths.insert(widths.begin(), 3 + in_channels);
  mlp = register_module("mlp", Mlp(widths, true));
}

std::pair<torch::Tensor, torch::Tensor> SetAbstractionImpl::forward(const torch::Tensor& coords,
                                                                    const torch::Tensor& features) {
  const int64_t r = coords.size(0);
  const int64_t n = coords.size(1);
  const int64_t k = std::min<int64_t>(centroids_, n);
  torch::Tensor centroid_index = torch::empty({r, k}, torch::kInt64);
  auto ci = centroid_index.accessor<int64_t, 2>();
  const torch::Tensor detached = coords.detach();
  for (int64_t i = 0; i < r; ++i) {
    const std::vector<Vec3> pts = tensor_to_points(detached[i]);
    const std::vector<int> chosen = centroid_sampling(pts, static_cast<int>(k));
    for (int64_t j = 0; j < k; ++j) ci[i][j] = chosen[static_cast<std::size_t>(j)];
  }
  const torch::Tensor centers =
      torch::gather(coords, 1, centroid_index.unsqueeze(2).expand({r, k, 3}));

  // Every (roi, centroid, member) triple inside the ball.
  const torch::Tensor d2 = (centers.detach().unsqueeze(2) - detached.unsqueeze(1)).pow(2).sum(3);
  const torch::Tensor pairs = torch::nonzero(d2 <= radius_ * radius_);
  const torch::Tensor pr = pairs.select(1, 0);
  const torch::Tensor pc = pairs.select(1, 1);
  const torch::Tensor pm = pairs.select(1, 2);
  const torch::Tensor flat_member = pr * n + pm;
  const torch::Tensor flat_group = pr * k + pc;
  const torch::Tensor member_xyz = coords.reshape({r * n, 3}).index_select(0, flat_member);
  const torch::Tensor center_xyz = centers.reshape({r * k, 3}).index_select(0, flat_group);
  const torch::Tensor member_feat =
      features.reshape({r * n, features.size(2)}).index_select(0, flat_member);
  const torch::Tensor h = mlp->forward(torch::cat({member_xyz - center_xyz, member_feat}, 1));
  torch::Tensor pooled = torch::zeros({r * k, h.size(1)}, h.options());
  pooled = pooled.scatter_reduce(0, flat_group.unsqueeze(1).expand_as(h), h, "amax", true);
  return {centers, pooled.reshape({r, k, h.size(1)})};
}

DetectHeadImpl::DetectHeadImpl(const HeadConfig& config, int64_t semantic_dim) {
  local = register_module(
      "local", Mlp(std::vector<int64_t>{kLocalSpatialInputWidth, config.spatial_dim, config.spatial_dim}, true));
  const int64_t merged = config.spatial_dim + semantic_dim;
  sa1 = register_module(
      "sa1", SetAbstraction(merged, std::vector<int64_t>{config.sa_channels[0], config.sa_channels[0]}, config.sa_radii[0],
                            config.sa_centroids[0]));
  sa2 = register_module(
      "sa2", SetAbstraction(int64_t{config.sa_channels[0]},
                            std::vector<int64_t>{config.sa_channels[1], config.sa_channels[1]},
                            config.sa_radii[1], config.sa_centroids[1]));
  global = register_module(
      "global", Mlp(std::vector<int64_t>{3 + config.sa_channels[1], config.roi_feature_dim}, true));
  conf_branch = register_module(
      "conf", Mlp(std::vector<int64_t>{config.roi_feature_dim, config.fc_dim, config.fc_dim, 1}, false));
  reg_branch = register_module(
      "reg", Mlp(std::vector<int64_t>{config.roi_feature_dim, config.fc_dim, config.fc_dim, 7}, false));
}

torch::Tensor DetectHeadImpl::encode(const torch::Tensor& coords, const torch::Tensor& features) {
  auto [c1, f1] = sa1->forward(coords, features);
  auto [c2, f2] = sa2->forward(c1, f1);
  return std::get<0>(global->forward(torch::cat({c2, f2}, 2)).max(1));
}

HeadOutput DetectHeadImpl::forward(const GeneratedPoints& generated, std::span<const Box3D> boxes) {
  const BoxTensors bt = box_tensors(boxes);
  const torch::Tensor spatial = local->forward(local_spatial_inputs(generated, bt));
  const torch::Tensor merged = torch::cat({spatial, generated.semantic}, 2);
  const torch::Tensor normalized = canonical_coordinates(generated.points, bt) / bt.dims.unsqueeze(1);
  HeadOutput out;
  out.roi_features = encode(normalized, merged);
  out.conf_logits = conf_branch->forward(out.roi_features).squeeze(1);
  out.residuals = reg_branch->forward(out.roi_features);
  return out;
}

RoiMatch match_rois(std::span<const Box3D> rois, std::span<const ObjectClass> classes,
                    std::span<const GroundTruth> gts) {
  RoiMatch m;
  m.iou.assign(rois.size(), 0.0);
  m.gt_index.assign(rois.size(), -1);
  for (std::size_t i = 0; i < rois.size(); ++i) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].cls != classes[i]) continue;
      const double iou = iou_3d(rois[i], gts[g].box);
      if (m.gt_index[i] < 0 || iou > m.iou[i]) {
        m.iou[i] = iou;
        m.gt_index[i] = static_cast<int>(g);
      }
    }
  }
  return m;
}

double confidence_target(double iou, const HeadConfig& config) {
  return std::clamp((iou - config.conf_bg_iou) / (config.conf_fg_iou - config.conf_bg_iou), 0.0, 1.0);
}

HeadLoss head_loss(const HeadOutput& out, std::span<const Box3D> rois, const RoiMatch& match,
                   std::span<const GroundTruth> gts, const HeadConfig& config, double beta) {
  const auto r = static_cast<int64_t>(rois.size());
  torch::Tensor conf_target = torch::empty({r}, torch::dtype(out.conf_logits.scalar_type()));
  std::vector<int64_t> fg;
  std::vector<Residual> fg_targets;
  for (int64_t i = 0; i < r; ++i) {
    const auto u = static_cast<std::size_t>(i);
    conf_target[i] = confidence_target(match.iou[u], config);
    if (match.gt_index[u] >= 0 && match.iou[u] >= config.reg_fg_iou) {
      fg.push_back(i);
      fg_targets.push_back(encode_residual(rois[u], gts[static_cast<std::size_t>(match.gt_index[u])].box));
    }
  }
  HeadLoss loss;
  loss.conf = r == 0 ? out.conf_logits.sum() * 0.0
                     : torch::binary_cross_entropy_with_logits(out.conf_logits, conf_target);
  if (fg.empty()) {
    loss.reg = out.residuals.sum() * 0.0;
  } else {
    const torch::Tensor pred = out.residuals.index_select(0, torch::tensor(fg, torch::kInt64));
    loss.reg = residual_loss(pred, residuals_to_tensor(fg_targets), beta).sum() /
               static_cast<double>(fg.size());
  }
  return loss;
}

std::vector<Box3D> refine_boxes(const torch::Tensor& residuals, std::span<const Box3D> rois) {
  const torch::Tensor t = residuals.detach().to(torch::kFloat64).contiguous();
  auto acc = t.accessor<double, 2>();
  std::vector<Box3D> out;
  out.reserve(rois.size());
  for (std::size_t i = 0; i < rois.size(); ++i) {
    Residual res{};
    for (int j = 0; j < 7; ++j) res[static_cast<std::size_t>(j)] = acc[static_cast<int64_t>(i)][j];
    out.push_back(decode_residual(rois[i], clamp_size_residual(res)));
  }
  return out;
}

}  // namespace semsurf
