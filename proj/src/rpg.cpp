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

#include "semsurf/rpg.h"

#include <cmath>

#include "semsurf/losses.h"
#include "semsurf/pointcloud_ops.h"
#include "semsurf/roi_grid.h"

namespace semsurf {

torch::Tensor grid_points_tensor(std::span<const Box3D> boxes, int grid_size) {
  const int64_t n = static_cast<int64_t>(grid_size) * grid_size * grid_size;
  torch::Tensor out = torch::empty({static_cast<int64_t>(boxes.size()), n, 3}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (std::size_t r = 0; r < boxes.size(); ++r) {
    const std::vector<Vec3> pts = make_grid_points(boxes[r], grid_size);
    for (int64_t i = 0; i < n; ++i) {
      const Vec3& p = pts[static_cast<std::size_t>(i)];
      acc[static_cast<int64_t>(r)][i][0] = static_cast<float>(p.x);
      acc[static_cast<int64_t>(r)][i][1] = static_cast<float>(p.y);
      acc[static_cast<int64_t>(r)][i][2] = static_cast<float>(p.z);
    }
  }
  return out;
}

torch::Tensor position_input_tensor(std::span<const Box3D> boxes, int grid_size) {
  const int64_t n = static_cast<int64_t>(grid_size) * grid_size * grid_size;
  torch::Tensor out =
      torch::empty({static_cast<int64_t>(boxes.size()), n, kPositionInputWidth}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (std::size_t r = 0; r < boxes.size(); ++r) {
    const std::vector<Vec3> pts = make_grid_points(boxes[r], grid_size);
    for (int64_t i = 0; i < n; ++i) {
      const auto v = position_input(pts[static_cast<std::size_t>(i)], boxes[r]);
      for (int j = 0; j < kPositionInputWidth; ++j) {
        acc[static_cast<int64_t>(r)][i][j] = static_cast<float>(v[static_cast<std::size_t>(j)]);
      }
    }
  }
  return out;
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int64_t dim, int64_t heads) : heads_(heads) {
  if (heads <= 0 || dim % heads != 0) {
    throw ConfigError("attention width " + std::to_string(dim) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  query = register_module("query", torch::nn::Linear(dim, dim));
  key = register_module("key", torch::nn::Linear(dim, dim));
  value = register_module("value", torch::nn::Linear(dim, dim));
  out = register_module("out", torch::nn::Linear(dim, dim));
}

torch::Tensor MultiHeadAttentionImpl::forward(const torch::Tensor& x, torch::Tensor* weights) {
  const int64_t b = x.size(0);
  const int64_t t = x.size(1);
  const int64_t d = x.size(2);
  const int64_t hd = d / heads_;
  const auto split = [&](const torch::Tensor& y) {
    return y.reshape({b, t, heads_, hd}).transpose(1, 2);
  };
  const torch::Tensor q = split(query->forward(x));
  const torch::Tensor k = split(key->forward(x));
  const torch::Tensor v = split(value->forward(x));
  const torch::Tensor attn =
      torch::softmax(torch::matmul(q, k.transpose(2, 3)) / std::sqrt(static_cast<double>(hd)), -1);
  if (weights != nullptr) *weights = attn;
  const torch::Tensor mixed = torch::matmul(attn, v).transpose(1, 2).reshape({b, t, d});
  return out->forward(mixed);
}

TransformerLayerImpl::TransformerLayerImpl(int64_t dim, int64_t heads, int64_t ffn_dim) {
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attention = register_module("attention", MultiHeadAttention(dim, heads));
  ffn1 = register_module("ffn1", torch::nn::Linear(dim, ffn_dim));
  ffn2 = register_module("ffn2", torch::nn::Linear(ffn_dim, dim));
}

torch::Tensor TransformerLayerImpl::forward(const torch::Tensor& features,
                                            const torch::Tensor& encoding, torch::Tensor* weights) {
  const torch::Tensor x = features + encoding;
  const torch::Tensor h = x + attention->forward(norm1->forward(x), weights);
  return h + ffn2->forward(torch::relu(ffn1->forward(norm2->forward(h))));
}

RpgImpl::RpgImpl(const RpgConfig& config, int64_t feature_dim, bool score_enabled,
                 bool offset_enabled)
    : config_(config), score_enabled_(score_enabled), offset_enabled_(offset_enabled) {
  positional = register_module(
      "positional", Mlp(std::vector<int64_t>{kPositionInputWidth, config.pos_hidden, feature_dim}, false));
  if (config.use_transformer) {
    transformer =
        register_module("transformer", TransformerLayer(feature_dim, config.num_heads, config.ffn_dim));
  }
  generator = register_module(
      "generator",
      Mlp(std::vector<int64_t>{feature_dim, config.gen_hidden, 3 + config.semantic_dim}, false));
  projection = register_module(
      "projection", torch::nn::Linear(torch::nn::LinearOptions(config.semantic_dim, 1).bias(false)));
}

GeneratedPoints RpgImpl::forward(const torch::Tensor& grid_features, std::span<const Box3D> boxes,
                                 int grid_size) {
  const torch::Tensor grid = grid_points_tensor(boxes, grid_size);
  torch::Tensor yaw = torch::empty({static_cast<int64_t>(boxes.size())}, torch::kFloat32);
  torch::Tensor centers = torch::empty({static_cast<int64_t>(boxes.size()), 3}, torch::kFloat32);
  for (std::size_t r = 0; r < boxes.size(); ++r) {
    const auto i = static_cast<int64_t>(r);
    yaw[i] = boxes[r].yaw();
    centers[i][0] = boxes[r].center().x;
    centers[i][1] = boxes[r].center().y;
    centers[i][2] = boxes[r].center().z;
  }
  torch::Tensor refined = grid_features;
  if (config_.use_transformer) {
    const torch::Tensor encoding = positional->forward(position_input_tensor(boxes, grid_size));
    refined = transformer->forward(grid_features, encoding);
  }
  return generate(refined, grid, yaw, centers);
}

GeneratedPoints RpgImpl::generate(const torch::Tensor& refined, const torch::Tensor& grid,
                                  const torch::Tensor& yaw, const torch::Tensor& centers) {
  GeneratedPoints g;
  g.grid = grid;
  const torch::Tensor out = generator->forward(refined);
  g.semantic = out.narrow(2, 3, config_.semantic_dim);
  g.logits = projection->forward(g.semantic).squeeze(2);
  g.scores = score_enabled_ ? torch::sigmoid(g.logits) : torch::ones_like(g.logits);
  if (offset_enabled_) {
    const torch::Tensor local = out.narrow(2, 0, 3);
    const torch::Tensor c = torch::cos(yaw).view({-1, 1});
    const torch::Tensor s = torch::sin(yaw).view({-1, 1});
    const torch::Tensor lx = local.select(2, 0);
    const torch::Tensor ly = local.select(2, 1);
    g.offsets = torch::stack({c * lx - s * ly, s * lx + c * ly, local.select(2, 2)}, 2);
  } else {
    g.offsets = torch::zeros_like(grid);
  }
  const torch::Tensor base =
      config_.offset_center == OffsetCenter::kRoiCenter ? centers.unsqueeze(1).expand_as(grid) : grid;
  g.points = base + g.offsets;
  return g;
}

namespace {

class ChamferFunction : public torch::autograd::Function<ChamferFunction> {
 public:
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& points,
                               const torch::Tensor& target) {
    const std::vector<Vec3> p = tensor_to_points(points);
    const std::vector<Vec3> q = tensor_to_points(target);
    const ChamferResult r = chamfer_distance(p, q);
    ctx->save_for_backward({points_to_tensor(r.grad_p, points.scalar_type())});
    return torch::tensor(r.value, points.options().requires_grad(false));
  }

  static torch::autograd::tensor_list backward(torch::autograd::AutogradContext* ctx,
                                               torch::autograd::tensor_list grad_output) {
    const torch::Tensor grad = ctx->get_saved_variables()[0];
    return {grad * grad_output[0], torch::Tensor()};
  }
};

}  // namespace

torch::Tensor chamfer_loss(const torch::Tensor& points, std::span<const Vec3> target) {
  return ChamferFunction::apply(points, points_to_tensor(target, points.scalar_type()));
}

std::vector<float> point_labels(std::span<const Vec3> points, std::span<const GroundTruth> boxes) {
  std::vector<float> labels(points.size(), 0.0F);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const GroundTruth& gt : boxes) {
      if (point_in_box(points[i], gt.box)) {
        labels[i] = 1.0F;
        break;
      }
    }
  }
  return labels;
}

torch::Tensor score_loss(const torch::Tensor& logits, const torch::Tensor& labels, double gamma) {
  if (logits.numel() == 0) return logits.sum();
  return sigmoid_focal_loss(logits, labels, std::nullopt, gamma).mean();
}

}  // namespace semsurf
