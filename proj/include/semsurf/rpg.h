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

#ifndef SEMSURF_RPG_H_
#define SEMSURF_RPG_H_

#include <torch/torch.h>

#include <span>
#include <vector>

#include "semsurf/config.h"
#include "semsurf/nn.h"
#include "semsurf/scene.h"

namespace semsurf {

// Generated points of R proposals with N = G^3 points each.
struct GeneratedPoints {
  torch::Tensor grid;      // [R, N, 3] world
  torch::Tensor offsets;   // [R, N, 3] world
  torch::Tensor points;    // [R, N, 3] grid + offsets
  torch::Tensor semantic;  // [R, N, C_se]
  torch::Tensor logits;    // [R, N]
  torch::Tensor scores;    // [R, N]
};

// Grid points of every box, [R, G^3, 3] in make_grid_points order.
torch::Tensor grid_points_tensor(std::span<const Box3D> boxes, int grid_size);
// position_input of every grid point, [R, G^3, 27].
torch::Tensor position_input_tensor(std::span<const Box3D> boxes, int grid_size);

class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(int64_t dim, int64_t heads);
  // x is [B, T, D]. Returns the projected output and, when requested, the
  // attention weights [B, H, T, T] through `weights`.
  torch::Tensor forward(const torch::Tensor& x, torch::Tensor* weights = nullptr);

  torch::nn::Linear query{nullptr};
  torch::nn::Linear key{nullptr};
  torch::nn::Linear value{nullptr};
  torch::nn::Linear out{nullptr};

 private:
  int64_t heads_;
};
TORCH_MODULE(MultiHeadAttention);

// Single pre-norm encoder layer over tokens f + delta:
//   h = x + MHA(LN(x)),  y = h + FFN(LN(h)).
class TransformerLayerImpl : public torch::nn::Module {
 public:
  TransformerLayerImpl(int64_t dim, int64_t heads, int64_t ffn_dim);
  torch::Tensor forward(const torch::Tensor& features, const torch::Tensor& encoding,
                        torch::Tensor* weights = nullptr);

  torch::nn::LayerNorm norm1{nullptr};
  torch::nn::LayerNorm norm2{nullptr};
  MultiHeadAttention attention{nullptr};
  torch::nn::Linear ffn1{nullptr};
  torch::nn::Linear ffn2{nullptr};
};
TORCH_MODULE(TransformerLayer);

class RpgImpl : public torch::nn::Module {
 public:
  // `score_enabled` false fixes every score to 1; `offset_enabled` false keeps
  // every point on its grid point.
  RpgImpl(const RpgConfig& config, int64_t feature_dim, bool score_enabled, bool offset_enabled);

  // grid_features [R, N, C_g] pooled at the grid points of `boxes`.
  GeneratedPoints forward(const torch::Tensor& grid_features, std::span<const Box3D> boxes,
                          int grid_size);
  // Offsets, semantic features and scores from refined features; offsets are
  // produced in each box frame and rotated into the world.
  GeneratedPoints generate(const torch::Tensor& refined, const torch::Tensor& grid,
                           const torch::Tensor& yaw, const torch::Tensor& centers);

  Mlp positional{nullptr};
  TransformerLayer transformer{nullptr};
  Mlp generator{nullptr};
  torch::nn::Linear projection{nullptr};

 private:
  RpgConfig config_;
  bool score_enabled_;
  bool offset_enabled_;
};
TORCH_MODULE(Rpg);

// Chamfer distance between differentiable `points` [N, 3] and a fixed
// target; the backward pass uses the analytic nearest-neighbor gradient.
torch::Tensor chamfer_loss(const torch::Tensor& points, std::span<const Vec3> target);

// 1 for points inside any of `boxes`, 0 otherwise.
std::vector<float> point_labels(std::span<const Vec3> points, std::span<const GroundTruth> boxes);

// Two-sided focal loss averaged over the points: -(1 - s)^g log s for
// foreground labels and -s^g log(1 - s) for background.
torch::Tensor score_loss(const torch::Tensor& logits, const torch::Tensor& labels, double gamma);

}  // namespace semsurf

#endif  // SEMSURF_RPG_H_
