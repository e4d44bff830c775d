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

#include "semsurf/backbone.h"

#include <cmath>

namespace semsurf {

Backbone3dImpl::Backbone3dImpl(const BackboneConfig& config, const GridGeometry& input_geometry)
    : config_(config), input_geometry_(input_geometry) {
  int64_t in = config.input_channels;
  for (int stage = 0; stage < 4; ++stage) {
    const int64_t out = config.channels[static_cast<std::size_t>(stage)];
    const int count = stage == 0 ? 2 : 3;
    for (int i = 0; i < count; ++i) {
      const bool strided = stage > 0 && i == 0;
      layers_.push_back(register_module(
          "conv" + std::to_string(stage + 1) + "_" + std::to_string(i),
          SparseConv3d(i == 0 ? in : out, out, strided)));
    }
    in = out;
  }
}

GridGeometry Backbone3dImpl::stage_geometry(int stage) const {
  GridGeometry g = input_geometry_;
  for (int s = 1; s < stage; ++s) g = g.downsampled();
  return g;
}

std::array<int64_t, 3> Backbone3dImpl::bev_shape() const {
  const GridGeometry g = stage_geometry(4);
  return {config_.channels[3] * g.shape[2], g.shape[0], g.shape[1]};
}

BackboneOutput Backbone3dImpl::forward(const SparseVoxelGrid& grid) {
  if (grid.channels() != config_.input_channels) {
    throw ConfigError("backbone expects " + std::to_string(config_.input_channels) +
                      " input channels, voxel grid has " + std::to_string(grid.channels()));
  }
  torch::Tensor features =
      torch::from_blob(const_cast<float*>(grid.features().data()),
                       {static_cast<int64_t>(grid.size()), grid.channels()}, torch::kFloat32)
          .clone();
  return forward(SparseTensor{grid.layout(), features, 1});
}

BackboneOutput Backbone3dImpl::forward(const SparseTensor& input) {
  if (input.features.size(1) != config_.input_channels) {
    throw ConfigError("backbone input channel mismatch");
  }
  BackboneOutput out;
  SparseTensor x = input;
  torch::Tensor rules;
  std::size_t layer = 0;
  for (int stage = 0; stage < 4; ++stage) {
    const int count = stage == 0 ? 2 : 3;
    for (int i = 0; i < count; ++i, ++layer) {
      SparseConv3d& conv = layers_[layer];
      if (conv->strided()) {
        StridedRules r = strided_rules(x.layout);
        x = conv->forward(x, r.rules, r.output);
        rules = submanifold_rules(x.layout);
      } else {
        // Submanifold layers of one stage share the same rule table.
        if (i == 0) rules = submanifold_rules(x.layout);
        x = conv->forward(x, rules, x.layout);
      }
      x.features = torch::relu(x.features);
    }
    out.volumes.push_back(x);
  }
  out.bev = sparse_to_bev(out.volumes.back(), config_.channels[3]);
  return out;
}

torch::Tensor sparse_to_bev(const SparseTensor& volume, int64_t channels) {
  const auto& shape = volume.layout.geometry().shape;
  const int64_t nx = shape[0];
  const int64_t ny = shape[1];
  const int64_t nz = shape[2];
  torch::Tensor flat_index = torch::empty({static_cast<int64_t>(volume.layout.size())}, torch::kInt64);
  auto acc = flat_index.accessor<int64_t, 1>();
  const auto& indices = volume.layout.indices();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    acc[static_cast<int64_t>(r)] = (indices[r].x * ny + indices[r].y) * nz + indices[r].z;
  }
  torch::Tensor dense = torch::zeros({nx * ny * nz, channels}, torch::kFloat32);
  if (volume.layout.size() > 0) dense = dense.index_copy(0, flat_index, volume.features);
  return dense.reshape({nx, ny, nz, channels}).permute({2, 3, 0, 1}).reshape({nz * channels, nx, ny});
}

namespace {

torch::nn::Sequential conv_block(int64_t in, int64_t out, int64_t stride, int layers) {
  torch::nn::Sequential seq;
  for (int i = 0; i < layers; ++i) {
    seq->push_back(torch::nn::Conv2d(
        torch::nn::Conv2dOptions(i == 0 ? in : out, out, 3).stride(i == 0 ? stride : 1).padding(1)));
    seq->push_back(torch::nn::ReLU());
  }
  return seq;
}

// Crops or zero-pads the trailing two dims of `x` to `h` x `w`.
torch::Tensor match_size(torch::Tensor x, int64_t h, int64_t w) {
  if (x.size(-2) > h) x = x.narrow(-2, 0, h);
  if (x.size(-1) > w) x = x.narrow(-1, 0, w);
  if (x.size(-2) < h || x.size(-1) < w) {
    x = torch::constant_pad_nd(x, {0, w - x.size(-1), 0, h - x.size(-2)});
  }
  return x;
}

}  // namespace

RpnHeadImpl::RpnHeadImpl(int64_t in_channels, const RpnConfig& config, int64_t anchors_per_cell)
    : anchors_per_cell_(anchors_per_cell) {
  const int64_t c0 = config.block_channels[0];
  const int64_t c1 = config.block_channels[1];
  block1_ = register_module("block1", conv_block(in_channels, c0, 1, config.layers_per_block));
  block2_ = register_module("block2", conv_block(c0, c1, 2, config.layers_per_block));
  deblock1_ = register_module(
      "deblock1", torch::nn::Sequential(torch::nn::Conv2d(torch::nn::Conv2dOptions(c0, c1, 1)),
                                        torch::nn::ReLU()));
  deblock2_ = register_module(
      "deblock2",
      torch::nn::Sequential(
          torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(c1, c1, 2).stride(2)),
          torch::nn::ReLU()));
  cls_ = register_module("cls", torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * c1, anchors_per_cell, 1)));
  reg_ = register_module("reg",
                         torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * c1, 7 * anchors_per_cell, 1)));
}

void RpnHeadImpl::set_class_prior(double prior) {
  torch::NoGradGuard no_grad;
  cls_->bias.fill_(-std::log((1.0 - prior) / prior));
}

RpnOutput RpnHeadImpl::forward(const torch::Tensor& bev) {
  const torch::Tensor x = bev.unsqueeze(0);
  const torch::Tensor x1 = block1_->forward(x);
  const torch::Tensor x2 = block2_->forward(x1);
  const torch::Tensor up1 = deblock1_->forward(x1);
  const torch::Tensor up2 = match_size(deblock2_->forward(x2), x1.size(2), x1.size(3));
  const torch::Tensor merged = torch::cat({up1, up2}, 1);
  // [1, A, X, Y] -> [X, Y, A]
  const torch::Tensor cls = cls_->forward(merged)[0].permute({1, 2, 0});
  const torch::Tensor reg = reg_->forward(merged)[0].permute({1, 2, 0});
  return {cls.reshape({-1}), reg.reshape({-1, 7})};
}

}  // namespace semsurf
