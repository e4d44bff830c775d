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

#include "semsurf/nn.h"

#include <stdexcept>
#include <string>

namespace semsurf {

torch::Tensor points_to_tensor(std::span<const Vec3> points, torch::ScalarType dtype) {
  torch::Tensor out = torch::empty({static_cast<int64_t>(points.size()), 3}, torch::kFloat64);
  auto acc = out.accessor<double, 2>();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto r = static_cast<int64_t>(i);
    acc[r][0] = points[i].x;
    acc[r][1] = points[i].y;
    acc[r][2] = points[i].z;
  }
  return out.to(dtype);
}

std::vector<Vec3> tensor_to_points(const torch::Tensor& points) {
  const torch::Tensor t = points.detach().to(torch::kFloat64).reshape({-1, 3}).contiguous();
  auto acc = t.accessor<double, 2>();
  std::vector<Vec3> out(static_cast<std::size_t>(t.size(0)));
  for (int64_t i = 0; i < t.size(0); ++i) {
    out[static_cast<std::size_t>(i)] = {acc[i][0], acc[i][1], acc[i][2]};
  }
  return out;
}

MlpImpl::MlpImpl(std::vector<int64_t> widths, bool relu_last) : relu_last_(relu_last) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least two widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers_.push_back(register_module("fc" + std::to_string(i),
                                      torch::nn::Linear(widths[i], widths[i + 1])));
  }
}

torch::Tensor MlpImpl::forward(torch::Tensor x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x);
    if (relu_last_ || i + 1 < layers_.size()) x = torch::relu(x);
  }
  return x;
}

int64_t count_parameters(const torch::nn::Module& module) {
  int64_t total = 0;
  for (const torch::Tensor& p : module.parameters()) {
    if (p.requires_grad()) total += p.numel();
  }
  return total;
}

}  // namespace semsurf
