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

#ifndef SEMSURF_NN_H_
#define SEMSURF_NN_H_

#include <torch/torch.h>

#include <span>
#include <vector>

#include "semsurf/geometry.h"

namespace semsurf {

// [N, 3] float32 unless another floating dtype is requested.
torch::Tensor points_to_tensor(std::span<const Vec3> points,
                               torch::ScalarType dtype = torch::kFloat32);
std::vector<Vec3> tensor_to_points(const torch::Tensor& points);

// Stack of Linear layers with a ReLU after every layer except, when
// `relu_last` is false, the final one.
class MlpImpl : public torch::nn::Module {
 public:
  MlpImpl(std::vector<int64_t> widths, bool relu_last);
  torch::Tensor forward(torch::Tensor x);
  const std::vector<torch::nn::Linear>& layers() const { return layers_; }

 private:
  std::vector<torch::nn::Linear> layers_;
  bool relu_last_;
};
TORCH_MODULE(Mlp);

int64_t count_parameters(const torch::nn::Module& module);

}  // namespace semsurf

#endif  // SEMSURF_NN_H_
