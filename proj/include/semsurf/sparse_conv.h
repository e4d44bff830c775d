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

#ifndef SEMSURF_SPARSE_CONV_H_
#define SEMSURF_SPARSE_CONV_H_

#include <torch/torch.h>

#include "semsurf/pointcloud_ops.h"

namespace semsurf {

// Features of the occupied voxels of `layout`, one row per index.
struct SparseTensor {
  VoxelLayout layout;
  torch::Tensor features;
  int stage_id = 1;
};

inline constexpr int kKernelVolume = 27;

// Kernel offset k covers (dx, dy, dz) = (k % 3, k / 3 % 3, k / 9) - 1.
VoxelIndex kernel_offset(int k);

// Rule tables map each output row and kernel offset to the input row feeding
// it, or to the input row count (a zero pad row) when that input is empty.
// Submanifold rules keep the input occupancy.
torch::Tensor submanifold_rules(const VoxelLayout& layout);

struct StridedRules {
  VoxelLayout output;
  torch::Tensor rules;
};

// Kernel 3, stride 2, padding 1: output o reads inputs 2o - 1 + {0, 1, 2} per
// axis, the output shape is ceil(shape / 2), and output sites are every
// location with at least one occupied input, sorted by (x, y, z).
StridedRules strided_rules(const VoxelLayout& layout);

// out[r] = sum_k W_k^T in[rules[r, k]] + b as one gather and one matmul.
// `weight` is [27 * C_in, C_out].
torch::Tensor apply_rules(const torch::Tensor& features, const torch::Tensor& rules,
                          const torch::Tensor& weight, const torch::Tensor& bias);

class SparseConv3dImpl : public torch::nn::Module {
 public:
  SparseConv3dImpl(int64_t in_channels, int64_t out_channels, bool strided);
  // Linear response, no activation.
  SparseTensor forward(const SparseTensor& input);
  SparseTensor forward(const SparseTensor& input, const torch::Tensor& rules,
                       const VoxelLayout& output_layout);
  bool strided() const { return strided_; }
  int64_t in_channels() const { return in_channels_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  int64_t in_channels_;
  int64_t out_channels_;
  bool strided_;
};
TORCH_MODULE(SparseConv3d);

}  // namespace semsurf

#endif  // SEMSURF_SPARSE_CONV_H_
