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

#include "semsurf/sparse_conv.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semsurf {
namespace {

bool index_less(const VoxelIndex& a, const VoxelIndex& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

VoxelIndex kernel_offset(int k) { return {k % 3 - 1, k / 3 % 3 - 1, k / 9 - 1}; }

torch::Tensor submanifold_rules(const VoxelLayout& layout) {
  const auto n = static_cast<int64_t>(layout.size());
  torch::Tensor rules = torch::empty({n, kKernelVolume}, torch::kInt64);
  auto acc = rules.accessor<int64_t, 2>();
  const auto& indices = layout.indices();
  for (int64_t r = 0; r < n; ++r) {
    const VoxelIndex& v = indices[static_cast<std::size_t>(r)];
    for (int k = 0; k < kKernelVolume; ++k) {
      const VoxelIndex d = kernel_offset(k);
      const int row = layout.find({v.x + d.x, v.y + d.y, v.z + d.z});
      acc[r][k] = row < 0 ? n : row;
    }
  }
  return rules;
}

StridedRules strided_rules(const VoxelLayout& layout) {
  const GridGeometry out_geometry = layout.geometry().downsampled();
  std::vector<VoxelIndex> sites;
  sites.reserve(layout.size() * 2);
  const auto candidates = [](int i, int bound, int* out) {
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      const int num = i + 1 - k;
      if (num % 2 != 0) continue;
      const int o = num / 2;
      if (o >= 0 && o < bound) out[n++] = o;
    }
    return n;
  };
  for (const VoxelIndex& v : layout.indices()) {
    int xs[3];
    int ys[3];
    int zs[3];
    const int nx = candidates(v.x, out_geometry.shape[0], xs);
    const int ny = candidates(v.y, out_geometry.shape[1], ys);
    const int nz = candidates(v.z, out_geometry.shape[2], zs);
    for (int a = 0; a < nx; ++a) {
      for (int b = 0; b < ny; ++b) {
        for (int c = 0; c < nz; ++c) sites.push_back({xs[a], ys[b], zs[c]});
      }
    }
  }
  std::sort(sites.begin(), sites.end(), index_less);
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  StridedRules out{VoxelLayout(out_geometry, sites), {}};
  const auto n_in = static_cast<int64_t>(layout.size());
  const auto n_out = static_cast<int64_t>(sites.size());
  out.rules = torch::empty({n_out, kKernelVolume}, torch::kInt64);
  auto acc = out.rules.accessor<int64_t, 2>();
  for (int64_t r = 0; r < n_out; ++r) {
    const VoxelIndex& o = sites[static_cast<std::size_t>(r)];
    for (int k = 0; k < kKernelVolume; ++k) {
      const VoxelIndex d = kernel_offset(k);
      const int row = layout.find({2 * o.x + d.x, 2 * o.y + d.y, 2 * o.z + d.z});
      acc[r][k] = row < 0 ? n_in : row;
    }
  }
  return out;
}

torch::Tensor apply_rules(const torch::Tensor& features, const torch::Tensor& rules,
                          const torch::Tensor& weight, const torch::Tensor& bias) {
  const int64_t c_in = features.size(1);
  if (weight.size(0) != kKernelVolume * c_in) {
    throw std::invalid_argument("sparse conv: input has " + std::to_string(c_in) +
                                " channels, weight expects " +
                                std::to_string(weight.size(0) / kKernelVolume));
  }
  if (rules.size(0) == 0) return torch::zeros({0, weight.size(1)}, features.options());
  const torch::Tensor padded = torch::cat({features, torch::zeros({1, c_in}, features.options())});
  const torch::Tensor gathered =
      padded.index_select(0, rules.reshape({-1})).reshape({rules.size(0), kKernelVolume * c_in});
  return torch::addmm(bias, gathered, weight);
}

SparseConv3dImpl::SparseConv3dImpl(int64_t in_channels, int64_t out_channels, bool strided)
    : in_channels_(in_channels), out_channels_(out_channels), strided_(strided) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(kKernelVolume * in_channels));
  weight = register_parameter(
      "weight", torch::empty({kKernelVolume * in_channels, out_channels}).uniform_(-bound, bound));
  bias = register_parameter("bias", torch::empty({out_channels}).uniform_(-bound, bound));
}

SparseTensor SparseConv3dImpl::forward(const SparseTensor& input) {
  if (strided_) {
    StridedRules r = strided_rules(input.layout);
    return forward(input, r.rules, r.output);
  }
  return forward(input, submanifold_rules(input.layout), input.layout);
}

SparseTensor SparseConv3dImpl::forward(const SparseTensor& input, const torch::Tensor& rules,
                                       const VoxelLayout& output_layout) {
  if (input.features.size(1) != in_channels_) {
    throw std::invalid_argument("sparse conv: channel mismatch");
  }
  return {output_layout, apply_rules(input.features, rules, weight, bias),
          strided_ ? input.stage_id + 1 : input.stage_id};
}

}  // namespace semsurf
