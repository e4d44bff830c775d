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

#ifndef SEMSURF_LOSSES_H_
#define SEMSURF_LOSSES_H_

#include <torch/torch.h>

#include <optional>

#include "semsurf/anchors.h"
#include "semsurf/config.h"

namespace semsurf {

// Elementwise sigmoid focal loss on logits. Positives are weighted by alpha
// and negatives by 1 - alpha; without alpha there is no class balancing.
torch::Tensor sigmoid_focal_loss(const torch::Tensor& logits, const torch::Tensor& targets,
                                 std::optional<double> alpha, double gamma);

// Elementwise smooth-L1 of `diff` with transition point beta.
torch::Tensor smooth_l1(const torch::Tensor& diff, double beta);

// Per-row sum of smooth-L1 over 7-vector residuals, where the yaw column is
// compared as sin(p) cos(t) against cos(p) sin(t).
torch::Tensor residual_loss(const torch::Tensor& pred, const torch::Tensor& target, double beta);

struct RpnLoss {
  torch::Tensor cls;
  torch::Tensor reg;
};

// Focal loss over non-ignored anchors and residual loss over foreground
// anchors, both divided by max(1, foreground count).
RpnLoss rpn_loss(const torch::Tensor& cls_logits, const torch::Tensor& residuals,
                 const AnchorTargets& targets, const RpnConfig& config);

torch::Tensor residuals_to_tensor(const std::vector<Residual>& residuals);

}  // namespace semsurf

#endif  // SEMSURF_LOSSES_H_
