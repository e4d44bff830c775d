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

#include "semsurf/losses.h"

#include <stdexcept>

namespace semsurf {

torch::Tensor sigmoid_focal_loss(const torch::Tensor& logits, const torch::Tensor& targets,
                                 std::optional<double> alpha, double gamma) {
  const torch::Tensor p = torch::sigmoid(logits);
  const torch::Tensor ce =
      torch::binary_cross_entropy_with_logits(logits, targets, {}, {}, at::Reduction::None);
  const torch::Tensor p_t = p * targets + (1 - p) * (1 - targets);
  torch::Tensor loss = ce * torch::pow(1 - p_t, gamma);
  if (alpha) loss = loss * (*alpha * targets + (1 - *alpha) * (1 - targets));
  return loss;
}

torch::Tensor smooth_l1(const torch::Tensor& diff, double beta) {
  const torch::Tensor a = diff.abs();
  if (beta <= 0) return a;
  return torch::where(a < beta, 0.5 * a * a / beta, a - 0.5 * beta);
}

torch::Tensor residual_loss(const torch::Tensor& pred, const torch::Tensor& target, double beta) {
  if (pred.sizes() != target.sizes() || pred.dim() != 2 || pred.size(1) != 7) {
    throw ConfigError("residual loss expects matching [N, 7] tensors");
  }
  const torch::Tensor p_yaw = pred.select(1, 6);
  const torch::Tensor t_yaw = target.select(1, 6);
  const torch::Tensor yaw_diff = torch::sin(p_yaw) * torch::cos(t_yaw) - torch::cos(p_yaw) * torch::sin(t_yaw);
  const torch::Tensor diff = torch::cat({pred.narrow(1, 0, 6) - target.narrow(1, 0, 6), yaw_diff.unsqueeze(1)}, 1);
  return smooth_l1(diff, beta).sum(1);
}

torch::Tensor residuals_to_tensor(const std::vector<Residual>& residuals) {
  torch::Tensor out = torch::empty({static_cast<int64_t>(residuals.size()), 7}, torch::kFloat32);
  auto acc = out.accessor<float, 2>();
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    for (int j = 0; j < 7; ++j) acc[static_cast<int64_t>(i)][j] = static_cast<float>(residuals[i][static_cast<std::size_t>(j)]);
  }
  return out;
}

RpnLoss rpn_loss(const torch::Tensor& cls_logits, const torch::Tensor& residuals,
                 const AnchorTargets& targets, const RpnConfig& config) {
  const auto n = static_cast<int64_t>(targets.labels.size());
  if (cls_logits.numel() != n || residuals.size(0) != n) {
    throw ConfigError("rpn loss: " + std::to_string(cls_logits.numel()) + " outputs for " +
                      std::to_string(n) + " anchors");
  }
  std::vector<int64_t> valid;
  std::vector<float> labels;
  std::vector<int64_t> fg;
  std::vector<Residual> fg_targets;
  for (int64_t i = 0; i < n; ++i) {
    const AnchorLabel l = targets.labels[static_cast<std::size_t>(i)];
    if (l == AnchorLabel::kIgnore) continue;
    valid.push_back(i);
    labels.push_back(l == AnchorLabel::kForeground ? 1.0F : 0.0F);
    if (l == AnchorLabel::kForeground) {
      fg.push_back(i);
      fg_targets.push_back(targets.residuals[static_cast<std::size_t>(i)]);
    }
  }
  const double norm = std::max<double>(1.0, static_cast<double>(fg.size()));
  const torch::Tensor valid_idx = torch::tensor(valid, torch::kInt64);
  const torch::Tensor label_t = torch::tensor(labels, torch::kFloat32);
  RpnLoss out;
  out.cls = sigmoid_focal_loss(cls_logits.index_select(0, valid_idx), label_t, config.focal_alpha,
                               config.focal_gamma)
                .sum() /
            norm;
  if (fg.empty()) {
    out.reg = residuals.sum() * 0.0;
  } else {
    const torch::Tensor pred = residuals.index_select(0, torch::tensor(fg, torch::kInt64));
    out.reg = residual_loss(pred, residuals_to_tensor(fg_targets), config.smooth_l1_beta).sum() / norm;
  }
  return out;
}

}  // namespace semsurf
