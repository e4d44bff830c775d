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

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semsurf/anchors.h"
#include "semsurf/backbone.h"
#include "semsurf/config.h"
#include "semsurf/detector.h"
#include "semsurf/losses.h"
#include "semsurf/nn.h"
#include "semsurf/sparse_conv.h"

namespace semsurf {
namespace {

constexpr double kPi = std::numbers::pi;

GridGeometry small_geometry(std::array<int, 3> shape) {
  GridGeometry g;
  g.origin = {0, 0, 0};
  g.voxel_size = {1, 1, 1};
  g.shape = shape;
  return g;
}

VoxelLayout random_layout(const GridGeometry& g, double fill, std::mt19937_64& rng) {
  std::bernoulli_distribution occupied(fill);
  std::vector<VoxelIndex> idx;
  for (int x = 0; x < g.shape[0]; ++x)
    for (int y = 0; y < g.shape[1]; ++y)
      for (int z = 0; z < g.shape[2]; ++z)
        if (occupied(rng)) idx.push_back({x, y, z});
  std::shuffle(idx.begin(), idx.end(), rng);
  return VoxelLayout(g, idx);
}

torch::Tensor to_dense(const VoxelLayout& layout, const torch::Tensor& feats) {
  const auto& s = layout.geometry().shape;
  torch::Tensor dense = torch::zeros({1, feats.size(1), s[0], s[1], s[2]}, torch::kFloat64);
  for (std::size_t r = 0; r < layout.size(); ++r) {
    const VoxelIndex v = layout.indices()[r];
    dense.index_put_({0, torch::indexing::Slice(), v.x, v.y, v.z},
                     feats[static_cast<int64_t>(r)]);
  }
  return dense;
}

// Dense 3D kernel [C_out, C_in, 3, 3, 3] equivalent to the sparse weight.
torch::Tensor dense_kernel(const torch::Tensor& weight, int64_t c_in) {
  const int64_t c_out = weight.size(1);
  torch::Tensor k = torch::zeros({c_out, c_in, 3, 3, 3}, torch::kFloat64);
  for (int o = 0; o < kKernelVolume; ++o) {
    const VoxelIndex d = kernel_offset(o);
    k.index_put_({torch::indexing::Slice(), torch::indexing::Slice(), d.x + 1, d.y + 1, d.z + 1},
                 weight.narrow(0, o * c_in, c_in).t().to(torch::kFloat64));
  }
  return k;
}

TEST_CASE("sparse convolution matches dense convolution at active sites") {
  torch::manual_seed(0);
  std::mt19937_64 rng(1);
  const GridGeometry g = small_geometry({7, 6, 5});
  for (bool strided : {false, true}) {
    const VoxelLayout layout = random_layout(g, 0.3, rng);
    const torch::Tensor feats = torch::randn({static_cast<int64_t>(layout.size()), 3});
    SparseConv3d conv(3, 4, strided);
    const SparseTensor out = conv->forward(SparseTensor{layout, feats, 1});
    const torch::Tensor dense = torch::conv3d(to_dense(layout, feats.to(torch::kFloat64)),
                                              dense_kernel(conv->weight.detach(), 3),
                                              conv->bias.detach().to(torch::kFloat64),
                                              strided ? 2 : 1, 1);
    const auto& shape = out.layout.geometry().shape;
    if (strided) {
      CHECK(shape == std::array<int, 3>{4, 3, 3});
      CHECK(out.stage_id == 2);
    } else {
      CHECK((out.layout.indices() == layout.indices()));
    }
    CHECK(dense.size(2) == shape[0]);
    CHECK(dense.size(3) == shape[1]);
    CHECK(dense.size(4) == shape[2]);
    for (std::size_t r = 0; r < out.layout.size(); ++r) {
      const VoxelIndex v = out.layout.indices()[r];
      const torch::Tensor expected = dense.index({0, torch::indexing::Slice(), v.x, v.y, v.z});
      CHECK(torch::allclose(out.features[static_cast<int64_t>(r)].to(torch::kFloat64), expected,
                            1e-5, 1e-5));
    }
    if (strided) {
      // Every output site has an occupied input in its receptive field and
      // the sites are sorted.
      for (std::size_t r = 0; r < out.layout.size(); ++r) {
        const VoxelIndex o = out.layout.indices()[r];
        bool any = false;
        for (int k = 0; k < kKernelVolume; ++k) {
          const VoxelIndex d = kernel_offset(k);
          any = any || layout.find({2 * o.x + d.x, 2 * o.y + d.y, 2 * o.z + d.z}) >= 0;
        }
        CHECK(any);
        if (r > 0) {
          const VoxelIndex p = out.layout.indices()[r - 1];
          CHECK(std::tie(p.x, p.y, p.z) < std::tie(o.x, o.y, o.z));
        }
      }
    }
  }
}

SparseConv3d identity_conv(bool strided) {
  SparseConv3d conv(2, 2, strided);
  torch::NoGradGuard no_grad;
  conv->weight.zero_();
  conv->bias.zero_();
  // Offset 13 is (0, 0, 0).
  conv->weight.narrow(0, 13 * 2, 2).copy_(torch::eye(2));
  return conv;
}

TEST_CASE("identity kernel keeps a single voxel in place") {
  const GridGeometry g = small_geometry({8, 8, 8});
  const torch::Tensor feats = torch::tensor({{1.5F, -2.0F}});

  const SparseTensor same = identity_conv(false)->forward(SparseTensor{VoxelLayout(g, {{5, 3, 6}}), feats, 1});
  REQUIRE(same.layout.size() == 1);
  CHECK(same.layout.indices()[0] == VoxelIndex{5, 3, 6});
  CHECK(torch::equal(same.features, feats));

  // The center tap of output o reads input 2o, so (4, 2, 6) lands on (2, 1, 3).
  const SparseTensor down = identity_conv(true)->forward(SparseTensor{VoxelLayout(g, {{4, 2, 6}}), feats, 1});
  const int row = down.layout.find({2, 1, 3});
  REQUIRE(row >= 0);
  CHECK(torch::equal(down.features[row], feats[0]));
  CHECK(down.layout.geometry().shape == std::array<int, 3>{4, 4, 4});
  CHECK(down.layout.geometry().voxel_size == Vec3{2, 2, 2});
  for (std::size_t r = 0; r < down.layout.size(); ++r) {
    if (static_cast<int>(r) != row) CHECK(down.features[static_cast<int64_t>(r)].abs().sum().item<float>() == 0.0F);
  }
}

TEST_CASE("sparse convolution rejects a channel mismatch") {
  const GridGeometry g = small_geometry({4, 4, 4});
  const VoxelLayout layout(g, {{1, 1, 1}});
  SparseConv3d conv(3, 4, false);
  CHECK_THROWS_AS(conv->forward(SparseTensor{layout, torch::zeros({1, 2}), 1}),
                  std::invalid_argument);
}

TEST_CASE("full-scale backbone shapes") {
  const Config c = Config::full();
  const GridGeometry g = c.voxel.geometry();
  CHECK(g.shape == std::array<int, 3>{1408, 1600, 40});
  Backbone3d backbone(c.backbone, g);
  CHECK(backbone->stage_geometry(4).shape == std::array<int, 3>{176, 200, 5});
  const auto bev = backbone->bev_shape();
  CHECK(bev == std::array<int64_t, 3>{5 * 64, 176, 200});
  CHECK(backbone->layers().size() == 11);

  torch::NoGradGuard no_grad;
  const SparseVoxelGrid empty(VoxelLayout(g, {}), 4, {}, 0);
  const BackboneOutput out = backbone->forward(empty);
  REQUIRE(out.volumes.size() == 4);
  for (const auto& v : out.volumes) CHECK(v.layout.empty());
  CHECK(out.bev.sizes() == torch::IntArrayRef{320, 176, 200});
  CHECK(out.bev.abs().sum().item<float>() == 0.0F);
}

TEST_CASE("backbone propagates a voxel and checks channels") {
  Config c = Config::reduced();
  const GridGeometry g = c.voxel.geometry();
  Backbone3d backbone(c.backbone, g);
  torch::NoGradGuard no_grad;
  const SparseVoxelGrid one(VoxelLayout(g, {{40, 60, 10}}), 4, {0.1F, 0.0F, -0.1F, 0.5F}, 0);
  const BackboneOutput out = backbone->forward(one);
  CHECK(out.volumes[0].layout.size() == 1);
  CHECK(out.volumes[1].layout.find({20, 30, 5}) >= 0);
  CHECK(out.volumes[3].layout.find({5, 7, 1}) >= 0);
  for (int s = 0; s < 4; ++s) CHECK(out.volumes[static_cast<std::size_t>(s)].stage_id == s + 1);
  const auto shape = backbone->bev_shape();
  CHECK(out.bev.sizes() == torch::IntArrayRef{shape[0], shape[1], shape[2]});
  // Only the BEV cells of active stage-4 sites are non-zero.
  const torch::Tensor nonzero = (out.bev.abs().sum(0) > 0).nonzero();
  CHECK(nonzero.size(0) <= static_cast<int64_t>(out.volumes[3].layout.size()));

  const SparseVoxelGrid wrong(VoxelLayout(g, {{1, 1, 1}}), 3, {0.0F, 0.0F, 0.0F}, 0);
  CHECK_THROWS_AS(backbone->forward(wrong), ConfigError);
}

TEST_CASE("sparse_to_bev stacks Z slices channel-wise") {
  const GridGeometry g = small_geometry({3, 2, 2});
  const VoxelLayout layout(g, {{2, 1, 1}, {0, 0, 0}});
  const torch::Tensor feats = torch::tensor({{1.0F, 2.0F}, {3.0F, 4.0F}});
  const torch::Tensor bev = sparse_to_bev(SparseTensor{layout, feats, 4}, 2);
  CHECK(bev.sizes() == torch::IntArrayRef{4, 3, 2});
  CHECK(bev[2][2][1].item<float>() == 1.0F);
  CHECK(bev[3][2][1].item<float>() == 2.0F);
  CHECK(bev[0][0][0].item<float>() == 3.0F);
  CHECK(bev[1][0][0].item<float>() == 4.0F);
  CHECK(bev.sum().item<float>() == 10.0F);
}

TEST_CASE("anchor generation") {
  const RpnConfig rpn;
  const auto a = generate_anchors(2, 2, {0, -40, -3}, {0.4, 0.4, 4}, {ObjectClass::kCar}, rpn.anchors);
  REQUIRE(a.size() == 8);
  CHECK(a[0].box.center().x == doctest::Approx(0.2));
  CHECK(a[0].box.center().y == doctest::Approx(-39.8));
  CHECK(a[0].box.center().z == doctest::Approx(-1.0));
  CHECK(a[0].box.yaw() == 0.0);
  CHECK(a[1].box.yaw() == doctest::Approx(kPi / 2));
  CHECK(a[2].box.center().y == doctest::Approx(-39.4));
  CHECK(a[4].box.center().x == doctest::Approx(0.6));
  CHECK(a[0].box.dims() == Vec3{3.9, 1.6, 1.56});

  const auto full = generate_anchors(176, 200, {0, -40, -3}, {0.4, 0.4, 4}, rpn.classes, rpn.anchors);
  CHECK(full.size() == 211200);
  CHECK(full[2].cls == ObjectClass::kPedestrian);
  CHECK(full[5].cls == ObjectClass::kCyclist);

  const Config c = Config::full();
  Detector detector(c);
  CHECK(detector->anchors().size() == 211200);
}

TEST_CASE("residual encoding") {
  const Box3D anchor(0, 0, 0, 3.9, 1.6, 1.56, 0);
  for (double v : encode_residual(anchor, anchor)) CHECK(v == 0.0);
  const Residual r = encode_residual(anchor, anchor.with_center({1, 0, 0}));
  CHECK(r[0] == doctest::Approx(1.0 / std::sqrt(3.9 * 3.9 + 1.6 * 1.6)));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> size(0.3, 5);
  for (int i = 0; i < 200; ++i) {
    const Box3D a(u(rng), u(rng), u(rng), size(rng), size(rng), size(rng), u(rng));
    const Box3D g(u(rng), u(rng), u(rng), size(rng), size(rng), size(rng), u(rng));
    const Box3D back = decode_residual(a, encode_residual(a, g));
    CHECK((back.center() - g.center()).norm() < 1e-6);
    CHECK((back.dims() - g.dims()).norm() < 1e-6);
    CHECK(std::abs(normalize_angle(back.yaw() - g.yaw())) < 1e-6);
  }
  const Residual huge{0, 0, 0, 50, -50, 9, 0};
  const Box3D d = decode_residual(anchor, clamp_size_residual(huge));
  CHECK(std::isfinite(d.length()));
  CHECK(d.width() > 0.0);
}

TEST_CASE("anchor target assignment") {
  const RpnConfig rpn;
  const Box3D gt_box(0, 0, -1, 3.9, 1.6, 1.56, 0);
  // Same size shifted by 1.3 m along x: overlap 2.6 / union 5.2 = 0.5.
  const std::vector<Anchor> anchors{{gt_box, ObjectClass::kCar},
                                    {gt_box.with_center({1.3, 0, -1}), ObjectClass::kCar},
                                    {gt_box.with_center({20, 0, -1}), ObjectClass::kCar},
                                    {gt_box, ObjectClass::kPedestrian}};
  CHECK(iou_bev(anchors[0].box, anchors[1].box) == doctest::Approx(0.5));
  const std::vector<GroundTruth> gts{{gt_box, ObjectClass::kCar, std::nullopt}};
  const AnchorTargets t = assign_targets(anchors, gts, rpn.anchors);
  CHECK(t.labels[0] == AnchorLabel::kForeground);
  CHECK(t.matched_gt[0] == 0);
  for (double v : t.residuals[0]) CHECK(v == doctest::Approx(0.0));
  CHECK(t.labels[1] == AnchorLabel::kIgnore);
  CHECK(t.labels[2] == AnchorLabel::kBackground);
  // Class-aware: a pedestrian anchor never matches a car.
  CHECK(t.labels[3] == AnchorLabel::kBackground);
  CHECK(t.num_foreground == 1);

  const AnchorTargets none = assign_targets(anchors, {}, rpn.anchors);
  for (AnchorLabel l : none.labels) CHECK(l == AnchorLabel::kBackground);

  // A GT below every threshold still gets its best anchor.
  const std::vector<Anchor> far{{gt_box.with_center({2.5, 0, -1}), ObjectClass::kCar},
                                {gt_box.with_center({3.0, 0, -1}), ObjectClass::kCar}};
  const AnchorTargets forced = assign_targets(far, gts, rpn.anchors);
  CHECK(forced.labels[0] == AnchorLabel::kForeground);
  CHECK(forced.num_foreground >= 1);
}

TEST_CASE("BEV non-maximum suppression") {
  const Box3D a(0, 0, 0, 4, 2, 1.5, 0);
  const Box3D b(10, 0, 0, 4, 2, 1.5, 0);
  const Box3D c(20, 0, 0, 4, 2, 1.5, 0);
  CHECK(nms_bev(std::vector<Box3D>{a}, std::vector<double>{0.3}, 0.7, 0, 0) == std::vector<int>{0});
  CHECK(nms_bev(std::vector<Box3D>{a, a}, std::vector<double>{0.8, 0.9}, 0.99, 0, 0) ==
        std::vector<int>{1});
  CHECK(nms_bev(std::vector<Box3D>{a, b, c}, std::vector<double>{0.1, 0.3, 0.2}, 0.1, 0, 0) ==
        std::vector<int>{1, 2, 0});
  CHECK(nms_bev(std::vector<Box3D>{a, b, c}, std::vector<double>{0.1, 0.3, 0.2}, 0.1, 0, 2).size() ==
        2);
  CHECK(nms_bev(std::vector<Box3D>{a, b, c}, std::vector<double>{0.1, 0.3, 0.2}, 0.1, 1, 0) ==
        std::vector<int>{1});
  // Equal scores keep the lower index.
  CHECK(nms_bev(std::vector<Box3D>{a, a}, std::vector<double>{0.5, 0.5}, 0.5, 0, 0) ==
        std::vector<int>{0});
}

TEST_CASE("NMS result does not depend on input order") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 12);
  std::uniform_real_distribution<double> s(0, 1);
  for (int t = 0; t < 30; ++t) {
    std::vector<Box3D> boxes;
    std::vector<double> scores;
    for (int i = 0; i < 25; ++i) {
      boxes.emplace_back(u(rng), u(rng), 0, 4, 1.8, 1.5, s(rng) * 3);
      scores.push_back(s(rng));
    }
    std::vector<int> perm(boxes.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Box3D> boxes2;
    std::vector<double> scores2;
    for (int i : perm) {
      boxes2.push_back(boxes[static_cast<std::size_t>(i)]);
      scores2.push_back(scores[static_cast<std::size_t>(i)]);
    }
    std::vector<int> kept1 = nms_bev(boxes, scores, 0.3, 20, 10);
    std::vector<int> kept2 = nms_bev(boxes2, scores2, 0.3, 20, 10);
    for (int& k : kept2) k = perm[static_cast<std::size_t>(k)];
    CHECK(kept1 == kept2);
  }
}

TEST_CASE("loss examples") {
  const torch::Tensor diff = torch::tensor({0.5, 2.0, -2.0}, torch::kFloat64);
  const torch::Tensor l = smooth_l1(diff, 1.0);
  CHECK(l[0].item<double>() == doctest::Approx(0.125));
  CHECK(l[1].item<double>() == doctest::Approx(1.5));
  CHECK(l[2].item<double>() == doctest::Approx(1.5));

  const torch::Tensor zero = torch::zeros({1}, torch::kFloat64);
  const torch::Tensor one = torch::ones({1}, torch::kFloat64);
  CHECK(sigmoid_focal_loss(zero, one, 1.0, 2.0).item<double>() ==
        doctest::Approx(0.25 * std::log(2.0)));
  // alpha = 1 removes negatives entirely under class balancing.
  CHECK(sigmoid_focal_loss(zero, torch::zeros({1}, torch::kFloat64), 1.0, 2.0).item<double>() ==
        0.0);
}

TEST_CASE("focal loss without balancing and gamma 0 is binary cross-entropy") {
  torch::manual_seed(3);
  const torch::Tensor logits = torch::randn({500}, torch::kFloat64) * 3;
  const torch::Tensor targets = (torch::rand({500}, torch::kFloat64) > 0.5).to(torch::kFloat64);
  const double focal = sigmoid_focal_loss(logits, targets, std::nullopt, 0.0).mean().item<double>();
  const double bce = torch::binary_cross_entropy_with_logits(logits, targets).item<double>();
  CHECK(std::abs(focal - bce) <= 1e-6);
}

TEST_CASE("residual loss compares yaw through its sine") {
  const torch::Tensor pred = torch::zeros({1, 7}, torch::kFloat64);
  torch::Tensor target = torch::zeros({1, 7}, torch::kFloat64);
  target[0][6] = kPi;
  // sin(0 - pi) = 0: a half-turn costs nothing.
  CHECK(residual_loss(pred, target, 1.0 / 9).item<double>() == doctest::Approx(0.0).epsilon(1e-12));
  target[0][6] = 0.5;
  CHECK(residual_loss(pred, target, 1.0).item<double>() ==
        doctest::Approx(0.5 * std::sin(0.5) * std::sin(0.5)));
  CHECK_THROWS_AS(residual_loss(torch::zeros({2, 7}), torch::zeros({1, 7}), 1.0), ConfigError);
}

TEST_CASE("RPN loss normalization") {
  const RpnConfig config;
  AnchorTargets t;
  t.labels = {AnchorLabel::kBackground, AnchorLabel::kBackground, AnchorLabel::kIgnore};
  t.matched_gt = {-1, -1, -1};
  t.residuals.resize(3);
  const torch::Tensor logits = torch::full({3}, -30.0);
  const RpnLoss perfect = rpn_loss(logits, torch::zeros({3, 7}), t, config);
  CHECK(perfect.reg.item<double>() == 0.0);
  CHECK(perfect.cls.item<double>() < 1e-9);
  CHECK_THROWS_AS(rpn_loss(torch::zeros({2}), torch::zeros({2, 7}), t, config), ConfigError);

  t.labels[0] = AnchorLabel::kForeground;
  t.labels[1] = AnchorLabel::kForeground;
  t.residuals[0] = {0.5, 0, 0, 0, 0, 0, 0};
  t.residuals[1] = {0, 0, 0, 0, 0, 0, 0};
  t.num_foreground = 2;
  const RpnLoss two = rpn_loss(torch::zeros({3}), torch::zeros({3, 7}), t, config);
  // Each positive at p = 0.5 costs 0.25 * 0.25 * ln 2; the sum is halved.
  CHECK(two.cls.item<double>() == doctest::Approx(0.25 * 0.25 * std::log(2.0)));
  CHECK(two.reg.item<double>() == doctest::Approx((0.5 - 0.5 / 9.0) / 2.0));
}

TEST_CASE("RPN head layout and class prior") {
  RpnConfig config;
  config.block_channels = {8, 16};
  config.layers_per_block = 1;
  RpnHead head(12, config, 2);
  head->set_class_prior(0.01);
  torch::NoGradGuard no_grad;
  const RpnOutput out = head->forward(torch::zeros({12, 6, 4}));
  CHECK(out.cls_logits.sizes() == torch::IntArrayRef{6 * 4 * 2});
  CHECK(out.residuals.sizes() == torch::IntArrayRef{6 * 4 * 2, 7});
  CHECK(torch::sigmoid(out.cls_logits).mean().item<double>() == doctest::Approx(0.01).epsilon(0.2));

  // Odd map sizes survive the stride-2 branch.
  const RpnOutput odd = head->forward(torch::zeros({12, 5, 3}));
  CHECK(odd.cls_logits.size(0) == 5 * 3 * 2);
}

TEST_CASE("full configuration parameter budget") {
  Detector detector(Config::full());
  const int64_t n = count_parameters(*detector);
  MESSAGE("full-config trainable parameters: " << n);
  CHECK(n >= 1500000);
  CHECK(n <= 3500000);
}

}  // namespace
}  // namespace semsurf
