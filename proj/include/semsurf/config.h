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

#ifndef SEMSURF_CONFIG_H_
#define SEMSURF_CONFIG_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "semsurf/geometry.h"
#include "semsurf/pointcloud_ops.h"
#include "semsurf/scene.h"

namespace semsurf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VoxelConfig {
  Vec3 range_min{0.0, -40.0, -3.0};
  Vec3 range_max{70.4, 40.0, 1.0};
  Vec3 voxel_size{0.05, 0.05, 0.1};
  int max_points_per_voxel = 5;

  GridGeometry geometry() const;
};

struct BackboneConfig {
  int input_channels = 4;
  std::array<int, 4> channels{16, 32, 48, 64};
};

struct AnchorClassConfig {
  Vec3 size;
  double z_center = 0.0;
  double fg_iou = 0.6;
  double bg_iou = 0.45;
};

struct RpnConfig {
  std::vector<ObjectClass> classes{ObjectClass::kCar, ObjectClass::kPedestrian,
                                   ObjectClass::kCyclist};
  // Indexed by ObjectClass.
  std::array<AnchorClassConfig, kNumClasses> anchors{{
      {{3.9, 1.6, 1.56}, -1.0, 0.6, 0.45},
      {{0.8, 0.6, 1.73}, -0.6, 0.5, 0.35},
      {{1.76, 0.6, 1.73}, -0.6, 0.5, 0.35},
  }};
  std::array<int, 2> block_channels{64, 128};
  int layers_per_block = 5;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double smooth_l1_beta = 1.0 / 9.0;
  int train_pre_nms = 512;
  int train_post_nms = 128;
  int test_pre_nms = 1024;
  int test_post_nms = 100;
  double nms_iou = 0.7;
};

struct RoiPoolConfig {
  int grid_size = 6;
  // Channels pooled from each of the last three backbone stages.
  int stage_channels = 32;
  int mlp_hidden = 32;
  int neighbor_radius = 2;
  int neighbor_samples = 16;
};

enum class OffsetCenter { kGridPoint, kRoiCenter };

struct RpgConfig {
  bool use_transformer = true;
  int num_heads = 4;
  int ffn_dim = 384;
  int pos_hidden = 96;
  int gen_hidden = 96;
  int semantic_dim = 32;
  OffsetCenter offset_center = OffsetCenter::kGridPoint;
};

struct HeadConfig {
  int spatial_dim = 64;
  std::array<double, 2> sa_radii{0.4, 0.8};
  std::array<int, 2> sa_centroids{64, 16};
  std::array<int, 2> sa_channels{64, 128};
  int roi_feature_dim = 256;
  int fc_dim = 256;
  double conf_bg_iou = 0.25;
  double conf_fg_iou = 0.75;
  double reg_fg_iou = 0.55;
  int roi_samples = 128;
  double roi_fg_fraction = 0.5;
  // Jittered copies of each GT box added to the training RoIs.
  int roi_gt_jitter_copies = 0;
  double roi_gt_jitter_translation = 0.5;
  double roi_gt_jitter_yaw = 0.2;
  double final_nms_iou = 0.1;
  double score_threshold = 0.1;
};

struct LossConfig {
  bool use_score_loss = true;
  bool use_offset_loss = true;
  double score_gamma = 2.0;
  int score_samples = 2048;
  double fg_proposal_iou = 0.55;
  double head_smooth_l1_beta = 1.0 / 9.0;
};

struct TargetConfig {
  double weight_dims = 1.0;
  double weight_chamfer = 1.0;
  int num_matches = 2;
  int max_points = 2048;
  int similarity_points = 256;
  // Indexed by ObjectClass.
  std::array<bool, kNumClasses> mirror{true, false, true};
};

struct AugmentConfig {
  bool enabled = true;
  double flip_probability = 0.5;
  double scale_min = 0.95;
  double scale_max = 1.05;
  double rotation_max = std::numbers::pi / 4.0;
  // Pasted bank instances per class, indexed by ObjectClass.
  std::array<int, kNumClasses> gt_samples{15, 10, 10};
};

struct TrainConfig {
  double lr = 0.01;
  int epochs = 80;
  int batch_size = 16;
  // When positive, overrides the epoch-derived step count.
  int max_steps = 0;
  double weight_decay = 0.01;
  double div_factor = 10.0;
  double final_div_factor = 1e4;
  double pct_start = 0.4;
  double beta1_max = 0.95;
  double beta1_min = 0.85;
  double beta2 = 0.99;
  double grad_clip = 10.0;
  int log_every = 1;
  int checkpoint_every = 0;
  std::uint64_t seed = 0;
  bool deterministic = true;
};

struct EvalConfig {
  // Indexed by ObjectClass.
  std::array<double, kNumClasses> iou_thresholds{0.7, 0.5, 0.5};
  double export_score_threshold = 0.6;
};

struct Config {
  VoxelConfig voxel;
  BackboneConfig backbone;
  RpnConfig rpn;
  RoiPoolConfig roi;
  RpgConfig rpg;
  HeadConfig head;
  LossConfig loss;
  TargetConfig targets;
  AugmentConfig augment;
  TrainConfig train;
  EvalConfig eval;

  bool operator==(const Config& other) const;

  // Full-scale KITTI configuration.
  static Config full();
  // Desk-scale configuration used for synthetic overfit experiments.
  static Config reduced();

  // Throws ConfigError on inconsistent values.
  void validate() const;
};

// Keys missing from `text` keep their defaults; unknown keys and invalid values
// throw ConfigError.
Config parse_config(const std::string& text);
std::string serialize_config(const Config& config);
Config load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const Config& config);

// Dotted names of every configuration key, in serialization order.
std::vector<std::string> config_keys();

}  // namespace semsurf

#endif  // SEMSURF_CONFIG_H_
