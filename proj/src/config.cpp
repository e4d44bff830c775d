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

#include "semsurf/config.h"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace semsurf {
namespace {

YAML::Node encode(double v) { return YAML::Node(v); }
YAML::Node encode(int v) { return YAML::Node(v); }
YAML::Node encode(bool v) { return YAML::Node(v); }
YAML::Node encode(std::uint64_t v) { return YAML::Node(v); }
YAML::Node encode(const Vec3& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.push_back(v.x);
  n.push_back(v.y);
  n.push_back(v.z);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}
template <typename T, std::size_t N>
YAML::Node encode(const std::array<T, N>& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (const T& x : v) n.push_back(x);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}
YAML::Node encode(const std::vector<ObjectClass>& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (ObjectClass c : v) n.push_back(std::string(class_name(c)));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}
YAML::Node encode(OffsetCenter v) {
  return YAML::Node(v == OffsetCenter::kGridPoint ? "grid_point" : "roi_center");
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void decode(const YAML::Node& n, const std::string& key, double& out) { out = scalar<double>(n, key); }
void decode(const YAML::Node& n, const std::string& key, int& out) { out = scalar<int>(n, key); }
void decode(const YAML::Node& n, const std::string& key, bool& out) { out = scalar<bool>(n, key); }
void decode(const YAML::Node& n, const std::string& key, std::uint64_t& out) {
  out = scalar<std::uint64_t>(n, key);
}
void decode(const YAML::Node& n, const std::string& key, Vec3& out) {
  if (!n.IsSequence() || n.size() != 3) throw ConfigError("config key '" + key + "' needs 3 values");
  out = {scalar<double>(n[0], key), scalar<double>(n[1], key), scalar<double>(n[2], key)};
}
template <typename T, std::size_t N>
void decode(const YAML::Node& n, const std::string& key, std::array<T, N>& out) {
  if (!n.IsSequence() || n.size() != N) {
    throw ConfigError("config key '" + key + "' needs " + std::to_string(N) + " values");
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = scalar<T>(n[i], key);
}
void decode(const YAML::Node& n, const std::string& key, std::vector<ObjectClass>& out) {
  if (!n.IsSequence()) throw ConfigError("config key '" + key + "' needs a list of class names");
  out.clear();
  for (const auto& item : n) {
    const auto name = scalar<std::string>(item, key);
    const auto cls = parse_class(name);
    if (!cls) throw ConfigError("config key '" + key + "': unknown class '" + name + "'");
    out.push_back(*cls);
  }
}
void decode(const YAML::Node& n, const std::string& key, OffsetCenter& out) {
  const auto v = scalar<std::string>(n, key);
  if (v == "grid_point") {
    out = OffsetCenter::kGridPoint;
  } else if (v == "roi_center") {
    out = OffsetCenter::kRoiCenter;
  } else {
    throw ConfigError("config key '" + key + "': expected grid_point or roi_center");
  }
}

std::string lower_class_name(ObjectClass cls) {
  std::string s(class_name(cls));
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <typename C, typename F>
void for_each_field(C& c, F&& f) {
  f("voxel.range_min", c.voxel.range_min);
  f("voxel.range_max", c.voxel.range_max);
  f("voxel.voxel_size", c.voxel.voxel_size);
  f("voxel.max_points_per_voxel", c.voxel.max_points_per_voxel);

  f("backbone.input_channels", c.backbone.input_channels);
  f("backbone.channels", c.backbone.channels);

  f("rpn.classes", c.rpn.classes);
  for (ObjectClass cls : kAllClasses) {
    auto& a = c.rpn.anchors[static_cast<std::size_t>(cls)];
    const std::string prefix = "rpn.anchors." + lower_class_name(cls) + ".";
    f(prefix + "size", a.size);
    f(prefix + "z_center", a.z_center);
    f(prefix + "fg_iou", a.fg_iou);
    f(prefix + "bg_iou", a.bg_iou);
  }
  f("rpn.block_channels", c.rpn.block_channels);
  f("rpn.layers_per_block", c.rpn.layers_per_block);
  f("rpn.focal_alpha", c.rpn.focal_alpha);
  f("rpn.focal_gamma", c.rpn.focal_gamma);
  f("rpn.smooth_l1_beta", c.rpn.smooth_l1_beta);
  f("rpn.train_pre_nms", c.rpn.train_pre_nms);
  f("rpn.train_post_nms", c.rpn.train_post_nms);
  f("rpn.test_pre_nms", c.rpn.test_pre_nms);
  f("rpn.test_post_nms", c.rpn.test_post_nms);
  f("rpn.nms_iou", c.rpn.nms_iou);

  f("roi.grid_size", c.roi.grid_size);
  f("roi.stage_channels", c.roi.stage_channels);
  f("roi.mlp_hidden", c.roi.mlp_hidden);
  f("roi.neighbor_radius", c.roi.neighbor_radius);
  f("roi.neighbor_samples", c.roi.neighbor_samples);

  f("rpg.use_transformer", c.rpg.use_transformer);
  f("rpg.num_heads", c.rpg.num_heads);
  f("rpg.ffn_dim", c.rpg.ffn_dim);
  f("rpg.pos_hidden", c.rpg.pos_hidden);
  f("rpg.gen_hidden", c.rpg.gen_hidden);
  f("rpg.semantic_dim", c.rpg.semantic_dim);
  f("rpg.offset_center", c.rpg.offset_center);

  f("head.spatial_dim", c.head.spatial_dim);
  f("head.sa_radii", c.head.sa_radii);
  f("head.sa_centroids", c.head.sa_centroids);
  f("head.sa_channels", c.head.sa_channels);
  f("head.roi_feature_dim", c.head.roi_feature_dim);
  f("head.fc_dim", c.head.fc_dim);
  f("head.conf_bg_iou", c.head.conf_bg_iou);
  f("head.conf_fg_iou", c.head.conf_fg_iou);
  f("head.reg_fg_iou", c.head.reg_fg_iou);
  f("head.roi_samples", c.head.roi_samples);
  f("head.roi_fg_fraction", c.head.roi_fg_fraction);
  f("head.roi_gt_jitter_copies", c.head.roi_gt_jitter_copies);
  f("head.roi_gt_jitter_translation", c.head.roi_gt_jitter_translation);
  f("head.roi_gt_jitter_yaw", c.head.roi_gt_jitter_yaw);
  f("head.final_nms_iou", c.head.final_nms_iou);
  f("head.score_threshold", c.head.score_threshold);

  f("loss.use_score_loss", c.loss.use_score_loss);
  f("loss.use_offset_loss", c.loss.use_offset_loss);
  f("loss.score_gamma", c.loss.score_gamma);
  f("loss.score_samples", c.loss.score_samples);
  f("loss.fg_proposal_iou", c.loss.fg_proposal_iou);
  f("loss.head_smooth_l1_beta", c.loss.head_smooth_l1_beta);

  f("targets.weight_dims", c.targets.weight_dims);
  f("targets.weight_chamfer", c.targets.weight_chamfer);
  f("targets.num_matches", c.targets.num_matches);
  f("targets.max_points", c.targets.max_points);
  f("targets.similarity_points", c.targets.similarity_points);
  f("targets.mirror", c.targets.mirror);

  f("augment.enabled", c.augment.enabled);
  f("augment.flip_probability", c.augment.flip_probability);
  f("augment.scale_min", c.augment.scale_min);
  f("augment.scale_max", c.augment.scale_max);
  f("augment.rotation_max", c.augment.rotation_max);
  f("augment.gt_samples", c.augment.gt_samples);

  f("train.lr", c.train.lr);
  f("train.epochs", c.train.epochs);
  f("train.batch_size", c.train.batch_size);
  f("train.max_steps", c.train.max_steps);
  f("train.weight_decay", c.train.weight_decay);
  f("train.div_factor", c.train.div_factor);
  f("train.final_div_factor", c.train.final_div_factor);
  f("train.pct_start", c.train.pct_start);
  f("train.beta1_max", c.train.beta1_max);
  f("train.beta1_min", c.train.beta1_min);
  f("train.beta2", c.train.beta2);
  f("train.grad_clip", c.train.grad_clip);
  f("train.log_every", c.train.log_every);
  f("train.checkpoint_every", c.train.checkpoint_every);
  f("train.seed", c.train.seed);
  f("train.deterministic", c.train.deterministic);

  f("eval.iou_thresholds", c.eval.iou_thresholds);
  f("eval.export_score_threshold", c.eval.export_score_threshold);
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

// Child lookup that never inserts into `root`.
YAML::Node find_node(const YAML::Node& root, const std::vector<std::string>& parts) {
  YAML::Node cur;
  cur.reset(root);
  for (const std::string& part : parts) {
    if (!cur.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& view = cur;
    const YAML::Node child = view[part];
    if (!child.IsDefined()) return YAML::Node(YAML::NodeType::Undefined);
    cur.reset(child);
  }
  return cur;
}

void collect_leaf_keys(const YAML::Node& node, const std::string& prefix,
                       std::vector<std::string>& out) {
  if (!node.IsMap()) {
    out.push_back(prefix);
    return;
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    collect_leaf_keys(kv.second, prefix.empty() ? key : prefix + "." + key, out);
  }
}

}  // namespace

GridGeometry VoxelConfig::geometry() const {
  GridGeometry g;
  g.origin = range_min;
  g.voxel_size = voxel_size;
  const Vec3 extent = range_max - range_min;
  g.shape = {static_cast<int>(std::lround(extent.x / voxel_size.x)),
             static_cast<int>(std::lround(extent.y / voxel_size.y)),
             static_cast<int>(std::lround(extent.z / voxel_size.z))};
  return g;
}

Config Config::full() { return Config{}; }

Config Config::reduced() {
  Config c;
  c.voxel.range_min = {0.0, -12.8, -3.0};
  c.voxel.range_max = {25.6, 12.8, 1.0};
  c.voxel.voxel_size = {0.2, 0.2, 0.2};
  c.backbone.channels = {8, 16, 16, 16};
  c.rpn.classes = {ObjectClass::kCar};
  c.rpn.block_channels = {32, 64};
  c.rpn.layers_per_block = 2;
  c.rpn.train_pre_nms = 256;
  c.rpn.train_post_nms = 64;
  c.rpn.test_pre_nms = 256;
  c.rpn.test_post_nms = 32;
  c.roi.grid_size = 4;
  c.head.sa_centroids = {32, 8};
  c.head.roi_samples = 16;
  c.head.roi_gt_jitter_copies = 2;
  c.loss.score_samples = 512;
  c.targets.max_points = 512;
  c.augment.enabled = false;
  c.train.batch_size = 4;
  c.train.lr = 0.003;
  c.train.max_steps = 1000;
  return c;
}

bool Config::operator==(const Config& other) const {
  return serialize_config(*this) == serialize_config(other);
}

void Config::validate() const {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(voxel.voxel_size.x > 0 && voxel.voxel_size.y > 0 && voxel.voxel_size.z > 0,
          "voxel.voxel_size must be positive");
  require(voxel.range_max.x > voxel.range_min.x && voxel.range_max.y > voxel.range_min.y &&
              voxel.range_max.z > voxel.range_min.z,
          "voxel range must be non-empty");
  for (int c : backbone.channels) require(c > 0, "backbone.channels must be positive");
  require(backbone.input_channels == 4, "backbone.input_channels must be 4 (offset + intensity)");
  require(!rpn.classes.empty(), "rpn.classes must not be empty");
  for (const auto& a : rpn.anchors) {
    require(0.0 <= a.bg_iou && a.bg_iou < a.fg_iou && a.fg_iou <= 1.0,
            "anchor thresholds need 0 <= bg < fg <= 1");
    require(a.size.x > 0 && a.size.y > 0 && a.size.z > 0, "anchor sizes must be positive");
  }
  require(rpn.nms_iou > 0.0 && rpn.nms_iou <= 1.0, "rpn.nms_iou must be in (0, 1]");
  require(roi.grid_size >= 1, "roi.grid_size must be >= 1");
  require(roi.neighbor_radius >= 0 && roi.neighbor_samples >= 1, "roi neighbor query settings");
  require(rpg.num_heads >= 1 && (3 * roi.stage_channels) % rpg.num_heads == 0,
          "rpg.num_heads must divide the grid feature width");
  require(head.conf_fg_iou > head.conf_bg_iou, "head.conf_fg_iou must exceed head.conf_bg_iou");
  require(head.sa_centroids[0] >= 1 && head.sa_centroids[1] >= 1, "head.sa_centroids >= 1");
  require(loss.score_samples >= 1, "loss.score_samples >= 1");
  require(targets.max_points >= 2, "targets.max_points >= 2");
  require(train.batch_size >= 1, "train.batch_size >= 1");
  require(train.lr > 0.0, "train.lr > 0");
}

Config parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Config config;
  if (!root || root.IsNull()) return config;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");

  std::set<std::string> known;
  for_each_field(config, [&](const std::string& key, auto& field) {
    known.insert(key);
    const YAML::Node node = find_node(root, split_key(key));
    if (node) decode(node, key, field);
  });
  std::vector<std::string> present;
  collect_leaf_keys(root, "", present);
  for (const auto& key : present) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  config.validate();
  return config;
}

std::string serialize_config(const Config& config) {
  YAML::Node root(YAML::NodeType::Map);
  for_each_field(config, [&](const std::string& key, const auto& field) {
    const auto parts = split_key(key);
    YAML::Node cur;
    cur.reset(root);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!cur[parts[i]].IsMap()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      YAML::Node child = cur[parts[i]];
      cur.reset(child);
    }
    cur[parts.back()] = encode(field);
  });
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const std::filesystem::path& path, const Config& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << serialize_config(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  Config c;
  for_each_field(c, [&](const std::string& key, auto&) { keys.push_back(key); });
  return keys;
}

}  // namespace semsurf
