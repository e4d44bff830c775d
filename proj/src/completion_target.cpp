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

#include "semsurf/completion_target.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <json.hpp>

#include "semsurf/kitti_io.h"
#include "semsurf/pointcloud_ops.h"

namespace semsurf {
namespace fs = std::filesystem;
namespace {

std::vector<Vec3> subsample(const std::vector<Vec3>& points, int max_points) {
  if (points.empty() || static_cast<int>(points.size()) <= max_points) return points;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(max_points));
  for (int i : farthest_point_sampling(points, max_points, 0)) {
    out.push_back(points[static_cast<std::size_t>(i)]);
  }
  return out;
}

double similarity_from_clouds(const BankInstance& a, const std::vector<Vec3>& cloud_a,
                              const BankInstance& b, const std::vector<Vec3>& cloud_b,
                              const TargetConfig& config) {
  const double dims = (a.box.dims() - b.box.dims()).norm();
  return config.weight_dims * dims + config.weight_chamfer * chamfer_distance(cloud_a, cloud_b).value;
}

std::vector<InstanceMatch> rank_matches(const InstanceBank& bank, int instance_id,
                                        const std::vector<std::vector<Vec3>>& clouds,
                                        const TargetConfig& config) {
  const BankInstance& self = bank.at(instance_id);
  std::vector<InstanceMatch> matches;
  for (const BankInstance& other : bank.instances()) {
    if (other.id == instance_id || other.cls != self.cls) continue;
    matches.push_back({other.id, similarity_from_clouds(
                                     self, clouds[static_cast<std::size_t>(instance_id)], other,
                                     clouds[static_cast<std::size_t>(other.id)], config)});
  }
  std::sort(matches.begin(), matches.end(), [](const InstanceMatch& x, const InstanceMatch& y) {
    return x.score != y.score ? x.score < y.score : x.id < y.id;
  });
  if (static_cast<int>(matches.size()) > config.num_matches) {
    matches.resize(static_cast<std::size_t>(std::max(config.num_matches, 0)));
  }
  return matches;
}

std::vector<std::vector<Vec3>> similarity_clouds(const InstanceBank& bank,
                                                 const TargetConfig& config) {
  std::vector<std::vector<Vec3>> clouds;
  clouds.reserve(bank.size());
  for (const BankInstance& inst : bank.instances()) {
    clouds.push_back(subsample(inst.normalized, config.similarity_points));
  }
  return clouds;
}

// Normalized-frame target from a ranked match list.
std::vector<Vec3> merge_normalized(const InstanceBank& bank, int instance_id,
                                   const std::vector<InstanceMatch>& matches,
                                   const TargetConfig& config) {
  const BankInstance& self = bank.at(instance_id);
  std::vector<Vec3> merged = self.normalized;
  for (const InstanceMatch& m : matches) {
    const auto& pts = bank.at(m.id).normalized;
    merged.insert(merged.end(), pts.begin(), pts.end());
  }
  const bool mirror = config.mirror[static_cast<std::size_t>(self.cls)];
  if (!mirror) return subsample(merged, config.max_points);
  std::vector<Vec3> half = subsample(merged, config.max_points / 2);
  const std::size_t n = half.size();
  half.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) half.push_back({half[i].x, -half[i].y, half[i].z});
  return half;
}

void write_points(const fs::path& path, const std::vector<Vec3>& points) {
  std::vector<unsigned char> bytes(points.size() * 12);
  std::size_t o = 0;
  for (const Vec3& p : points) {
    for (double v : {p.x, p.y, p.z}) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) bytes[o++] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFFU);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<Vec3> read_points(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 12 != 0) throw FormatError(path.string() + ": truncated point record");
  std::vector<Vec3> points(bytes.size() / 12);
  for (std::size_t i = 0; i < points.size(); ++i) {
    float xyz[3];
    for (int k = 0; k < 3; ++k) {
      const unsigned char* b = bytes.data() + i * 12 + static_cast<std::size_t>(k) * 4;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                 (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      xyz[k] = std::bit_cast<float>(bits);
    }
    points[i] = {xyz[0], xyz[1], xyz[2]};
  }
  return points;
}

}  // namespace

double instance_similarity(const BankInstance& a, const BankInstance& b,
                           const TargetConfig& config) {
  return similarity_from_clouds(a, subsample(a.normalized, config.similarity_points), b,
                                subsample(b.normalized, config.similarity_points), config);
}

std::vector<InstanceMatch> best_matches(const InstanceBank& bank, int instance_id,
                                        const TargetConfig& config) {
  return rank_matches(bank, instance_id, similarity_clouds(bank, config), config);
}

CompletionTarget build_completion_target(const InstanceBank& bank, int instance_id,
                                         const TargetConfig& config) {
  const auto matches = best_matches(bank, instance_id, config);
  CompletionTarget target;
  target.instance_id = instance_id;
  target.source_ids.push_back(instance_id);
  for (const InstanceMatch& m : matches) target.source_ids.push_back(m.id);
  target.points = denormalize_from_box(merge_normalized(bank, instance_id, matches, config),
                                       bank.at(instance_id).box);
  return target;
}

TargetBank TargetBank::build(const InstanceBank& bank, const TargetConfig& config) {
  const auto clouds = similarity_clouds(bank, config);
  TargetBank targets;
  for (const BankInstance& inst : bank.instances()) {
    const auto matches = rank_matches(bank, inst.id, clouds, config);
    std::vector<int> sources{inst.id};
    for (const InstanceMatch& m : matches) sources.push_back(m.id);
    targets.set(inst.id, merge_normalized(bank, inst.id, matches, config), std::move(sources));
  }
  return targets;
}

std::vector<Vec3> TargetBank::posed(int instance_id, const Box3D& box, bool flipped) const {
  return denormalize_from_box(normalized(instance_id), box, flipped);
}

void TargetBank::set(int instance_id, std::vector<Vec3> normalized, std::vector<int> sources) {
  const auto idx = static_cast<std::size_t>(instance_id);
  if (normalized_.size() <= idx) {
    normalized_.resize(idx + 1);
    sources_.resize(idx + 1);
  }
  normalized_[idx] = std::move(normalized);
  sources_[idx] = std::move(sources);
}

void save_bank(const fs::path& dir, const InstanceBank& bank, const TargetBank& targets) {
  fs::create_directories(dir / "instances");
  fs::create_directories(dir / "targets");
  nlohmann::json index;
  index["version"] = 1;
  index["instances"] = nlohmann::json::array();
  for (const BankInstance& inst : bank.instances()) {
    const Box3D& b = inst.box;
    nlohmann::json rec;
    rec["id"] = inst.id;
    rec["class"] = std::string(class_name(inst.cls));
    rec["frame_id"] = inst.frame_id;
    rec["object_index"] = inst.object_index;
    rec["box"] = {b.center().x, b.center().y, b.center().z, b.length(), b.width(), b.height(), b.yaw()};
    rec["num_points"] = inst.normalized.size();
    const std::string name = std::to_string(inst.id) + ".bin";
    write_points(dir / "instances" / name, inst.normalized);
    if (targets.contains(inst.id)) {
      rec["target_points"] = targets.normalized(inst.id).size();
      rec["target_sources"] = targets.sources(inst.id);
      write_points(dir / "targets" / name, targets.normalized(inst.id));
    }
    index["instances"].push_back(rec);
  }
  std::ofstream out(dir / "index.json");
  if (!out) throw FormatError("cannot write " + (dir / "index.json").string());
  out << index.dump(2) << '\n';
}

std::pair<InstanceBank, TargetBank> load_bank(const fs::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw FormatError("cannot open " + (dir / "index.json").string());
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "index.json").string() + ": " + e.what());
  }
  InstanceBank bank;
  TargetBank targets;
  for (const auto& rec : index.at("instances")) {
    const auto cls = parse_class(rec.at("class").get<std::string>());
    if (!cls) throw FormatError("bank index: unknown class");
    const auto b = rec.at("box").get<std::vector<double>>();
    if (b.size() != 7) throw FormatError("bank index: box needs 7 values");
    const Box3D box({b[0], b[1], b[2]}, b[3], b[4], b[5], b[6]);
    const std::string name = std::to_string(rec.at("id").get<int>()) + ".bin";
    const int id = bank.add_normalized(*cls, box, read_points(dir / "instances" / name),
                                       rec.at("frame_id").get<std::string>(),
                                       rec.at("object_index").get<int>());
    if (rec.contains("target_points")) {
      targets.set(id, read_points(dir / "targets" / name),
                  rec.at("target_sources").get<std::vector<int>>());
    }
  }
  return {std::move(bank), std::move(targets)};
}

}  // namespace semsurf
