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

#include "semsurf/kitti_io.h"

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace semsurf {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t kRecordBytes = 16;

float load_le_float(const unsigned char* bytes) {
  const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                             (static_cast<std::uint32_t>(bytes[1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_le_float(float value, unsigned char* bytes) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFU);
}

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::vector<double> parse_numbers(std::istringstream& is) {
  std::vector<double> values;
  double v = 0.0;
  while (is >> v) values.push_back(v);
  return values;
}

}  // namespace

Calibration Calibration::axis_swap() {
  Calibration c;
  c.velo_to_cam << 0, -1, 0, 0,  //
      0, 0, -1, 0,               //
      1, 0, 0, 0;
  return c;
}

Eigen::Vector3d Calibration::lidar_to_rect(const Eigen::Vector3d& p) const {
  return r0_rect * (velo_to_cam.leftCols<3>() * p + velo_to_cam.col(3));
}

Eigen::Vector3d Calibration::rect_to_lidar(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d cam = r0_rect.inverse() * p;
  return velo_to_cam.leftCols<3>().inverse() * (cam - velo_to_cam.col(3));
}

Calibration read_calibration(const fs::path& path) {
  std::ifstream in = open_text(path);
  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::istringstream is(line.substr(colon + 1));
    entries[line.substr(0, colon)] = parse_numbers(is);
  }
  Calibration calib;
  const auto r0 = entries.find("R0_rect");
  const auto tr = entries.find("Tr_velo_to_cam");
  if (r0 == entries.end() || r0->second.size() != 9) {
    throw FormatError(path.string() + ": missing or malformed R0_rect");
  }
  if (tr == entries.end() || tr->second.size() != 12) {
    throw FormatError(path.string() + ": missing or malformed Tr_velo_to_cam");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) calib.r0_rect(r, c) = r0->second[static_cast<std::size_t>(r * 3 + c)];
    for (int c = 0; c < 4; ++c) {
      calib.velo_to_cam(r, c) = tr->second[static_cast<std::size_t>(r * 4 + c)];
    }
  }
  return calib;
}

void write_calibration(const fs::path& path, const Calibration& calib) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << std::setprecision(12);
  // Projection matrices are not used by this project; identity-like stubs
  // keep the file loadable by standard tooling.
  for (int i = 0; i < 4; ++i) {
    out << "P" << i << ": 1 0 0 0 0 1 0 0 0 0 1 0\n";
  }
  out << "R0_rect:";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << ' ' << calib.r0_rect(r, c);
  }
  out << "\nTr_velo_to_cam:";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) out << ' ' << calib.velo_to_cam(r, c);
  }
  out << "\nTr_imu_to_velo: 1 0 0 0 0 1 0 0 0 0 1 0\n";
}

PointCloud read_velodyne(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % kRecordBytes != 0) {
    throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                      " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.feature_dim = 1;
  const std::size_t n = bytes.size() / kRecordBytes;
  cloud.coords.reserve(n);
  cloud.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = bytes.data() + i * kRecordBytes;
    cloud.coords.push_back({load_le_float(rec), load_le_float(rec + 4), load_le_float(rec + 8)});
    cloud.features.push_back(load_le_float(rec + 12));
  }
  return cloud;
}

void write_velodyne(const fs::path& path, const PointCloud& cloud) {
  std::vector<unsigned char> bytes(cloud.size() * kRecordBytes);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    unsigned char* rec = bytes.data() + i * kRecordBytes;
    const Vec3& p = cloud.coords[i];
    store_le_float(static_cast<float>(p.x), rec);
    store_le_float(static_cast<float>(p.y), rec + 4);
    store_le_float(static_cast<float>(p.z), rec + 8);
    store_le_float(cloud.feature_dim > 0 ? cloud.feature_row(i)[0] : 0.0F, rec + 12);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

KittiLabel parse_label_line(const std::string& line) {
  std::istringstream is(line);
  KittiLabel label;
  if (!(is >> label.type)) throw FormatError("empty label line: '" + line + "'");
  const std::vector<double> v = parse_numbers(is);
  if ((v.size() != 14 && v.size() != 15) || !is.eof()) {
    throw FormatError("malformed label line: '" + line + "'");
  }
  label.truncated = v[0];
  label.occluded = static_cast<int>(v[1]);
  label.alpha = v[2];
  label.bbox = {v[3], v[4], v[5], v[6]};
  label.h = v[7];
  label.w = v[8];
  label.l = v[9];
  label.location = {v[10], v[11], v[12]};
  label.rotation_y = v[13];
  if (v.size() == 15) label.score = v[14];
  return label;
}

std::string format_label_line(const KittiLabel& label) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << label.type << ' ' << label.truncated << ' ' << label.occluded << ' ' << label.alpha;
  for (double b : label.bbox) os << ' ' << b;
  os << std::setprecision(6) << ' ' << label.h << ' ' << label.w << ' ' << label.l << ' '
     << label.location.x() << ' ' << label.location.y() << ' ' << label.location.z() << ' '
     << label.rotation_y;
  if (label.score) os << ' ' << *label.score;
  return os.str();
}

std::optional<Difficulty> kitti_difficulty(const KittiLabel& label) {
  const double height = label.bbox[3] - label.bbox[1];
  if (height >= 40.0 && label.occluded <= 0 && label.truncated <= 0.15) return Difficulty::kEasy;
  if (height >= 25.0 && label.occluded <= 1 && label.truncated <= 0.30) {
    return Difficulty::kModerate;
  }
  if (height >= 25.0 && label.occluded <= 2 && label.truncated <= 0.50) return Difficulty::kHard;
  return std::nullopt;
}

Box3D label_to_lidar_box(const KittiLabel& label, const Calibration& calib) {
  // Camera y points down, so the geometric center sits h/2 above the bottom.
  const Eigen::Vector3d center_rect = label.location - Eigen::Vector3d(0.0, label.h * 0.5, 0.0);
  const Eigen::Vector3d c = calib.rect_to_lidar(center_rect);
  return Box3D({c.x(), c.y(), c.z()}, label.l, label.w, label.h,
               -label.rotation_y - std::numbers::pi / 2.0);
}

KittiLabel lidar_box_to_label(const Box3D& box, ObjectClass cls, const Calibration& calib,
                              std::optional<double> score) {
  KittiLabel label;
  label.type = std::string(class_name(cls));
  label.h = box.height();
  label.w = box.width();
  label.l = box.length();
  const Vec3& c = box.center();
  label.location = calib.lidar_to_rect({c.x, c.y, c.z}) + Eigen::Vector3d(0.0, box.height() * 0.5, 0.0);
  label.rotation_y = normalize_angle(-box.yaw() - std::numbers::pi / 2.0);
  label.alpha = normalize_angle(label.rotation_y - std::atan2(label.location.x(), label.location.z()));
  label.score = score;
  return label;
}

Scene read_kitti_frame(const fs::path& velodyne_path, const fs::path& label_path,
                       const fs::path& calib_path) {
  Scene scene;
  scene.frame_id = velodyne_path.stem().string();
  scene.cloud = read_velodyne(velodyne_path);
  if (label_path.empty()) return scene;
  const Calibration calib = read_calibration(calib_path);
  std::ifstream in = open_text(label_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    KittiLabel label;
    try {
      label = parse_label_line(line);
    } catch (const FormatError& e) {
      throw FormatError(label_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto cls = parse_class(label.type);
    if (!cls) continue;
    GroundTruth gt{label_to_lidar_box(label, calib), *cls, std::nullopt, -1};
    const bool has_2d_box = label.bbox != std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
    if (has_2d_box) gt.difficulty = kitti_difficulty(label);
    scene.objects.push_back(gt);
  }
  return scene;
}

fs::path KittiLayout::velodyne(const std::string& id) const { return root / "velodyne" / (id + ".bin"); }
fs::path KittiLayout::label(const std::string& id) const { return root / "label_2" / (id + ".txt"); }
fs::path KittiLayout::calib(const std::string& id) const { return root / "calib" / (id + ".txt"); }
fs::path KittiLayout::split(const std::string& name) const {
  return root / "ImageSets" / (name + ".txt");
}

std::vector<std::string> read_split(const fs::path& path) {
  std::ifstream in = open_text(path);
  std::vector<std::string> ids;
  std::string id;
  while (in >> id) ids.push_back(id);
  return ids;
}

void write_split(const fs::path& path, const std::vector<std::string>& ids) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

Scene read_frame(const KittiLayout& layout, const std::string& id) {
  const fs::path label = layout.label(id);
  Scene scene = read_kitti_frame(layout.velodyne(id), fs::exists(label) ? label : fs::path{},
                                 layout.calib(id));
  scene.frame_id = id;
  return scene;
}

void write_frame(const KittiLayout& layout, const Scene& scene, const Calibration& calib) {
  for (const char* sub : {"velodyne", "label_2", "calib"}) {
    fs::create_directories(layout.root / sub);
  }
  write_velodyne(layout.velodyne(scene.frame_id), scene.cloud);
  write_calibration(layout.calib(scene.frame_id), calib);
  std::ofstream out(layout.label(scene.frame_id));
  if (!out) throw FormatError("cannot write " + layout.label(scene.frame_id).string());
  for (const GroundTruth& gt : scene.objects) {
    out << format_label_line(lidar_box_to_label(gt.box, gt.cls, calib)) << '\n';
  }
}

}  // namespace semsurf
