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

#ifndef SEMSURF_KITTI_IO_H_
#define SEMSURF_KITTI_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semsurf/scene.h"

namespace semsurf {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rectification and LiDAR-to-camera transforms from a KITTI calib file.
struct Calibration {
  Eigen::Matrix3d r0_rect = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 3, 4> velo_to_cam;

  // KITTI axis convention with no extra rotation: cam = (-y, -z, x).
  static Calibration axis_swap();

  Eigen::Vector3d lidar_to_rect(const Eigen::Vector3d& p) const;
  Eigen::Vector3d rect_to_lidar(const Eigen::Vector3d& p) const;
};

Calibration read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const Calibration& calib);

// Consecutive little-endian float32 (x, y, z, intensity) records.
PointCloud read_velodyne(const std::filesystem::path& path);
void write_velodyne(const std::filesystem::path& path, const PointCloud& cloud);

// One KITTI label line in camera coordinates.
struct KittiLabel {
  std::string type;
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  std::array<double, 4> bbox{0.0, 0.0, 0.0, 0.0};
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;
  Eigen::Vector3d location = Eigen::Vector3d::Zero();  // bottom center, rect camera frame
  double rotation_y = 0.0;
  std::optional<double> score;
};

KittiLabel parse_label_line(const std::string& line);
std::string format_label_line(const KittiLabel& label);

// Difficulty from 2D box height, occlusion and truncation; nullopt when the
// object is too hard for every level.
std::optional<Difficulty> kitti_difficulty(const KittiLabel& label);

Box3D label_to_lidar_box(const KittiLabel& label, const Calibration& calib);
KittiLabel lidar_box_to_label(const Box3D& box, ObjectClass cls, const Calibration& calib,
                              std::optional<double> score = std::nullopt);

// Reads a frame; labels of types other than Car/Pedestrian/Cyclist (including
// DontCare) are skipped. An empty label path yields a scene without objects.
Scene read_kitti_frame(const std::filesystem::path& velodyne_path,
                       const std::filesystem::path& label_path,
                       const std::filesystem::path& calib_path);

// Standard directory layout rooted at `root`: velodyne/, label_2/, calib/,
// ImageSets/.
struct KittiLayout {
  std::filesystem::path root;

  std::filesystem::path velodyne(const std::string& id) const;
  std::filesystem::path label(const std::string& id) const;
  std::filesystem::path calib(const std::string& id) const;
  std::filesystem::path split(const std::string& name) const;
};

std::vector<std::string> read_split(const std::filesystem::path& path);
void write_split(const std::filesystem::path& path, const std::vector<std::string>& ids);

Scene read_frame(const KittiLayout& layout, const std::string& id);
// Writes the points, labels and (axis-swap) calibration of a scene.
void write_frame(const KittiLayout& layout, const Scene& scene,
                 const Calibration& calib = Calibration::axis_swap());

}  // namespace semsurf

#endif  // SEMSURF_KITTI_IO_H_
