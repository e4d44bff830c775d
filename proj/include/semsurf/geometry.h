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

#ifndef SEMSURF_GEOMETRY_H_
#define SEMSURF_GEOMETRY_H_

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace semsurf {

struct PointCloud;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
};

constexpr double squared_distance(const Vec3& a, const Vec3& b) {
  return (a - b).squared_norm();
}

// Wraps an angle into [-pi, pi).
double normalize_angle(double angle);

// Rotates (x, y) about the Z axis by `angle`.
Vec3 rotate_z(const Vec3& p, double angle);

// Oriented 3D box. Extents l/w/h run along the box-local X/Y/Z axes and the box
// rotates by `yaw` about world Z. Dimensions must be positive and finite; the
// yaw is wrapped into [-pi, pi) on construction.
class Box3D {
 public:
  Box3D(const Vec3& center, double length, double width, double height, double yaw);
  Box3D(double cx, double cy, double cz, double length, double width, double height,
        double yaw)
      : Box3D(Vec3{cx, cy, cz}, length, width, height, yaw) {}

  const Vec3& center() const { return center_; }
  double length() const { return length_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double yaw() const { return yaw_; }
  Vec3 dims() const { return {length_, width_, height_}; }
  double volume() const { return length_ * width_ * height_; }

  Box3D with_center(const Vec3& c) const { return {c, length_, width_, height_, yaw_}; }
  Box3D with_yaw(double yaw) const { return {center_, length_, width_, height_, yaw}; }

 private:
  Vec3 center_;
  double length_;
  double width_;
  double height_;
  double yaw_;
};

// Corner i has box-frame signs ((i & 1) ? -1 : +1, (i & 2) ? -1 : +1,
// (i & 4) ? -1 : +1) times the half extents, so corner 0 is (+l/2, +w/2, +h/2).
std::array<Vec3, 8> corners(const Box3D& box);

// The four BEV corners in counter-clockwise order.
std::array<Vec3, 4> bev_corners(const Box3D& box);

struct CanonicalPoint {
  Vec3 local;
  // Euclidean norm of the original world point.
  double depth = 0.0;
};

CanonicalPoint canonical_transform(const Vec3& p, const Box3D& box);
Vec3 to_box_frame(const Vec3& p, const Box3D& box);
Vec3 from_box_frame(const Vec3& local, const Box3D& box);

// Boundary points count as inside.
bool point_in_box(const Vec3& p, const Box3D& box);

// Area of the BEV intersection of two boxes (convex polygon clipping).
double bev_intersection_area(const Box3D& a, const Box3D& b);
double iou_bev(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

// Returns the input followed by copies reflected across the box-local XZ
// plane (canonical y negated). Features and scores are duplicated alongside.
PointCloud mirror_points(const PointCloud& points, const Box3D& box);

}  // namespace semsurf

#endif  // SEMSURF_GEOMETRY_H_
