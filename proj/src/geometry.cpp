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

#include "semsurf/geometry.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "semsurf/point_cloud.h"

namespace semsurf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClipEpsilon = 1e-9;

struct Point2 {
  double x;
  double y;
};

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Intersection of segment p-q with the infinite line a-b.
Point2 line_intersection(const Point2& p, const Point2& q, const Point2& a, const Point2& b) {
  const double dp = cross(a, b, p);
  const double dq = cross(a, b, q);
  const double t = dp / (dp - dq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

double polygon_area(const std::vector<Point2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - a.y * b.x;
  }
  return std::abs(twice) * 0.5;
}

std::vector<Point2> to_polygon(const Box3D& box) {
  std::vector<Point2> poly;
  poly.reserve(4);
  for (const Vec3& c : bev_corners(box)) poly.push_back({c.x, c.y});
  return poly;
}

// Sutherland-Hodgman clipping of `subject` by the convex CCW polygon `clip`.
std::vector<Point2> clip_convex(std::vector<Point2> subject, const std::vector<Point2>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    std::vector<Point2> out;
    out.reserve(subject.size() + 2);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2& cur = subject[i];
      const Point2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const bool cur_in = cross(a, b, cur) >= -kClipEpsilon;
      const bool prev_in = cross(a, b, prev) >= -kClipEpsilon;
      if (cur_in) {
        if (!prev_in) out.push_back(line_intersection(prev, cur, a, b));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(line_intersection(prev, cur, a, b));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace

double normalize_angle(double angle) {
  // In-range angles pass through untouched so wrapping is idempotent.
  if (angle >= -kPi && angle < kPi) return angle;
  double wrapped = std::fmod(angle + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  wrapped -= kPi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (wrapped >= kPi) wrapped -= 2.0 * kPi;
  return wrapped;
}

Vec3 rotate_z(const Vec3& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

Box3D::Box3D(const Vec3& center, double length, double width, double height, double yaw)
    : center_(center), length_(length), width_(width), height_(height) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(length) || !positive(width) || !positive(height)) {
    throw std::invalid_argument("Box3D dimensions must be positive and finite, got (" +
                                std::to_string(length) + ", " + std::to_string(width) + ", " +
                                std::to_string(height) + ")");
  }
  if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z) ||
      !std::isfinite(yaw)) {
    throw std::invalid_argument("Box3D center and yaw must be finite");
  }
  yaw_ = normalize_angle(yaw);
}

std::array<Vec3, 8> corners(const Box3D& box) {
  std::array<Vec3, 8> out;
  const Vec3 half = box.dims() * 0.5;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local{(i & 1) ? -half.x : half.x, (i & 2) ? -half.y : half.y,
                     (i & 4) ? -half.z : half.z};
    out[i] = from_box_frame(local, box);
  }
  return out;
}

std::array<Vec3, 4> bev_corners(const Box3D& box) {
  const double hl = box.length() * 0.5;
  const double hw = box.width() * 0.5;
  const std::array<Vec3, 4> local{{{hl, hw, 0.0}, {-hl, hw, 0.0}, {-hl, -hw, 0.0}, {hl, -hw, 0.0}}};
  std::array<Vec3, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = rotate_z(local[i], box.yaw()) + Vec3{box.center().x, box.center().y, 0.0};
  }
  return out;
}

Vec3 to_box_frame(const Vec3& p, const Box3D& box) {
  return rotate_z(p - box.center(), -box.yaw());
}

Vec3 from_box_frame(const Vec3& local, const Box3D& box) {
  return rotate_z(local, box.yaw()) + box.center();
}

CanonicalPoint canonical_transform(const Vec3& p, const Box3D& box) {
  return {to_box_frame(p, box), p.norm()};
}

bool point_in_box(const Vec3& p, const Box3D& box) {
  const Vec3 local = to_box_frame(p, box);
  return std::abs(local.x) <= box.length() * 0.5 && std::abs(local.y) <= box.width() * 0.5 &&
         std::abs(local.z) <= box.height() * 0.5;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const std::vector<Point2> clipped = clip_convex(to_polygon(a), to_polygon(b));
  return polygon_area(clipped);
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.length() * a.width() + b.length() * b.width() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double z_lo = std::max(a.center().z - a.height() * 0.5, b.center().z - b.height() * 0.5);
  const double z_hi = std::min(a.center().z + a.height() * 0.5, b.center().z + b.height() * 0.5);
  const double z_overlap = z_hi - z_lo;
  if (z_overlap <= 0.0) return 0.0;
  const double inter_area = bev_intersection_area(a, b);
  if (inter_area <= 0.0) return 0.0;
  const double inter = inter_area * z_overlap;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

PointCloud mirror_points(const PointCloud& points, const Box3D& box) {
  PointCloud out = points;
  out.coords.reserve(points.size() * 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec3 local = to_box_frame(points.coords[i], box);
    local.y = -local.y;
    out.coords.push_back(from_box_frame(local, box));
  }
  out.features.insert(out.features.end(), points.features.begin(), points.features.end());
  out.scores.insert(out.scores.end(), points.scores.begin(), points.scores.end());
  return out;
}

}  // namespace semsurf
