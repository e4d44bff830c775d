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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "oracles.h"
#include "semsurf/geometry.h"
#include "semsurf/point_cloud.h"

namespace semsurf {
namespace {

constexpr double kPi = std::numbers::pi;

using Key = std::tuple<long, long, long>;

// Rounds to 1e-6 so floating sets can be compared.
Key key(const Vec3& p) {
  return {std::lround(p.x * 1e6), std::lround(p.y * 1e6), std::lround(p.z * 1e6)};
}

template <typename Range>
std::set<Key> point_set(const Range& points) {
  std::set<Key> s;
  for (const Vec3& p : points) s.insert(key(p));
  return s;
}

TEST_CASE("normalize_angle wraps into [-pi, pi)") {
  CHECK(normalize_angle(0.0) == doctest::Approx(0.0));
  CHECK(normalize_angle(kPi) == doctest::Approx(-kPi));
  CHECK(normalize_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(normalize_angle(-5 * kPi / 2) == doctest::Approx(-kPi / 2));
}

TEST_CASE("Box3D rejects bad dimensions") {
  CHECK_THROWS_AS(Box3D(0, 0, 0, 0.0, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Box3D(0, 0, 0, 1, -1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Box3D(0, 0, 0, 1, 1, NAN, 0), std::invalid_argument);
  CHECK_THROWS_AS(Box3D(INFINITY, 0, 0, 1, 1, 1, 0), std::invalid_argument);
}

TEST_CASE("corners of the unit cube") {
  const auto c = corners(Box3D(0, 0, 0, 1, 1, 1, 0));
  CHECK(c[0].x == doctest::Approx(0.5));
  CHECK(c[0].y == doctest::Approx(0.5));
  CHECK(c[0].z == doctest::Approx(0.5));
  std::set<Key> expected;
  for (double x : {-0.5, 0.5})
    for (double y : {-0.5, 0.5})
      for (double z : {-0.5, 0.5}) expected.insert(key({x, y, z}));
  CHECK(point_set(c) == expected);
}

TEST_CASE("corners are invariant as a set under a half turn") {
  const Box3D a(0, 0, 0, 2, 1, 1, 0);
  const Box3D b(0, 0, 0, 2, 1, 1, kPi);
  CHECK(point_set(corners(a)) == point_set(corners(b)));
}

TEST_CASE("corners of a rotated, translated box") {
  const auto c = corners(Box3D(1, 1, 0, 2, 2, 2, kPi / 2));
  std::set<Key> expected;
  for (double x : {0.0, 2.0})
    for (double y : {0.0, 2.0})
      for (double z : {-1.0, 1.0}) expected.insert(key({x, y, z}));
  CHECK(point_set(c) == expected);
}

TEST_CASE("point_in_box examples") {
  const Box3D cube(0, 0, 0, 1, 1, 1, 0);
  CHECK(point_in_box({0, 0, 0}, cube));
  CHECK(point_in_box({0.5, 0, 0}, cube));
  CHECK_FALSE(point_in_box({0.5001, 0, 0}, cube));

  // Rasterize the rotated box's BEV footprint at 1 mm around the query.
  const Box3D box(1, 1, 0, 2, 2, 2, kPi / 4);
  const Vec3 p{1.4, 1, 0};
  const double half_diag = std::sqrt(2.0);
  // In the box frame p sits at (0.4 cos45, -0.4 sin45); both within 1 m.
  const double lx = 0.4 * std::cos(kPi / 4);
  const double ly = -0.4 * std::sin(kPi / 4);
  CHECK(std::abs(lx) <= 1.0);
  CHECK(std::abs(ly) <= 1.0);
  CHECK(point_in_box(p, box));
  int inside = 0;
  int total = 0;
  for (int i = -1500; i <= 1500; i += 1) {
    const Vec3 q{1 + i * 1e-3, 1, 0};
    ++total;
    if (point_in_box(q, box)) ++inside;
  }
  // The horizontal chord through the center of a 2 m square turned 45 degrees
  // spans 2 * sqrt(2) m.
  CHECK(inside * 1e-3 == doctest::Approx(2 * half_diag).epsilon(2e-3));
  CHECK(total == 3001);
}

TEST_CASE("canonical_transform examples") {
  const auto a = canonical_transform({10, 6, 0}, Box3D(10, 5, 0, 1, 1, 1, kPi / 2));
  CHECK(a.local.x == doctest::Approx(1.0));
  CHECK(a.local.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.depth == doctest::Approx(std::sqrt(136.0)));

  const Box3D b(3, -2, 1, 2, 2, 2, 0.3);
  const auto at_center = canonical_transform(b.center(), b);
  CHECK(at_center.local.norm() == doctest::Approx(0.0));
  CHECK(at_center.depth == doctest::Approx(b.center().norm()));

  const auto c = canonical_transform({3, 4, 0}, Box3D(0, 0, 0, 1, 1, 1, 0));
  CHECK(c.local.x == doctest::Approx(3));
  CHECK(c.local.y == doctest::Approx(4));
  CHECK(c.depth == doctest::Approx(5));
}

TEST_CASE("canonical round trip and containment stability") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const Box3D box = oracle::random_box(rng, 30);
    const Vec3 p{u(rng), u(rng), u(rng) * 0.1};
    const Vec3 back = from_box_frame(canonical_transform(p, box).local, box);
    CHECK((back - p).norm() < 1e-6);
    CHECK(point_in_box(back, box) == point_in_box(p, box));
  }
}

TEST_CASE("IoU examples") {
  const Box3D a(0, 0, 0, 2, 2, 2, 0);
  CHECK(iou_3d(a, a) == doctest::Approx(1.0));
  CHECK(iou_bev(a, a) == doctest::Approx(1.0));
  const Box3D b(1, 0, 0, 2, 2, 2, 0);
  CHECK(iou_3d(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(iou_bev(a, b) == doctest::Approx(1.0 / 3.0));
  // Touching along a face: zero-area intersection is 0, not an error.
  const Box3D c(2, 0, 0, 2, 2, 2, 0);
  CHECK(iou_3d(a, c) == doctest::Approx(0.0));
  const Box3D far(10, 10, 0, 1, 1, 1, 0.7);
  CHECK(iou_bev(a, far) == 0.0);
  // Same footprint, disjoint heights.
  const Box3D above(0, 0, 5, 2, 2, 2, 0);
  CHECK(iou_bev(a, above) == doctest::Approx(1.0));
  CHECK(iou_3d(a, above) == 0.0);
}

TEST_CASE("IoU is symmetric and rigid-motion invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-20, 20);
  std::uniform_real_distribution<double> turn(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    const Box3D a = oracle::random_box(rng, 1.5);
    const Box3D b = oracle::random_box(rng, 1.5);
    CHECK(std::abs(iou_bev(a, b) - iou_bev(b, a)) < 1e-9);
    CHECK(std::abs(iou_3d(a, b) - iou_3d(b, a)) < 1e-9);
    const Vec3 t{shift(rng), shift(rng), shift(rng)};
    const double r = turn(rng);
    auto move = [&](const Box3D& x) {
      return Box3D(rotate_z(x.center(), r) + t, x.length(), x.width(), x.height(), x.yaw() + r);
    };
    CHECK(std::abs(iou_bev(move(a), move(b)) - iou_bev(a, b)) < 1e-6);
    CHECK(std::abs(iou_3d(move(a), move(b)) - iou_3d(a, b)) < 1e-6);
  }
}

TEST_CASE("IoU agrees with Monte-Carlo containment on random pairs") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Box3D a = oracle::random_box(rng, 1.5);
    const Box3D b = oracle::random_box(rng, 1.5);
    const auto mc = oracle::monte_carlo_iou(a, b, 100000, rng);
    CHECK(std::abs(iou_bev(a, b) - mc.bev) <= 0.01);
    CHECK(std::abs(iou_3d(a, b) - mc.full) <= 0.01);
  }
}

TEST_CASE("mirror_points reflects across the heading plane") {
  const Box3D box(4, -1, 0.5, 4, 2, 1.5, 0.6);
  PointCloud cloud;
  cloud.feature_dim = 1;
  const float intensity = 0.25F;
  cloud.push_back(from_box_frame({0.5, 0.3, 0}, box), std::span<const float>(&intensity, 1));
  const PointCloud m = mirror_points(cloud, box);
  REQUIRE(m.size() == 2);
  const Vec3 a = to_box_frame(m.coords[0], box);
  const Vec3 b = to_box_frame(m.coords[1], box);
  CHECK(a.y == doctest::Approx(0.3));
  CHECK(b.x == doctest::Approx(0.5));
  CHECK(b.y == doctest::Approx(-0.3));
  CHECK(b.z == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.features[1] == intensity);

  PointCloud on_plane;
  on_plane.push_back(from_box_frame({1.0, 0.0, 0.2}, box));
  const PointCloud p = mirror_points(on_plane, box);
  CHECK((p.coords[0] - p.coords[1]).norm() < 1e-9);

  CHECK(mirror_points(PointCloud{}, box).empty());
}

TEST_CASE("mirroring twice gives the same point set") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const Box3D box(2, 3, 0, 3, 2, 1, -1.1);
  PointCloud cloud;
  for (int i = 0; i < 40; ++i) cloud.push_back(from_box_frame({u(rng), u(rng), u(rng)}, box));
  const PointCloud once = mirror_points(cloud, box);
  const PointCloud twice = mirror_points(once, box);
  CHECK(once.size() == 80);
  CHECK(point_set(once.coords) == point_set(twice.coords));
}

}  // namespace
}  // namespace semsurf
