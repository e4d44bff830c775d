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
#include <map>
#include <random>
#include <tuple>

#include "doctest.h"
#include "oracles.h"
#include "semsurf/config.h"
#include "semsurf/point_cloud.h"
#include "semsurf/pointcloud_ops.h"

namespace semsurf {
namespace {

PointCloud with_intensity(const std::vector<Vec3>& coords, float intensity) {
  PointCloud cloud;
  cloud.feature_dim = 1;
  for (const Vec3& p : coords) cloud.push_back(p, std::span<const float>(&intensity, 1));
  return cloud;
}

std::map<std::tuple<int, int, int>, std::vector<float>> as_map(const SparseVoxelGrid& grid) {
  std::map<std::tuple<int, int, int>, std::vector<float>> m;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const VoxelIndex& v = grid.layout().indices()[r];
    const auto f = grid.feature(r);
    m[{v.x, v.y, v.z}] = std::vector<float>(f.begin(), f.end());
  }
  return m;
}

TEST_CASE("PointCloud validation") {
  PointCloud cloud;
  cloud.push_back({0, 0, 0});
  CHECK_NOTHROW(cloud.validate());
  cloud.coords.push_back({NAN, 0, 0});
  CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
  PointCloud wrong;
  wrong.feature_dim = 2;
  wrong.coords = {{0, 0, 0}};
  wrong.features = {1.0F};
  CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
  PointCloud scores;
  scores.coords = {{0, 0, 0}, {1, 1, 1}};
  scores.scores = {0.5F};
  CHECK_THROWS_AS(scores.validate(), std::invalid_argument);
}

TEST_CASE("voxelize indexes points with the full-scale lattice") {
  const GridGeometry g = Config::full().voxel.geometry();
  CHECK(g.shape == std::array<int, 3>{1408, 1600, 40});
  const auto grid = voxelize(with_intensity({{0.07, 0.02, -2.95}}, 0.3F), g, 5);
  REQUIRE(grid.size() == 1);
  CHECK(grid.layout().indices()[0] == VoxelIndex{1, 800, 0});
  CHECK(grid.stage_id() == 0);
}

TEST_CASE("voxelize drops points on the range maximum") {
  GridGeometry g;
  g.origin = {0, 0, 0};
  g.voxel_size = {1, 1, 1};
  g.shape = {4, 4, 4};
  const auto grid = voxelize(with_intensity({{4, 1, 1}, {1, 4, 1}, {1, 1, 4}, {-0.01, 1, 1}}, 0), g, 5);
  CHECK(grid.size() == 0);
  CHECK(voxelize(PointCloud{}, g, 5).size() == 0);
}

TEST_CASE("voxelize averages member points") {
  GridGeometry g;
  g.origin = {0, 0, 0};
  g.voxel_size = {1, 1, 1};
  g.shape = {2, 2, 2};
  PointCloud cloud;
  cloud.feature_dim = 1;
  const float i0 = 0.2F;
  const float i1 = 0.6F;
  cloud.push_back({0.25, 0.5, 0.5}, std::span<const float>(&i0, 1));
  cloud.push_back({0.75, 0.25, 0.5}, std::span<const float>(&i1, 1));
  const auto grid = voxelize(cloud, g, 5);
  REQUIRE(grid.size() == 1);
  const auto f = grid.feature(0);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == doctest::Approx(-0.125));
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(f[3] == doctest::Approx(0.4));

  // Only the first point counts when the cap is 1.
  const auto capped = voxelize(cloud, g, 1);
  CHECK(capped.feature(0)[0] == doctest::Approx(-0.25));
  CHECK(capped.feature(0)[3] == doctest::Approx(0.2));
}

TEST_CASE("voxelize is permutation invariant without truncation") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 3.999);
  GridGeometry g;
  g.origin = {0, 0, 0};
  g.voxel_size = {0.5, 0.5, 0.5};
  g.shape = {8, 8, 8};
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  const auto a = voxelize(with_intensity(pts, 0.1F), g, 0);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = voxelize(with_intensity(pts, 0.1F), g, 0);
  CHECK(as_map(a) == as_map(b));
}

TEST_CASE("neighbor_voxel_query examples") {
  GridGeometry g;
  g.voxel_size = {1, 1, 1};
  g.shape = {10, 10, 10};
  std::vector<VoxelIndex> block;
  for (int x = 3; x <= 5; ++x)
    for (int y = 3; y <= 5; ++y)
      for (int z = 3; z <= 5; ++z) block.push_back({x, y, z});
  const VoxelLayout dense(g, block);
  const int center = dense.find({4, 4, 4});
  CHECK(neighbor_voxel_query(dense, {4, 4, 4}, 0, 16, 1) == std::vector<int>{center});
  CHECK(neighbor_voxel_query(dense, {4, 4, 4}, 1, 27, 1).size() == 7);
  CHECK(neighbor_voxel_query(dense, {4, 4, 4}, 3, 27, 1).size() == 27);

  const VoxelLayout single(g, {{1, 1, 1}});
  CHECK(neighbor_voxel_query(single, {1, 1, 1}, 1, 16, 0) == std::vector<int>{0});
  CHECK(neighbor_voxel_query(single, {7, 7, 7}, 2, 16, 0).empty());

  CHECK_THROWS_AS(neighbor_voxel_query(single, {1, 1, 1}, -1, 16, 0), std::invalid_argument);
  CHECK_THROWS_AS(neighbor_voxel_query(single, {1, 1, 1}, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("neighbor_voxel_query subsamples deterministically") {
  GridGeometry g;
  g.voxel_size = {1, 1, 1};
  g.shape = {10, 10, 10};
  std::vector<VoxelIndex> all;
  for (int x = 0; x < 10; ++x)
    for (int y = 0; y < 10; ++y)
      for (int z = 0; z < 10; ++z) all.push_back({x, y, z});
  const VoxelLayout layout(g, all);
  const auto a = neighbor_voxel_query(layout, {5, 5, 5}, 2, 16, 42);
  const auto b = neighbor_voxel_query(layout, {5, 5, 5}, 2, 16, 42);
  CHECK(a.size() == 16);
  CHECK(a == b);
  for (int row : a) {
    const VoxelIndex v = layout.indices()[static_cast<std::size_t>(row)];
    CHECK(std::abs(v.x - 5) + std::abs(v.y - 5) + std::abs(v.z - 5) <= 2);
  }
}

TEST_CASE("farthest_point_sampling examples") {
  const std::vector<Vec3> line{{0, 0, 0}, {0.1, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK(farthest_point_sampling(line, 2, 0) == std::vector<int>{0, 3});
  CHECK(farthest_point_sampling(line, 4, 2) == std::vector<int>{0, 1, 2, 3});
  CHECK(farthest_point_sampling(line, 9, 2).size() == 4);
  CHECK(farthest_point_sampling(line, 1, 2) == std::vector<int>{2});
  CHECK_THROWS_AS(farthest_point_sampling(line, 0, 0), std::invalid_argument);

  // Ties go to the lowest index.
  const std::vector<Vec3> sym{{0, 0, 0}, {-1, 0, 0}, {1, 0, 0}};
  CHECK(farthest_point_sampling(sym, 2, 0) == std::vector<int>{0, 1});
}

TEST_CASE("farthest_point_sampling matches the brute-force oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> size(1, 64);
  for (int t = 0; t < 100; ++t) {
    const int n = size(rng);
    std::vector<Vec3> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const int start = std::uniform_int_distribution<int>(0, n - 1)(rng);
    CHECK(farthest_point_sampling(pts, k, start) == oracle::farthest_point_sampling(pts, k, start));
  }
}

TEST_CASE("chamfer_distance examples") {
  const std::vector<Vec3> p{{0, 0, 0}, {1, 2, 3}};
  CHECK(chamfer_distance(p, p).value == 0.0);
  CHECK(chamfer_distance(std::vector<Vec3>{{0, 0, 0}}, std::vector<Vec3>{{1, 0, 0}}).value ==
        doctest::Approx(2.0));
  CHECK(chamfer_distance(std::vector<Vec3>{{0, 0, 0}, {2, 0, 0}}, std::vector<Vec3>{{1, 0, 0}})
            .value == doctest::Approx(2.0));
  CHECK_THROWS_AS(chamfer_distance(std::vector<Vec3>{}, p), std::invalid_argument);
  CHECK_THROWS_AS(chamfer_distance(p, std::vector<Vec3>{}), std::invalid_argument);
}

TEST_CASE("chamfer_distance matches brute force and is symmetric") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<int> size(1, 40);
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec3> p(static_cast<std::size_t>(size(rng)));
    std::vector<Vec3> q(static_cast<std::size_t>(size(rng)));
    for (auto& x : p) x = {u(rng), u(rng), u(rng)};
    for (auto& x : q) x = {u(rng), u(rng), u(rng)};
    const double value = chamfer_distance(p, q).value;
    CHECK(std::abs(value - oracle::chamfer(p, q)) <= 1e-9);
    CHECK(value == chamfer_distance(q, p).value);
    CHECK(value > 0.0);
  }
}

TEST_CASE("chamfer_distance gradient matches central differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_int_distribution<int> size(2, 32);
  const double h = 1e-4;
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec3> p(static_cast<std::size_t>(size(rng)));
    std::vector<Vec3> q(static_cast<std::size_t>(size(rng)));
    for (auto& x : p) x = {u(rng), u(rng), u(rng)};
    for (auto& x : q) x = {u(rng), u(rng), u(rng)};
    const auto analytic = chamfer_distance(p, q);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        auto shifted = [&](double delta) {
          std::vector<Vec3> moved = p;
          double* c = axis == 0 ? &moved[i].x : axis == 1 ? &moved[i].y : &moved[i].z;
          *c += delta;
          return chamfer_distance(moved, q).value;
        };
        const double numeric = (shifted(h) - shifted(-h)) / (2 * h);
        const Vec3& g = analytic.grad_p[i];
        const double a = axis == 0 ? g.x : axis == 1 ? g.y : g.z;
        // Relative error with an absolute floor for near-zero components.
        CHECK(std::abs(a - numeric) <= 1e-3 * std::max(std::abs(numeric), 1e-3));
      }
    }
  }
}

}  // namespace
}  // namespace semsurf
