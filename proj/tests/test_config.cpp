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

#include "doctest.h"
#include "semsurf/config.h"
#include "temp_dir.h"

namespace semsurf {
namespace {

TEST_CASE("full configuration defaults") {
  const Config c = Config::full();
  CHECK(c.voxel.voxel_size == Vec3{0.05, 0.05, 0.1});
  CHECK(c.roi.grid_size == 6);
  CHECK(c.roi.stage_channels * 3 == 96);
  CHECK(c.rpg.ffn_dim == 384);
  CHECK(c.rpg.semantic_dim == 32);
  CHECK(c.head.spatial_dim == 64);
  CHECK(c.head.roi_feature_dim == 256);
  CHECK(c.loss.score_samples == 2048);
  CHECK(c.train.epochs == 80);
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.batch_size == 16);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("reduced configuration") {
  const Config c = Config::reduced();
  CHECK(c.backbone.channels == std::array<int, 4>{8, 16, 16, 16});
  CHECK(c.roi.grid_size == 4);
  CHECK(c.train.batch_size == 4);
  CHECK(c.train.max_steps <= 2000);
  CHECK(c.rpn.classes == std::vector<ObjectClass>{ObjectClass::kCar});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config text round trip") {
  for (const Config& c : {Config::full(), Config::reduced()}) {
    const std::string text = serialize_config(c);
    const Config parsed = parse_config(text);
    CHECK(parsed == c);
    CHECK(serialize_config(parsed) == text);
  }
  TempDir dir("cfg");
  Config c = Config::reduced();
  c.rpg.offset_center = OffsetCenter::kRoiCenter;
  c.loss.use_score_loss = false;
  save_config(dir.path() / "c.yaml", c);
  CHECK(load_config(dir.path() / "c.yaml") == c);
}

TEST_CASE("every key is serialized") {
  const std::string text = serialize_config(Config::full());
  for (const std::string& key : config_keys()) {
    const auto leaf = key.substr(key.rfind('.') + 1);
    CHECK_MESSAGE(text.find(leaf + ":") != std::string::npos, key);
  }
}

TEST_CASE("partial files override defaults") {
  const Config c = parse_config("train:\n  lr: 0.002\nroi:\n  grid_size: 5\n");
  CHECK(c.train.lr == 0.002);
  CHECK(c.roi.grid_size == 5);
  CHECK(c.rpg.ffn_dim == 384);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("nope: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("train:\n  lr: fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("rpn:\n  classes: [Truck]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("roi:\n  grid_size: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("voxel:\n  voxel_size: [0.1, 0.1]\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/semsurf.yaml"), ConfigError);
}

}  // namespace
}  // namespace semsurf
