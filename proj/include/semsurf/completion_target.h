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

#ifndef SEMSURF_COMPLETION_TARGET_H_
#define SEMSURF_COMPLETION_TARGET_H_

#include <filesystem>
#include <vector>

#include "semsurf/config.h"
#include "semsurf/instance_bank.h"

namespace semsurf {

// Dense approximation of one object's full shape.
struct CompletionTarget {
  int instance_id = -1;
  // World frame, inside the instance's box.
  std::vector<Vec3> points;
  // Bank ids merged into the target, starting with the instance itself.
  std::vector<int> source_ids;
};

struct InstanceMatch {
  int id = -1;
  double score = 0.0;
};

// w_dims * |dims_a - dims_b| + w_chamfer * chamfer(normalized clouds).
double instance_similarity(const BankInstance& a, const BankInstance& b,
                           const TargetConfig& config);

// The `config.num_matches` lowest-score same-class instances other than
// `instance_id`, ascending by score (ties by id).
std::vector<InstanceMatch> best_matches(const InstanceBank& bank, int instance_id,
                                        const TargetConfig& config);

// Unions the instance's normalized points with those of its best matches,
// subsamples by FPS and, for classes flagged in config.mirror, reflects across
// the heading plane (subsampling happens before the reflection so the result
// stays symmetric). The result is denormalized into the instance's box and
// holds at most config.max_points points.
CompletionTarget build_completion_target(const InstanceBank& bank, int instance_id,
                                         const TargetConfig& config);

// Completion targets for every bank instance, stored in normalized canonical
// coordinates so they can be re-posed into augmented boxes.
class TargetBank {
 public:
  static TargetBank build(const InstanceBank& bank, const TargetConfig& config);

  std::size_t size() const { return normalized_.size(); }
  bool contains(int instance_id) const {
    return instance_id >= 0 && static_cast<std::size_t>(instance_id) < normalized_.size() &&
           !normalized_[static_cast<std::size_t>(instance_id)].empty();
  }
  const std::vector<Vec3>& normalized(int instance_id) const {
    return normalized_.at(static_cast<std::size_t>(instance_id));
  }
  // Target points posed in `box`; `flipped` mirrors canonical y.
  std::vector<Vec3> posed(int instance_id, const Box3D& box, bool flipped) const;

  void set(int instance_id, std::vector<Vec3> normalized, std::vector<int> sources);
  const std::vector<int>& sources(int instance_id) const {
    return sources_.at(static_cast<std::size_t>(instance_id));
  }

 private:
  std::vector<std::vector<Vec3>> normalized_;
  std::vector<std::vector<int>> sources_;
};

// On-disk layout:
//   index.json                 instance metadata (class, box, frame, counts)
//   instances/<id>.bin         normalized canonical xyz, float32 little-endian
//   targets/<id>.bin           completion target, same encoding
void save_bank(const std::filesystem::path& dir, const InstanceBank& bank,
               const TargetBank& targets);
std::pair<InstanceBank, TargetBank> load_bank(const std::filesystem::path& dir);

}  // namespace semsurf

#endif  // SEMSURF_COMPLETION_TARGET_H_
