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

#ifndef SEMSURF_CHECKPOINT_H_
#define SEMSURF_CHECKPOINT_H_

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semsurf/config.h"

namespace semsurf {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout (little-endian):
//   "SEMSURF1" | u32 version | u64 step | u64 config length | config text
//   u64 block count | per block: u32 name length | name | u32 ndim |
//   i64 dims[ndim] | float32 payload
struct Checkpoint {
  Config config;
  std::uint64_t step = 0;
  std::vector<std::pair<std::string, torch::Tensor>> blocks;
};

void save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& module,
                     const Config& config, std::uint64_t step);
Checkpoint read_checkpoint(const std::filesystem::path& path);
// Copies every block into the parameter of the same name; names and shapes
// must match exactly.
void load_parameters(torch::nn::Module& module, const Checkpoint& checkpoint);

}  // namespace semsurf

#endif  // SEMSURF_CHECKPOINT_H_
