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

#include "semsurf/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

namespace semsurf {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'S', 'E', 'M', 'S', 'U', 'R', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw CheckpointError(path.string() + ": truncated checkpoint");
  }
  return value;
}

std::string get_string(std::istream& in, std::size_t n, const std::filesystem::path& path) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw CheckpointError(path.string() + ": truncated checkpoint");
  }
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& module,
                     const Config& config, std::uint64_t step) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put<std::uint64_t>(out, step);
  const std::string text = serialize_config(config);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = module.named_parameters(true);
  put<std::uint64_t>(out, params.size());
  for (const auto& item : params) {
    const std::string& name = item.key();
    const torch::Tensor t = item.value().detach().to(torch::kFloat32).contiguous();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    for (int64_t d : t.sizes()) put<std::int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data_ptr<float>()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path.string() + ": not a checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw CheckpointError(path.string() + ": unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.step = get<std::uint64_t>(in, path);
  ck.config = parse_config(get_string(in, get<std::uint64_t>(in, path), path));
  const auto count = get<std::uint64_t>(in, path);
  for (std::uint64_t b = 0; b < count; ++b) {
    std::string name = get_string(in, get<std::uint32_t>(in, path), path);
    const auto ndim = get<std::uint32_t>(in, path);
    std::vector<int64_t> dims(ndim);
    for (auto& d : dims) d = get<std::int64_t>(in, path);
    torch::Tensor t = torch::empty(dims, torch::kFloat32);
    if (t.numel() > 0 &&
        !in.read(reinterpret_cast<char*>(t.data_ptr<float>()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float)))) {
      throw CheckpointError(path.string() + ": truncated block " + name);
    }
    ck.blocks.emplace_back(std::move(name), std::move(t));
  }
  return ck;
}

void load_parameters(torch::nn::Module& module, const Checkpoint& checkpoint) {
  auto params = module.named_parameters(true);
  if (params.size() != checkpoint.blocks.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(checkpoint.blocks.size()) +
                          " blocks, model has " + std::to_string(params.size()));
  }
  torch::NoGradGuard no_grad;
  for (const auto& [name, tensor] : checkpoint.blocks) {
    torch::Tensor* target = params.find(name);
    if (target == nullptr) throw CheckpointError("unknown parameter " + name);
    if (target->sizes() != tensor.sizes()) throw CheckpointError("shape mismatch for " + name);
    target->copy_(tensor);
  }
}

}  // namespace semsurf
