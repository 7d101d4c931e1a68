// Copyright 2026 The cogcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "cogcl/compute.hpp"

namespace cogcl {

inline constexpr char kCheckpointMagic[8] = {'C', 'O', 'G', 'C', 'L', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian):
//   magic[8] u32 version u32 meta_len meta_json[meta_len] u32 num_entries
//   per entry: u32 name_len name u64 rows u64 cols i64 step
//              f32 value[rows*cols] f32 adam_m[rows*cols] f32 adam_v[rows*cols]
struct Checkpoint {
  nlohmann::json meta;
  compute::ParameterStore<float> store;
};

/// Writes to a temporary sibling and renames, so a crash never leaves a torn file.
void write_checkpoint(const std::filesystem::path& path, const compute::ParameterStore<float>& store,
                      const nlohmann::json& meta);

/// Throws IoError when missing and FormatError on a bad magic, version or size.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace cogcl
