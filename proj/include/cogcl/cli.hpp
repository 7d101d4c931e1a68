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
#include <string>
#include <utility>
#include <vector>

#include "cogcl/trainer.hpp"

namespace cogcl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// `key = value` lines; `#` starts a comment, string values may be quoted.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                   const std::string& origin = "<config>");
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Applies file entries then overrides, each through set_config_item.
trainer::TrainConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& file_items,
                                    const std::vector<std::pair<std::string, std::string>>& overrides);

/// Effective configuration in the same `key = value` syntax.
std::string render_config(const trainer::TrainConfig& cfg);

/// Grad-stop switches of an ablation variant (wo_A, wo_U, wo_AA, wo_AU, wo_SA, wo_SU).
void apply_variant(trainer::TrainConfig& cfg, const std::string& variant);

/// Entry point behind the `cogcl` binary; returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace cogcl::cli
