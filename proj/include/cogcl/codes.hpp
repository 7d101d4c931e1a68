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

#include <cstdint>

#include "cogcl/common.hpp"

namespace cogcl {

/// Discrete codes for the whole population: one row per entity, one column per
/// level, each value in [0, codebook_size).
struct CodeAssignment {
  IndexMat user_codes;
  IndexMat item_codes;
  int levels = 0;
  int codebook_size = 0;
  int epoch = 0;
};

}  // namespace cogcl
