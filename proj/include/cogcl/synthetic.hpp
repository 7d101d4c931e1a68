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

// Seeded generator of implicit-feedback logs with latent taste clusters and
// long-tail item popularity. Used where no real log is at hand.

#pragma once

#include <cstdint>

#include "cogcl/data.hpp"

namespace cogcl::data {

struct SyntheticSpec {
  std::int32_t num_users = 943;
  std::int32_t num_items = 1682;
  std::int32_t num_clusters = 19;
  double mean_degree = 106.0;  // interactions per user before deduplication
  std::int32_t min_degree = 20;
  double primary_share = 0.6;    // draws from the user's main cluster
  double secondary_share = 0.2;  // draws from a second cluster; the rest follow global popularity
  double popularity_sigma = 1.0; // log-normal spread of item popularity
  std::uint64_t seed = 1;
};

/// Tokens are "u<index>" / "i<index>"; no timestamps.
RawInteractions synthetic_interactions(const SyntheticSpec& spec);

}  // namespace cogcl::data
