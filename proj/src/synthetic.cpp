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

#include "cogcl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>
#include <vector>

#include "cogcl/common.hpp"

namespace cogcl::data {

RawInteractions synthetic_interactions(const SyntheticSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 2 || spec.num_clusters < 1)
    throw UsageError("synthetic spec needs users, at least two items and a cluster");
  Rng rng(spec.seed);
  std::lognormal_distribution<double> pop_dist(0.0, spec.popularity_sigma);
  std::uniform_int_distribution<std::int32_t> cluster_dist(0, spec.num_clusters - 1);

  std::vector<double> popularity(static_cast<std::size_t>(spec.num_items));
  std::vector<std::vector<std::int32_t>> members(static_cast<std::size_t>(spec.num_clusters));
  for (std::int32_t i = 0; i < spec.num_items; ++i) {
    popularity[static_cast<std::size_t>(i)] = pop_dist(rng);
    members[static_cast<std::size_t>(cluster_dist(rng))].push_back(i);
  }
  const auto sampler_over = [&](const std::vector<std::int32_t>& items) {
    std::vector<double> w;
    for (auto i : items) w.push_back(popularity[static_cast<std::size_t>(i)]);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  };
  std::vector<std::discrete_distribution<std::size_t>> per_cluster;
  for (const auto& m : members) per_cluster.push_back(m.empty() ? std::discrete_distribution<std::size_t>() : sampler_over(m));
  std::discrete_distribution<std::size_t> global(popularity.begin(), popularity.end());

  // Degrees: min_degree plus an exponential tail with the requested mean.
  const double tail_mean = std::max(1.0, spec.mean_degree - spec.min_degree);
  std::exponential_distribution<double> tail(1.0 / tail_mean);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  RawInteractions raw;
  for (std::int32_t u = 0; u < spec.num_users; ++u) {
    const std::int32_t primary = cluster_dist(rng);
    std::int32_t secondary = cluster_dist(rng);
    const auto degree = static_cast<std::int32_t>(
        std::min<double>(spec.min_degree + tail(rng), 0.6 * spec.num_items));
    std::unordered_set<std::int32_t> seen;
    int attempts = 0;
    while (static_cast<std::int32_t>(seen.size()) < degree && attempts < 50 * degree) {
      ++attempts;
      const double r = u01(rng);
      std::int32_t item;
      const auto& pick_cluster = r < spec.primary_share ? primary : secondary;
      if (r < spec.primary_share + spec.secondary_share && !members[static_cast<std::size_t>(pick_cluster)].empty()) {
        auto& dist = per_cluster[static_cast<std::size_t>(pick_cluster)];
        item = members[static_cast<std::size_t>(pick_cluster)][dist(rng)];
      } else {
        item = static_cast<std::int32_t>(global(rng));
      }
      if (seen.insert(item).second)
        raw.records.push_back({"u" + std::to_string(u), "i" + std::to_string(item), std::nullopt});
    }
  }
  return raw;
}

}  // namespace cogcl::data
