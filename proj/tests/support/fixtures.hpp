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

// Shared test fixtures and brute-force reference implementations. The oracles
// here deliberately avoid the library's own helpers (no top_n, no
// user_items) so that agreement is meaningful.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cogcl/data.hpp"
#include "cogcl/eval.hpp"

namespace cogcl::testing {

using data::InteractionDataset;
using data::Pair;

inline InteractionDataset make_dataset(std::int32_t users, std::int32_t items, std::vector<Pair> train,
                                       std::vector<Pair> valid = {}, std::vector<Pair> test = {}) {
  InteractionDataset ds;
  ds.num_users = users;
  ds.num_items = items;
  for (std::int32_t u = 0; u < users; ++u) ds.user_vocab.add("u" + std::to_string(u));
  for (std::int32_t i = 0; i < items; ++i) ds.item_vocab.add("i" + std::to_string(i));
  std::sort(train.begin(), train.end());
  std::sort(valid.begin(), valid.end());
  std::sort(test.begin(), test.end());
  ds.train = std::move(train);
  ds.valid = std::move(valid);
  ds.test = std::move(test);
  return ds;
}

/// Random instance where every user and item has at least one train pair and
/// each (u, i) lands in at most one split.
inline InteractionDataset random_dataset(std::int32_t users, std::int32_t items, double density, std::uint64_t seed,
                                         double valid_share = 0.15, double test_share = 0.15) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Pair> train, valid, test;
  std::set<Pair> used;
  for (std::int32_t u = 0; u < users; ++u) used.insert({u, static_cast<std::int32_t>(u % items)});
  for (std::int32_t i = 0; i < items; ++i) used.insert({static_cast<std::int32_t>(i % users), i});
  for (const auto& p : used) train.push_back(p);
  for (std::int32_t u = 0; u < users; ++u)
    for (std::int32_t i = 0; i < items; ++i) {
      if (used.count({u, i}) || u01(rng) >= density) continue;
      const double r = u01(rng);
      (r < valid_share ? valid : r < valid_share + test_share ? test : train).push_back({u, i});
    }
  return make_dataset(users, items, std::move(train), std::move(valid), std::move(test));
}

struct OracleMetrics {
  std::map<int, double> recall;
  std::map<int, double> ndcg;
};

/// Full sort of every item per user; scores accumulated in double.
template <typename M>
OracleMetrics oracle_metrics(const M& user_emb, const M& item_emb, const InteractionDataset& ds, eval::Split split,
                             const std::vector<int>& ns) {
  std::set<Pair> train(ds.train.begin(), ds.train.end());
  std::set<Pair> valid(ds.valid.begin(), ds.valid.end());
  const auto& tsplit = split == eval::Split::valid ? ds.valid : ds.test;
  std::map<std::int32_t, std::set<std::int32_t>> targets;
  for (const auto& [u, i] : tsplit) targets[u].insert(i);

  OracleMetrics out;
  for (int n : ns) out.recall[n] = out.ndcg[n] = 0.0;
  for (const auto& [u, tg] : targets) {
    std::vector<std::pair<double, std::int32_t>> ranked;
    for (std::int32_t i = 0; i < ds.num_items; ++i) {
      if (train.count({u, i})) continue;
      if (split == eval::Split::test && valid.count({u, i})) continue;
      double s = 0.0;
      for (Eigen::Index c = 0; c < user_emb.cols(); ++c)
        s += static_cast<double>(user_emb(u, c)) * static_cast<double>(item_emb(i, c));
      ranked.emplace_back(-s, i);  // ascending (-score, index) == descending score, lower index first
    }
    std::sort(ranked.begin(), ranked.end());
    for (int n : ns) {
      double hits = 0, dcg = 0, idcg = 0;
      for (int r = 0; r < n && r < static_cast<int>(ranked.size()); ++r)
        if (tg.count(ranked[static_cast<std::size_t>(r)].second)) {
          hits += 1;
          dcg += 1.0 / std::log2(r + 2.0);
        }
      for (int r = 0; r < n && r < static_cast<int>(tg.size()); ++r) idcg += 1.0 / std::log2(r + 2.0);
      out.recall[n] += hits / static_cast<double>(tg.size());
      out.ndcg[n] += dcg / idcg;
    }
  }
  for (int n : ns) {
    out.recall[n] /= static_cast<double>(targets.size());
    out.ndcg[n] /= static_cast<double>(targets.size());
  }
  return out;
}

/// Group boundaries floor(g * n / G) over users ordered by (train degree, user
/// index); returns the user ids of each group.
inline std::vector<std::vector<std::int32_t>> oracle_partition(const InteractionDataset& ds,
                                                               const std::vector<std::int32_t>& users, int groups) {
  std::map<std::int32_t, std::int64_t> degree;
  for (const auto& [u, i] : ds.train) degree[u]++;
  std::vector<std::tuple<std::int64_t, std::int32_t>> keyed;
  for (auto u : users) keyed.emplace_back(degree[u], u);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::vector<std::int32_t>> out(static_cast<std::size_t>(groups));
  const auto n = static_cast<std::int64_t>(keyed.size());
  std::int64_t g = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    while ((g + 1) * n / groups <= k) ++g;
    out[static_cast<std::size_t>(g)].push_back(std::get<1>(keyed[static_cast<std::size_t>(k)]));
  }
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cogcl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cogcl::testing
