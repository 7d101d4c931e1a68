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

#include <doctest.h>

#include <set>

#include "cogcl/sampling.hpp"
#include "support/fixtures.hpp"

using namespace cogcl;
using namespace cogcl::objective;

namespace {

CodeAssignment codes_from(std::vector<std::vector<int>> users, std::vector<std::vector<int>> items, int K) {
  CodeAssignment c;
  c.levels = static_cast<int>(users.front().size());
  c.codebook_size = K;
  c.user_codes = IndexMat(static_cast<Eigen::Index>(users.size()), c.levels);
  c.item_codes = IndexMat(static_cast<Eigen::Index>(items.size()), c.levels);
  for (std::size_t r = 0; r < users.size(); ++r)
    for (int h = 0; h < c.levels; ++h) c.user_codes(static_cast<Eigen::Index>(r), h) = users[r][static_cast<std::size_t>(h)];
  for (std::size_t r = 0; r < items.size(); ++r)
    for (int h = 0; h < c.levels; ++h) c.item_codes(static_cast<Eigen::Index>(r), h) = items[r][static_cast<std::size_t>(h)];
  return c;
}

PositiveIndexOptions codes_only() {
  PositiveIndexOptions o;
  o.shared_targets = false;
  return o;
}

}  // namespace

TEST_CASE("code positives need H-1 shared levels") {
  const auto ds = testing::make_dataset(3, 3, {{0, 0}, {1, 1}, {2, 2}});
  const auto codes = codes_from({{3, 7, 2, 9}, {3, 7, 2, 5}, {3, 7, 1, 5}}, {{0, 0, 0, 0}, {1, 1, 1, 1}, {2, 2, 2, 2}}, 10);
  const auto idx = PositiveIndex::build(codes, ds, codes_only());
  CHECK(idx.positives(Side::user, 0) == std::vector<std::int32_t>{1});
  CHECK(idx.positives(Side::user, 1) == std::vector<std::int32_t>{0, 2});
  CHECK(idx.positives(Side::user, 2) == std::vector<std::int32_t>{1});
  CHECK(!idx.has_positive(Side::item, 0));
  CHECK(idx.count_without_positive(Side::item) == 3);
}

TEST_CASE("shared targets make mutual positives") {
  const auto ds = testing::make_dataset(3, 8, {{0, 7}, {1, 7}, {2, 3}});
  const auto codes = codes_from({{0, 1}, {2, 3}, {4, 5}}, std::vector<std::vector<int>>(8, {0, 0}), 6);
  PositiveIndexOptions o;
  o.shared_codes = false;
  const auto idx = PositiveIndex::build(codes, ds, o);
  CHECK(idx.positives(Side::user, 0) == std::vector<std::int32_t>{1});
  CHECK(idx.positives(Side::user, 1) == std::vector<std::int32_t>{0});
  CHECK(idx.positives(Side::user, 2).empty());
  Rng rng(1);
  CHECK(idx.sample(Side::user, 2, rng) == 2);
}

TEST_CASE("sampling is uniform over the positive set") {
  // User 0 shares full codes with 1 and a single-level mismatch with 2, and an item with 2.
  const auto ds = testing::make_dataset(3, 2, {{0, 0}, {2, 0}, {1, 1}});
  const auto codes = codes_from({{1, 1}, {1, 1}, {1, 0}}, {{0, 0}, {1, 1}}, 2);
  const auto idx = PositiveIndex::build(codes, ds, {});
  REQUIRE(idx.positives(Side::user, 0) == std::vector<std::int32_t>{1, 2});
  Rng rng(3);
  int counts[3] = {0, 0, 0};
  const int n = 10000;
  for (int k = 0; k < n; ++k) ++counts[idx.sample(Side::user, 0, rng)];
  CHECK(counts[0] == 0);
  const double e = n / 2.0;
  const double chi2 = (counts[1] - e) * (counts[1] - e) / e + (counts[2] - e) * (counts[2] - e) / e;
  CHECK(chi2 < 10.83);  // p = 0.001, one degree of freedom
}

TEST_CASE("target candidates are capped") {
  std::vector<data::Pair> train;
  for (int u = 0; u < 80; ++u) train.push_back({u, 0});
  const auto ds = testing::make_dataset(80, 1, train);
  const auto codes = codes_from(std::vector<std::vector<int>>(80, {0, 0}), {{0, 0}}, 2);
  PositiveIndexOptions o;
  o.shared_codes = false;
  o.target_cap = 10;
  const auto idx = PositiveIndex::build(codes, ds, o);
  for (int u = 0; u < 80; ++u) CHECK(idx.positives(Side::user, u).size() <= 10);
}

TEST_CASE("negatives are never train items") {
  const auto ds = testing::random_dataset(30, 40, 0.3, 6);
  BatchSampler sampler(ds);
  std::set<data::Pair> train(ds.train.begin(), ds.train.end());
  Rng rng(2);
  const auto b = sampler.make_batch(ds.train, nullptr, rng);
  REQUIRE(b.neg_items.size() == ds.train.size());
  for (std::size_t k = 0; k < b.users.size(); ++k) {
    CHECK(!train.count({b.users[k], b.neg_items[k]}));
    CHECK(train.count({b.users[k], b.pos_items[k]}));
  }
  const auto full = testing::make_dataset(1, 2, {{0, 0}, {0, 1}});
  CHECK_THROWS(BatchSampler(full).sample_negative(0, rng));
}

TEST_CASE("batch contrastive lists are distinct and partnered") {
  const auto ds = testing::random_dataset(20, 25, 0.3, 8);
  const auto codes = codes_from(std::vector<std::vector<int>>(20, {0, 1}), std::vector<std::vector<int>>(25, {1, 0}), 2);
  const auto idx = PositiveIndex::build(codes, ds, {});
  const auto b = sample_batch(ds, &idx, 64, 5);
  CHECK(b.users.size() == 64);
  CHECK(std::set<std::int32_t>(b.cl_users.begin(), b.cl_users.end()).size() == b.cl_users.size());
  CHECK(std::set<std::int32_t>(b.users.begin(), b.users.end()) ==
        std::set<std::int32_t>(b.cl_users.begin(), b.cl_users.end()));
  CHECK(b.user_partners.size() == b.cl_users.size());
  CHECK(b.item_partners.size() == b.cl_items.size());
  for (std::size_t k = 0; k < b.cl_users.size(); ++k) CHECK(b.user_partners[k] != b.cl_users[k]);
  const auto again = sample_batch(ds, &idx, 64, 5);
  CHECK(again.neg_items == b.neg_items);
  CHECK(again.user_partners == b.user_partners);

  const auto self = sample_batch(ds, nullptr, 16, 5);
  CHECK(self.user_partners == self.cl_users);
}
