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
#include <span>
#include <vector>

#include "cogcl/codes.hpp"
#include "cogcl/data.hpp"
#include "cogcl/quantizer.hpp"

namespace cogcl::objective {

using quantizer::Side;

struct PositiveIndexOptions {
  bool shared_codes = true;
  bool shared_targets = true;
  /// Co-interaction candidates kept per entity (reservoir sample).
  std::size_t target_cap = 50;
  std::uint64_t seed = 0;
};

/// Semantically relevant partners for every user and item.
///
/// Two entities are code-positive when their codes agree on at least H-1
/// levels (level-wise). That relation is stored as H hash-bucket families, one
/// per masked level, and is never materialized pairwise. Target-positives
/// (entities sharing a train interaction) are stored explicitly and capped.
class PositiveIndex {
 public:
  static PositiveIndex build(const CodeAssignment& codes, const data::InteractionDataset& ds,
                             const PositiveIndexOptions& opts);

  /// Distinct positives of an entity, sorted, excluding the entity itself.
  std::vector<std::int32_t> positives(Side side, std::int32_t entity) const;
  bool has_positive(Side side, std::int32_t entity) const;
  /// Uniform draw from positives(); returns `entity` itself when there are none.
  std::int32_t sample(Side side, std::int32_t entity, Rng& rng) const;
  std::int64_t count_without_positive(Side side) const;

 private:
  struct SideIndex {
    int levels = 0;
    bool use_codes = false;
    IndexMat codes;
    std::vector<std::vector<std::int32_t>> buckets;
    IndexMat bucket_of;  // entity x masked level -> bucket id
    std::vector<std::vector<std::int32_t>> targets;
    std::vector<char> has_positive;
  };
  const SideIndex& side(Side s) const { return s == Side::user ? users_ : items_; }
  static SideIndex build_side(const IndexMat& codes, int levels, bool use_codes);
  static int code_multiplicity(const SideIndex& s, std::int32_t a, std::int32_t b);

  SideIndex users_;
  SideIndex items_;
};

/// One optimization batch. `users/pos_items/neg_items` are aligned BPR
/// triples; `cl_users` and `cl_items` are the distinct batch users and
/// positive items used by the contrastive and code losses, each paired with
/// one sampled partner.
struct TrainBatch {
  std::vector<std::int32_t> users;
  std::vector<std::int32_t> pos_items;
  std::vector<std::int32_t> neg_items;
  std::vector<std::int32_t> cl_users;
  std::vector<std::int32_t> user_partners;
  std::vector<std::int32_t> cl_items;
  std::vector<std::int32_t> item_partners;
  std::int64_t users_without_positive = 0;
  std::int64_t items_without_positive = 0;
};

class BatchSampler {
 public:
  explicit BatchSampler(const data::InteractionDataset& ds);

  /// Builds a batch from explicit train pairs: one rejection-sampled negative
  /// per pair and one partner per distinct user/item (self when `index` is null
  /// or the entity has no positive).
  TrainBatch make_batch(std::span<const data::Pair> pairs, const PositiveIndex* index, Rng& rng) const;

  /// Uniform draw (with replacement) of `batch_size` train pairs.
  TrainBatch sample(std::size_t batch_size, const PositiveIndex* index, Rng& rng) const;

  std::int32_t sample_negative(std::int32_t user, Rng& rng) const;
  bool interacted(std::int32_t user, std::int32_t item) const;

 private:
  const data::InteractionDataset* ds_;
  std::vector<std::vector<std::int32_t>> user_items_;
};

TrainBatch sample_batch(const data::InteractionDataset& ds, const PositiveIndex* index, std::size_t batch_size,
                        std::uint64_t seed);

}  // namespace cogcl::objective
