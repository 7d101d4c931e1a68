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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cogcl::data {

inline constexpr int kDatasetFormatVersion = 1;

struct RawRecord {
  std::string user;
  std::string item;
  std::optional<std::int64_t> timestamp;

  bool operator==(const RawRecord&) const = default;
};

struct RawInteractions {
  std::vector<RawRecord> records;
  std::size_t malformed_lines = 0;
  bool had_header = false;
};

enum class InputFormat { tsv, csv };

InputFormat parse_input_format(const std::string& name);

/// Parses a `user<sep>item[<sep>timestamp]` log. Lines with fewer than two
/// columns, or with a third column that is not a nonnegative integer, count as
/// malformed and are skipped. A header is recognised on the first line when its
/// third column is non-numeric, or when a two-column first line reads
/// `user_id<sep>item_id`.
///
/// Throws IoError if the file cannot be read and ParseError if more than 1% of
/// the lines are malformed (a single malformed line is always tolerated).
RawInteractions load_interactions(const std::filesystem::path& path, InputFormat format);

/// Removes duplicate (user, item) pairs keeping the earliest timestamp. Record
/// order is otherwise preserved.
RawInteractions deduplicate(const RawInteractions& raw);

/// Iterative k-core peel over the deduplicated interactions. Throws Error when
/// nothing survives.
RawInteractions k_core_filter(const RawInteractions& raw, int k_user, int k_item);

using Pair = std::pair<std::int32_t, std::int32_t>;

/// Token <-> dense index map. Index order is first appearance.
class Vocab {
 public:
  std::int32_t add(const std::string& token);
  std::optional<std::int32_t> find(const std::string& token) const;
  const std::string& token(std::int32_t index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;

  bool operator==(const SplitRatios&) const = default;
};

/// Processed, ID-mapped dataset. Splits are sorted (user, item) lists.
struct InteractionDataset {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::vector<Pair> train;
  std::vector<Pair> valid;
  std::vector<Pair> test;
  Vocab user_vocab;
  Vocab item_vocab;
  SplitRatios ratios;
  std::uint64_t seed = 0;

  bool operator==(const InteractionDataset&) const = default;

  /// Per-user sorted item lists for one split.
  std::vector<std::vector<std::int32_t>> user_items(const std::vector<Pair>& split) const;
  /// Per-item sorted user lists for one split.
  std::vector<std::vector<std::int32_t>> item_users(const std::vector<Pair>& split) const;
};

/// Per-user leave-ratio-out split. Each user's interactions are ordered by
/// timestamp when every record carries one (ties resolved by a seeded shuffle),
/// otherwise by a seeded shuffle. floor(valid*n) and floor(test*n) go to the
/// validation and test splits from the latest end; the remainder, earliest, to
/// train. Items that never reach train are dropped from valid/test and the item
/// index space is re-densified.
InteractionDataset split_dataset(const RawInteractions& raw, const SplitRatios& ratios, std::uint64_t seed);

void save_dataset(const InteractionDataset& ds, const std::filesystem::path& dir);
InteractionDataset load_dataset(const std::filesystem::path& dir);

struct DatasetStats {
  std::int64_t users = 0;
  std::int64_t items = 0;
  std::int64_t interactions = 0;
  double sparsity = 0.0;
};

DatasetStats dataset_stats(const InteractionDataset& ds);

}  // namespace cogcl::data
