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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogcl/common.hpp"
#include "cogcl/data.hpp"

namespace cogcl::eval {

enum class Split { valid, test };

Split parse_split(const std::string& name);
const char* to_string(Split s);

inline const std::vector<int> kDefaultCutoffs = {5, 10, 20};

struct RankingMetrics {
  std::vector<int> ns;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
  /// Evaluated users (those with at least one target) and their per-user
  /// values, index-aligned with `users`.
  std::vector<std::int32_t> users;
  std::map<int, std::vector<double>> user_recall;
  std::map<int, std::vector<double>> user_ndcg;
};

/// Scores every item by inner product, masks the user's train items (and valid
/// items when evaluating test), ranks with ties going to the lower item index,
/// and macro-averages Recall@N / NDCG@N over users with targets.
template <typename T>
RankingMetrics full_rank_evaluate(const Mat<T>& user_emb, const Mat<T>& item_emb, const data::InteractionDataset& ds,
                                  Split split, const std::vector<int>& ns = kDefaultCutoffs);

/// Top-n unmasked items of one score row, best first.
template <typename T>
std::vector<std::int32_t> top_n(const Eigen::Ref<const Eigen::Matrix<T, 1, Eigen::Dynamic>>& scores,
                                const std::vector<char>& masked, int n);

struct GroupMetrics {
  int group = 0;
  std::int64_t num_users = 0;
  std::int64_t min_degree = 0;
  std::int64_t max_degree = 0;
  std::vector<std::int32_t> users;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
};

/// Equal-population groups of evaluated users ordered by train degree (stable
/// in user index). Throws UsageError when there are fewer users than groups.
std::vector<GroupMetrics> sparsity_group_report(const RankingMetrics& m, const data::InteractionDataset& ds,
                                                int num_groups = 5);

struct Selection {
  int best_epoch = 0;  // 1-based, 0 when the history is empty
  bool stop = false;
};

/// Best epoch by validation NDCG@10 (earliest wins ties); stop once `patience`
/// epochs have passed without improvement.
Selection select_best(const std::vector<double>& valid_ndcg10, int patience);

/// One JSON object per (metric, N): {epoch, split, metric, N, value[, group]}.
std::vector<nlohmann::json> metrics_records(const RankingMetrics& m, int epoch, Split split);
std::vector<nlohmann::json> group_records(const std::vector<GroupMetrics>& groups, int epoch, Split split);

}  // namespace cogcl::eval
