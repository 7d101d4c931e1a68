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

#include "cogcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cogcl::eval {

Split parse_split(const std::string& name) {
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw UsageError("unknown split '" + name + "' (expected valid or test)");
}

const char* to_string(Split s) { return s == Split::valid ? "valid" : "test"; }

template <typename T>
std::vector<std::int32_t> top_n(const Eigen::Ref<const Eigen::Matrix<T, 1, Eigen::Dynamic>>& scores,
                                const std::vector<char>& masked, int n) {
  std::vector<std::int32_t> cand;
  cand.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (!masked[static_cast<std::size_t>(i)]) cand.push_back(static_cast<std::int32_t>(i));
  const auto better = [&](std::int32_t a, std::int32_t b) {
    return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
  };
  const std::size_t k = std::min(cand.size(), static_cast<std::size_t>(std::max(n, 0)));
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), better);
  cand.resize(k);
  return cand;
}

template <typename T>
RankingMetrics full_rank_evaluate(const Mat<T>& user_emb, const Mat<T>& item_emb, const data::InteractionDataset& ds,
                                  Split split, const std::vector<int>& ns) {
  if (user_emb.rows() != ds.num_users || item_emb.rows() != ds.num_items || user_emb.cols() != item_emb.cols())
    throw ShapeError("full_rank_evaluate: embeddings do not match the dataset");
  if (ns.empty()) throw UsageError("no cutoffs given");
  const int max_n = *std::max_element(ns.begin(), ns.end());
  const auto train = ds.user_items(ds.train);
  const auto valid = ds.user_items(ds.valid);
  const auto test = ds.user_items(ds.test);
  const auto& targets = split == Split::valid ? valid : test;

  RankingMetrics out;
  out.ns = ns;
  for (std::int32_t u = 0; u < ds.num_users; ++u)
    if (!targets[static_cast<std::size_t>(u)].empty()) out.users.push_back(u);
  const std::size_t nu = out.users.size();
  for (int n : ns) {
    out.user_recall[n].assign(nu, 0.0);
    out.user_ndcg[n].assign(nu, 0.0);
  }
  // Per-slot outputs are written disjointly; vectors are preallocated above.
  std::vector<std::vector<double>*> rec_cols, ndcg_cols;
  for (int n : ns) {
    rec_cols.push_back(&out.user_recall[n]);
    ndcg_cols.push_back(&out.user_ndcg[n]);
  }

  parallel_for(static_cast<std::int64_t>(nu), [&](std::int64_t begin, std::int64_t end) {
    std::vector<char> masked(static_cast<std::size_t>(ds.num_items), 0);
    Eigen::Matrix<T, 1, Eigen::Dynamic> scores(ds.num_items);
    for (std::int64_t slot = begin; slot < end; ++slot) {
      const std::int32_t u = out.users[static_cast<std::size_t>(slot)];
      scores.noalias() = user_emb.row(u) * item_emb.transpose();
      const auto& tr = train[static_cast<std::size_t>(u)];
      const auto& va = valid[static_cast<std::size_t>(u)];
      for (auto i : tr) masked[static_cast<std::size_t>(i)] = 1;
      if (split == Split::test)
        for (auto i : va) masked[static_cast<std::size_t>(i)] = 1;
      const auto ranked = top_n<T>(scores, masked, max_n);
      for (auto i : tr) masked[static_cast<std::size_t>(i)] = 0;
      for (auto i : va) masked[static_cast<std::size_t>(i)] = 0;

      const auto& tg = targets[static_cast<std::size_t>(u)];
      for (std::size_t c = 0; c < ns.size(); ++c) {
        const int n = ns[c];
        double hits = 0.0, dcg = 0.0, idcg = 0.0;
        for (std::size_t r = 0; r < ranked.size() && r < static_cast<std::size_t>(n); ++r) {
          if (std::binary_search(tg.begin(), tg.end(), ranked[r])) {
            hits += 1.0;
            dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
          }
        }
        const std::size_t ideal = std::min(tg.size(), static_cast<std::size_t>(n));
        for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
        (*rec_cols[c])[static_cast<std::size_t>(slot)] = hits / static_cast<double>(tg.size());
        (*ndcg_cols[c])[static_cast<std::size_t>(slot)] = idcg > 0 ? dcg / idcg : 0.0;
      }
    }
  }, 16);

  for (int n : ns) {
    const auto& r = out.user_recall[n];
    const auto& g = out.user_ndcg[n];
    out.recall[n] = nu ? std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(nu) : 0.0;
    out.ndcg[n] = nu ? std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(nu) : 0.0;
  }
  return out;
}

std::vector<GroupMetrics> sparsity_group_report(const RankingMetrics& m, const data::InteractionDataset& ds,
                                                int num_groups) {
  if (num_groups < 1) throw UsageError("number of groups must be >= 1");
  const std::size_t nu = m.users.size();
  if (nu < static_cast<std::size_t>(num_groups))
    throw UsageError("cannot form " + std::to_string(num_groups) + " groups from " + std::to_string(nu) + " users");
  std::vector<std::int64_t> degree(static_cast<std::size_t>(ds.num_users), 0);
  for (const auto& p : ds.train) ++degree[static_cast<std::size_t>(p.first)];
  std::vector<std::size_t> order(nu);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return degree[static_cast<std::size_t>(m.users[a])] < degree[static_cast<std::size_t>(m.users[b])];
  });
  std::vector<GroupMetrics> out;
  for (int g = 0; g < num_groups; ++g) {
    const std::size_t lo = nu * static_cast<std::size_t>(g) / static_cast<std::size_t>(num_groups);
    const std::size_t hi = nu * static_cast<std::size_t>(g + 1) / static_cast<std::size_t>(num_groups);
    GroupMetrics gm;
    gm.group = g;
    gm.num_users = static_cast<std::int64_t>(hi - lo);
    gm.min_degree = degree[static_cast<std::size_t>(m.users[order[lo]])];
    gm.max_degree = degree[static_cast<std::size_t>(m.users[order[hi - 1]])];
    for (std::size_t k = lo; k < hi; ++k) gm.users.push_back(m.users[order[k]]);
    for (int n : m.ns) {
      double r = 0.0, d = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        r += m.user_recall.at(n)[order[k]];
        d += m.user_ndcg.at(n)[order[k]];
      }
      gm.recall[n] = r / static_cast<double>(hi - lo);
      gm.ndcg[n] = d / static_cast<double>(hi - lo);
    }
    out.push_back(std::move(gm));
  }
  return out;
}

Selection select_best(const std::vector<double>& valid_ndcg10, int patience) {
  Selection s;
  if (valid_ndcg10.empty()) return s;
  std::size_t best = 0;
  for (std::size_t e = 1; e < valid_ndcg10.size(); ++e)
    if (valid_ndcg10[e] > valid_ndcg10[best]) best = e;
  s.best_epoch = static_cast<int>(best) + 1;
  s.stop = patience > 0 && valid_ndcg10.size() - 1 - best >= static_cast<std::size_t>(patience);
  return s;
}

std::vector<nlohmann::json> metrics_records(const RankingMetrics& m, int epoch, Split split) {
  std::vector<nlohmann::json> out;
  for (const char* metric : {"recall", "ndcg"}) {
    const auto& values = std::string(metric) == "recall" ? m.recall : m.ndcg;
    for (int n : m.ns)
      out.push_back({{"epoch", epoch}, {"split", to_string(split)}, {"metric", metric}, {"N", n}, {"value", values.at(n)}});
  }
  return out;
}

std::vector<nlohmann::json> group_records(const std::vector<GroupMetrics>& groups, int epoch, Split split) {
  std::vector<nlohmann::json> out;
  for (const auto& g : groups)
    for (const char* metric : {"recall", "ndcg"}) {
      const auto& values = std::string(metric) == "recall" ? g.recall : g.ndcg;
      for (const auto& [n, v] : values)
        out.push_back({{"epoch", epoch},
                       {"split", to_string(split)},
                       {"metric", metric},
                       {"N", n},
                       {"value", v},
                       {"group", g.group},
                       {"group_users", g.num_users},
                       {"min_degree", g.min_degree},
                       {"max_degree", g.max_degree}});
    }
  return out;
}

template RankingMetrics full_rank_evaluate<float>(const Mat<float>&, const Mat<float>&, const data::InteractionDataset&,
                                                  Split, const std::vector<int>&);
template RankingMetrics full_rank_evaluate<double>(const Mat<double>&, const Mat<double>&,
                                                   const data::InteractionDataset&, Split, const std::vector<int>&);
template std::vector<std::int32_t> top_n<float>(const Eigen::Ref<const Eigen::Matrix<float, 1, Eigen::Dynamic>>&,
                                                const std::vector<char>&, int);
template std::vector<std::int32_t> top_n<double>(const Eigen::Ref<const Eigen::Matrix<double, 1, Eigen::Dynamic>>&,
                                                 const std::vector<char>&, int);

}  // namespace cogcl::eval
