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

#include "cogcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace cogcl::graph {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::user: return "user";
    case NodeKind::item: return "item";
    case NodeKind::user_code: return "user_code";
    case NodeKind::item_code: return "item_code";
  }
  return "?";
}

const char* to_string(AugmentOp op) { return op == AugmentOp::replace ? "replace" : "add"; }

NodeKind NodeLayout::kind(std::int64_t node) const {
  if (node < num_users) return NodeKind::user;
  node -= num_users;
  if (node < num_items) return NodeKind::item;
  node -= num_items;
  if (node < std::int64_t{levels} * codebook_size) return NodeKind::user_code;
  return NodeKind::item_code;
}

CsrGraph CsrGraph::from_edges(const NodeLayout& layout, const std::vector<Edge>& edges) {
  const std::int64_t n = layout.num_nodes();
  CsrGraph g;
  g.layout_ = layout;
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw ShapeError("edge endpoint outside node range");
    if (e.a == e.b) throw ShapeError("self-loop in interaction graph");
    ++deg[static_cast<std::size_t>(e.a)];
    ++deg[static_cast<std::size_t>(e.b)];
  }
  g.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t v = 0; v < n; ++v) g.row_ptr_[v + 1] = g.row_ptr_[v] + deg[static_cast<std::size_t>(v)];
  g.cols_.resize(static_cast<std::size_t>(g.row_ptr_.back()));
  std::vector<std::int64_t> fill(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  for (const Edge& e : edges) {
    g.cols_[static_cast<std::size_t>(fill[e.a]++)] = e.b;
    g.cols_[static_cast<std::size_t>(fill[e.b]++)] = e.a;
  }
  g.weights_.resize(g.cols_.size());
  for (std::int64_t v = 0; v < n; ++v) {
    auto begin = g.cols_.begin() + g.row_ptr_[v];
    auto end = g.cols_.begin() + g.row_ptr_[v + 1];
    std::sort(begin, end);
    for (std::int64_t k = g.row_ptr_[v]; k < g.row_ptr_[v + 1]; ++k) {
      const auto c = static_cast<std::size_t>(g.cols_[static_cast<std::size_t>(k)]);
      g.weights_[static_cast<std::size_t>(k)] =
          1.0 / std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(v)]) * static_cast<double>(deg[c]));
    }
  }
  return g;
}

CsrGraph build_base_graph(const data::InteractionDataset& ds) {
  NodeLayout layout{ds.num_users, ds.num_items, 0, 0};
  std::vector<Edge> edges;
  edges.reserve(ds.train.size());
  for (const auto& [u, i] : ds.train) edges.push_back({layout.user(u), layout.item(i)});
  return CsrGraph::from_edges(layout, edges);
}

AugmentedEdges build_augmented_edges(const data::InteractionDataset& ds, const CodeAssignment& codes,
                                     const AugmentationConfig& cfg, AugmentOp op, std::uint64_t round_seed) {
  if (codes.user_codes.rows() != ds.num_users || codes.item_codes.rows() != ds.num_items ||
      codes.user_codes.cols() != codes.levels || codes.item_codes.cols() != codes.levels)
    throw ShapeError("code assignment does not cover the dataset");
  const double p = cfg.probability(op);
  if (p < 0.0 || p > 1.0) throw UsageError("augmentation probability outside [0, 1]");

  AugmentedEdges out;
  out.op = op;
  out.layout = NodeLayout{ds.num_users, ds.num_items, codes.levels, codes.codebook_size};
  const NodeLayout& L = out.layout;
  const auto user_items = ds.user_items(ds.train);
  const auto item_users = ds.item_users(ds.train);
  const int H = codes.levels;

  Rng rng(round_seed);
  std::bernoulli_distribution coin(p);
  out.user_sampled.resize(static_cast<std::size_t>(ds.num_users));
  out.item_sampled.resize(static_cast<std::size_t>(ds.num_items));
  for (std::int32_t u = 0; u < ds.num_users; ++u)
    for (std::int32_t i : user_items[static_cast<std::size_t>(u)])
      if (coin(rng)) out.user_sampled[static_cast<std::size_t>(u)].push_back(i);
  for (std::int32_t i = 0; i < ds.num_items; ++i)
    for (std::int32_t u : item_users[static_cast<std::size_t>(i)])
      if (coin(rng)) out.item_sampled[static_cast<std::size_t>(i)].push_back(u);

  auto sampled = [](const std::vector<std::int32_t>& list, std::int32_t x) {
    return std::binary_search(list.begin(), list.end(), x);
  };

  for (std::int32_t u = 0; u < ds.num_users; ++u) {
    const auto& aug = out.user_sampled[static_cast<std::size_t>(u)];
    for (std::int32_t i : user_items[static_cast<std::size_t>(u)])
      if (op == AugmentOp::add || !sampled(aug, i)) out.user_pass.push_back({L.user(u), L.item(i)});
    for (std::int32_t i : aug)
      for (int h = 0; h < H; ++h) out.user_pass.push_back({L.user(u), L.item_code(h, codes.item_codes(i, h))});
  }
  for (std::int32_t i = 0; i < ds.num_items; ++i) {
    const auto& aug = out.item_sampled[static_cast<std::size_t>(i)];
    for (std::int32_t u : item_users[static_cast<std::size_t>(i)])
      if (op == AugmentOp::add || !sampled(aug, u)) out.item_pass.push_back({L.item(i), L.user(u)});
    for (std::int32_t u : aug)
      for (int h = 0; h < H; ++h) out.item_pass.push_back({L.user_code(h, codes.user_codes(u, h)), L.item(i)});
  }

  // Merge: an original edge survives only if neither pass replaced it.
  for (const auto& [u, i] : ds.train) {
    const bool removed = op == AugmentOp::replace && (sampled(out.user_sampled[static_cast<std::size_t>(u)], i) ||
                                                      sampled(out.item_sampled[static_cast<std::size_t>(i)], u));
    if (!removed) out.merged.push_back({L.user(u), L.item(i)});
  }
  for (const Edge& e : out.user_pass)
    if (L.kind(e.b) == NodeKind::item_code) out.merged.push_back(e);
  for (const Edge& e : out.item_pass)
    if (L.kind(e.a) == NodeKind::user_code) out.merged.push_back(e);
  return out;
}

AugmentedGraphPair build_augmented_pair(const data::InteractionDataset& ds, const CodeAssignment& codes,
                                        const AugmentationConfig& cfg, int epoch) {
  Rng rng(derive_seed(cfg.seed, {0xa06ULL, static_cast<std::uint64_t>(epoch)}));
  std::bernoulli_distribution pick_replace(0.5);
  AugmentedGraphPair pair;
  pair.epoch = epoch;
  pair.op1 = pick_replace(rng) ? AugmentOp::replace : AugmentOp::add;
  pair.op2 = pick_replace(rng) ? AugmentOp::replace : AugmentOp::add;
  const std::uint64_t s1 = derive_seed(cfg.seed, {0xa06ULL, static_cast<std::uint64_t>(epoch), 1});
  const std::uint64_t s2 = derive_seed(cfg.seed, {0xa06ULL, static_cast<std::uint64_t>(epoch), 2});
  auto e1 = build_augmented_edges(ds, codes, cfg, pair.op1, s1);
  pair.graph1 = CsrGraph::from_edges(e1.layout, e1.merged);
  auto e2 = build_augmented_edges(ds, codes, cfg, pair.op2, s2);
  pair.graph2 = CsrGraph::from_edges(e2.layout, e2.merged);
  return pair;
}

void write_edge_tsv(const CsrGraph& g, std::ostream& out) {
  out.precision(17);
  for (std::int64_t v = 0; v < g.num_nodes(); ++v) {
    for (std::int64_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k) {
      const std::int32_t c = g.cols()[static_cast<std::size_t>(k)];
      out << v << '\t' << c << '\t' << g.weights()[static_cast<std::size_t>(k)] << '\t' << to_string(g.kind(v)) << '-'
          << to_string(g.kind(c)) << '\n';
    }
  }
}

}  // namespace cogcl::graph
