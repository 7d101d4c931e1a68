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
#include <iosfwd>
#include <string>
#include <vector>

#include "cogcl/codes.hpp"
#include "cogcl/data.hpp"

namespace cogcl::graph {

enum class NodeKind : std::uint8_t { user, item, user_code, item_code };

const char* to_string(NodeKind kind);

/// Node index space: users, then items, then H*K user-code nodes, then H*K
/// item-code nodes. The base graph has levels == 0 (no code nodes).
struct NodeLayout {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::int32_t levels = 0;
  std::int32_t codebook_size = 0;

  std::int64_t num_nodes() const {
    return std::int64_t{num_users} + num_items + 2 * std::int64_t{levels} * codebook_size;
  }
  std::int32_t user(std::int32_t u) const { return u; }
  std::int32_t item(std::int32_t i) const { return num_users + i; }
  std::int32_t user_code(std::int32_t level, std::int32_t code) const {
    return num_users + num_items + level * codebook_size + code;
  }
  std::int32_t item_code(std::int32_t level, std::int32_t code) const {
    return num_users + num_items + (levels + level) * codebook_size + code;
  }
  NodeKind kind(std::int64_t node) const;

  bool operator==(const NodeLayout&) const = default;
};

/// Undirected edge between two node indices.
struct Edge {
  std::int32_t a;
  std::int32_t b;

  auto operator<=>(const Edge&) const = default;
};

/// Symmetric CSR adjacency with weights 1/sqrt(deg(a) deg(b)). Parallel edges
/// are kept as separate entries and each counts toward the degree, so the
/// matrix equals D^{-1/2} A D^{-1/2} for the multigraph adjacency A.
class CsrGraph {
 public:
  CsrGraph() = default;
  static CsrGraph from_edges(const NodeLayout& layout, const std::vector<Edge>& edges);

  const NodeLayout& layout() const { return layout_; }
  std::int64_t num_nodes() const { return layout_.num_nodes(); }
  std::int64_t nnz() const { return static_cast<std::int64_t>(cols_.size()); }
  std::int64_t degree(std::int64_t node) const { return row_ptr_[node + 1] - row_ptr_[node]; }
  NodeKind kind(std::int64_t node) const { return layout_.kind(node); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& cols() const { return cols_; }
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const CsrGraph&) const = default;

 private:
  NodeLayout layout_;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> cols_;
  std::vector<double> weights_;
};

/// Users then items, one symmetric edge per train pair.
CsrGraph build_base_graph(const data::InteractionDataset& ds);

enum class AugmentOp { replace, add };

const char* to_string(AugmentOp op);

struct AugmentationConfig {
  double p_replace = 0.1;
  double p_add = 0.1;
  std::uint64_t seed = 0;

  double probability(AugmentOp op) const { return op == AugmentOp::replace ? p_replace : p_add; }
};

/// One round of virtual-neighbour augmentation.
///
/// The user pass samples N_u^aug from each user's train neighbours and emits
/// (u, item_code(h, c_i^h)) for every sampled item and level; the item pass
/// mirrors it with (user_code(h, c_u^h), i). Under `replace` an original (u, i)
/// edge is dropped when either pass sampled it; under `add` all originals stay.
struct AugmentedEdges {
  AugmentOp op = AugmentOp::add;
  NodeLayout layout;
  std::vector<std::vector<std::int32_t>> user_sampled;  // N_u^aug, sorted
  std::vector<std::vector<std::int32_t>> item_sampled;  // N_i^aug, sorted
  std::vector<Edge> user_pass;  // E^r_u / E^a_u over all users
  std::vector<Edge> item_pass;  // item-side counterpart
  std::vector<Edge> merged;     // final edge set of the augmented graph
};

AugmentedEdges build_augmented_edges(const data::InteractionDataset& ds, const CodeAssignment& codes,
                                     const AugmentationConfig& cfg, AugmentOp op, std::uint64_t round_seed);

struct AugmentedGraphPair {
  CsrGraph graph1;
  CsrGraph graph2;
  AugmentOp op1 = AugmentOp::add;
  AugmentOp op2 = AugmentOp::add;
  int epoch = 0;
};

/// Draws both operators uniformly from {replace, add} and runs two independent
/// augmentation rounds. Deterministic in (cfg.seed, epoch).
AugmentedGraphPair build_augmented_pair(const data::InteractionDataset& ds, const CodeAssignment& codes,
                                        const AugmentationConfig& cfg, int epoch);

/// Edge-list dump: `src<TAB>dst<TAB>weight<TAB>srckind-dstkind`, one line per
/// directed CSR entry.
void write_edge_tsv(const CsrGraph& g, std::ostream& out);

}  // namespace cogcl::graph
