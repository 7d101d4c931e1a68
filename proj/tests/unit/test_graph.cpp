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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogcl/graph.hpp"
#include "support/fixtures.hpp"

using namespace cogcl;
using namespace cogcl::graph;

namespace {

double weight(const CsrGraph& g, std::int64_t a, std::int64_t b) {
  for (auto k = g.row_ptr()[a]; k < g.row_ptr()[a + 1]; ++k)
    if (g.cols()[static_cast<std::size_t>(k)] == b) return g.weights()[static_cast<std::size_t>(k)];
  return 0.0;
}

CodeAssignment fixed_codes(std::int32_t users, std::int32_t items, int H, int K) {
  CodeAssignment c;
  c.levels = H;
  c.codebook_size = K;
  c.user_codes = IndexMat(users, H);
  c.item_codes = IndexMat(items, H);
  for (std::int32_t u = 0; u < users; ++u)
    for (int h = 0; h < H; ++h) c.user_codes(u, h) = (u + h) % K;
  for (std::int32_t i = 0; i < items; ++i)
    for (int h = 0; h < H; ++h) c.item_codes(i, h) = (2 * i + h) % K;
  return c;
}

std::vector<Edge> sorted(std::vector<Edge> e) {
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST_CASE("base graph weights follow symmetric degree normalization") {
  const auto one = build_base_graph(testing::make_dataset(1, 1, {{0, 0}}));
  CHECK(weight(one, 0, 1) == doctest::Approx(1.0));
  CHECK(weight(one, 1, 0) == doctest::Approx(1.0));

  const auto star = build_base_graph(testing::make_dataset(1, 2, {{0, 0}, {0, 1}}));
  CHECK(weight(star, 0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(weight(star, 2, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));

  std::vector<data::Pair> full;
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < 3; ++i) full.push_back({u, i});
  const auto k33 = build_base_graph(testing::make_dataset(3, 3, full));
  CHECK(k33.nnz() == 18);
  for (double w : k33.weights()) CHECK(w == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("node layout and kinds") {
  NodeLayout L{2, 3, 2, 4};
  CHECK(L.num_nodes() == 2 + 3 + 16);
  CHECK(L.kind(1) == NodeKind::user);
  CHECK(L.kind(2) == NodeKind::item);
  CHECK(L.kind(L.user_code(1, 3)) == NodeKind::user_code);
  CHECK(L.kind(L.item_code(0, 0)) == NodeKind::item_code);
  CHECK(L.item_code(1, 3) == L.num_nodes() - 1);
}

TEST_CASE("from_edges rejects self-loops and out-of-range endpoints") {
  NodeLayout L{1, 1, 0, 0};
  CHECK_THROWS_AS(CsrGraph::from_edges(L, {{0, 0}}), ShapeError);
  CHECK_THROWS_AS(CsrGraph::from_edges(L, {{0, 5}}), ShapeError);
}

TEST_CASE("replace and add operators on a single user") {
  const auto ds = testing::make_dataset(1, 2, {{0, 0}, {0, 1}});
  auto codes = fixed_codes(1, 2, 2, 4);
  AugmentationConfig cfg;
  cfg.p_replace = cfg.p_add = 0.5;
  // Find a round where the user pass samples exactly {i1} and the item pass samples nothing.
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto r = build_augmented_edges(ds, codes, cfg, AugmentOp::replace, seed);
    if (r.user_sampled[0] != std::vector<std::int32_t>{1} || !r.item_sampled[0].empty() || !r.item_sampled[1].empty())
      continue;
    const auto& L = r.layout;
    const std::int32_t c1 = codes.item_codes(1, 0), c2 = codes.item_codes(1, 1);
    CHECK(sorted(r.merged) == sorted({{0, L.item(0)}, {0, L.item_code(0, c1)}, {0, L.item_code(1, c2)}}));
    const auto a = build_augmented_edges(ds, codes, cfg, AugmentOp::add, seed);
    REQUIRE(a.user_sampled[0] == std::vector<std::int32_t>{1});
    REQUIRE(a.item_sampled[0].empty());
    REQUIRE(a.item_sampled[1].empty());
    CHECK(sorted(a.merged) ==
          sorted({{0, L.item(0)}, {0, L.item(1)}, {0, L.item_code(0, c1)}, {0, L.item_code(1, c2)}}));
    return;
  }
  FAIL("no round sampled exactly the second item");
}

TEST_CASE("p = 0 keeps exactly the base edges under both operators") {
  const auto ds = testing::random_dataset(8, 11, 0.3, 2, 0.0, 0.0);
  const auto codes = fixed_codes(8, 11, 3, 5);
  AugmentationConfig cfg;
  cfg.p_replace = cfg.p_add = 0.0;
  std::vector<Edge> base;
  for (const auto& [u, i] : ds.train) base.push_back({u, 8 + i});
  for (auto op : {AugmentOp::replace, AugmentOp::add}) {
    const auto e = build_augmented_edges(ds, codes, cfg, op, 9);
    CHECK(sorted(e.merged) == sorted(base));
  }
  const auto pair = build_augmented_pair(ds, codes, cfg, 1);
  const auto bg = build_base_graph(ds);
  for (const auto* g : {&pair.graph1, &pair.graph2}) {
    for (std::int64_t v = 0; v < g->num_nodes(); ++v)
      CHECK(g->degree(v) == (v < bg.num_nodes() ? bg.degree(v) : 0));
    CHECK(std::equal(bg.weights().begin(), bg.weights().end(), g->weights().begin()));
  }
}

TEST_CASE("augmented pair is deterministic in seed and epoch") {
  const auto ds = testing::random_dataset(10, 12, 0.3, 3, 0.0, 0.0);
  const auto codes = fixed_codes(10, 12, 2, 4);
  AugmentationConfig cfg;
  cfg.seed = 17;
  const auto a = build_augmented_pair(ds, codes, cfg, 4);
  const auto b = build_augmented_pair(ds, codes, cfg, 4);
  CHECK(a.graph1 == b.graph1);
  CHECK(a.graph2 == b.graph2);
  CHECK(a.op1 == b.op1);
  const auto c = build_augmented_pair(ds, codes, cfg, 5);
  CHECK(!(c.graph1 == a.graph1 && c.graph2 == a.graph2));
}

TEST_CASE("full sampling under add gives degree |N_u| (1 + H)") {
  std::vector<data::Pair> train;
  for (int i = 0; i < 10; ++i) train.push_back({0, i});
  const auto ds = testing::make_dataset(1, 10, train);
  const auto codes = fixed_codes(1, 10, 4, 8);
  AugmentationConfig cfg;
  cfg.p_add = 1.0;
  const auto e = build_augmented_edges(ds, codes, cfg, AugmentOp::add, 1);
  std::int64_t user_edges = 0;
  for (const auto& ed : e.user_pass) user_edges += ed.a == 0;
  CHECK(user_edges == 50);
  const auto g = CsrGraph::from_edges(e.layout, e.user_pass);
  CHECK(g.degree(0) == 50);
}

TEST_CASE("invalid probabilities are usage errors") {
  const auto ds = testing::make_dataset(1, 1, {{0, 0}});
  AugmentationConfig cfg;
  cfg.p_replace = 1.5;
  CHECK_THROWS_AS(build_augmented_edges(ds, fixed_codes(1, 1, 1, 2), cfg, AugmentOp::replace, 0), UsageError);
}

TEST_CASE("edge dump writes one line per directed entry") {
  const auto g = build_base_graph(testing::make_dataset(1, 2, {{0, 0}, {0, 1}}));
  std::ostringstream out;
  write_edge_tsv(g, out);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.find("user-item") != std::string::npos);
}
