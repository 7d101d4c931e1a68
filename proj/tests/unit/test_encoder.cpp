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

#include "cogcl/encoder.hpp"
#include "cogcl/trainer.hpp"
#include "support/fixtures.hpp"

using namespace cogcl;
using namespace cogcl::encoder;
using compute::ParameterStore;
using compute::Tape;
using compute::Var;

namespace {

Mat<double> random_mat(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat<double> m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
  return m;
}

/// Dense normalized adjacency built from scratch.
Mat<double> dense_adjacency(const data::InteractionDataset& ds) {
  const auto n = ds.num_users + ds.num_items;
  Mat<double> a = Mat<double>::Zero(n, n);
  for (const auto& [u, i] : ds.train) a(u, ds.num_users + i) = a(ds.num_users + i, u) = 1.0;
  const Eigen::VectorXd d = a.rowwise().sum();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      if (a(r, c) != 0) a(r, c) /= std::sqrt(d(r) * d(c));
  return a;
}

}  // namespace

TEST_CASE("one layer on a single edge swaps the rows") {
  const auto g = graph::build_base_graph(testing::make_dataset(1, 1, {{0, 0}}));
  Mat<double> x(2, 2);
  x << 1, 0, 0, 1;
  Mat<double> want(2, 2);
  want << 0, 1, 1, 0;
  CHECK(encode_value(g, x, {1, 2, 0.0}).isApprox(want));
}

TEST_CASE("empty graph gives zeros because layer 0 is skipped") {
  const auto g = graph::CsrGraph::from_edges({2, 3, 0, 0}, {});
  CHECK(encode_value(g, random_mat(5, 4, 1), {3, 4, 0.0}).isZero(0.0));
}

TEST_CASE("mean readout matches a dense oracle") {
  const auto ds = testing::make_dataset(1, 2, {{0, 0}, {0, 1}});
  const auto a = dense_adjacency(ds);
  const Mat<double> x = Mat<double>::Identity(3, 3);
  const Mat<double> want = (a * x + a * a * x) / 2.0;
  CHECK((encode_value(graph::build_base_graph(ds), x, {2, 3, 0.0}) - want).cwiseAbs().maxCoeff() < 1e-12);

  const auto big = testing::random_dataset(7, 9, 0.4, 5);
  const auto ab = dense_adjacency(big);
  const auto xb = random_mat(16, 4, 2);
  const Mat<double> wb = (ab * xb + ab * ab * xb + ab * ab * ab * xb) / 3.0;
  CHECK((encode_value(graph::build_base_graph(big), xb, {3, 4, 0.0}) - wb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("encode in eval mode equals encode_value and is repeatable") {
  const auto ds = testing::random_dataset(5, 6, 0.5, 7);
  const auto g = graph::build_base_graph(ds);
  const auto x = random_mat(11, 3, 4);
  const EncoderConfig cfg{3, 3, 0.5};
  Tape<double> tape;
  const Var v = tape.constant(x);
  const auto a = tape.value(encode(tape, g, v, cfg, 1, false));
  const auto b = tape.value(encode(tape, g, v, cfg, 2, false));
  CHECK(a == b);
  CHECK(a.isApprox(encode_value(g, x, {3, 3, 0.0})));
  CHECK(tape.value(encode(tape, g, v, cfg, 1, true)) != a);
}

TEST_CASE("encoder gradient passes a finite-difference check") {
  const auto ds = testing::random_dataset(4, 5, 0.5, 9);
  const auto g = graph::build_base_graph(ds);
  ParameterStore<double> store;
  store.add("x", random_mat(9, 3, 3));
  const Mat<double> w = random_mat(9, 3, 4);
  const auto r = compute::grad_check(
      store,
      [&](ParameterStore<double>& s, bool with_grad) {
        Tape<double> tape;
        const Var y = encode(tape, g, tape.parameter(s, "x"), {3, 3, 0.3}, 11, true);
        const Var out =
            tape.record("dot", Mat<double>::Constant(1, 1, tape.value(y).cwiseProduct(w).sum()), {y},
                        [y, w](Tape<double>& t, Var self) { t.grad(y) += t.grad(self)(0, 0) * w; });
        if (with_grad) tape.backward(out);
        return tape.scalar(out);
      },
      "x", 27, 1);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("augmented views coincide with the base view when nothing is augmented") {
  const auto ds = testing::random_dataset(6, 8, 0.4, 2, 0.0, 0.0);
  trainer::TrainConfig cfg;
  cfg.embed_dim = 8;
  cfg.levels = 2;
  cfg.codebook_size = 4;
  cfg.p_replace = cfg.p_add = 0.0;
  cfg.dropout_rate = 0.0;
  const auto base = graph::build_base_graph(ds);
  auto fstore = trainer::init_parameters(ds, cfg);
  const auto art = trainer::prepare_epoch(fstore, ds, base, cfg, 1);
  auto store = fstore.cast<double>();
  Tape<double> tape;
  const auto v = encode_all_views(tape, base, &art.pair, store, cfg.encoder(), {1, 2, 3}, true);
  const auto n = ds.num_users + ds.num_items;
  const Mat<double> b = tape.value(v.base);
  CHECK((tape.value(*v.aug1).topRows(n) - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((tape.value(*v.aug2).topRows(n) - b).cwiseAbs().maxCoeff() < 1e-12);

  cfg.dropout_rate = 0.2;
  Tape<double> t2;
  const auto d = encode_all_views(t2, base, &art.pair, store, cfg.encoder(), {1, 2, 3}, true);
  CHECK(t2.value(*d.aug1) != t2.value(*d.aug2));
  const auto e1 = encode_all_views(t2, base, &art.pair, store, cfg.encoder(), {1, 2, 3}, false);
  const auto e2 = encode_all_views(t2, base, &art.pair, store, cfg.encoder(), {4, 5, 6}, false);
  CHECK(t2.value(e1.base) == t2.value(e2.base));
  CHECK(t2.value(*e1.aug1) == t2.value(*e2.aug1));
}

TEST_CASE("baseline views have no augmented branch") {
  const auto ds = testing::random_dataset(3, 4, 0.5, 1);
  trainer::TrainConfig cfg;
  cfg.mode = trainer::Mode::lightgcn_baseline;
  cfg.embed_dim = 4;
  auto store = trainer::init_parameters(ds, cfg).cast<double>();
  Tape<double> tape;
  const auto v = encode_all_views(tape, graph::build_base_graph(ds), nullptr, store, cfg.encoder(), {}, true);
  CHECK(!v.aug1.has_value());
  CHECK(tape.value(v.base).rows() == 7);
}
