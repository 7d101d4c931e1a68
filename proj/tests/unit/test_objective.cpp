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

#include <cmath>

#include "cogcl/objective.hpp"
#include "cogcl/trainer.hpp"
#include "support/fixtures.hpp"

using namespace cogcl;
using namespace cogcl::objective;
using compute::GradStop;
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

double cosine(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

/// -log softmax over an explicit pool, written out term by term.
double nce_oracle(const Mat<double>& a, const Mat<double>& pool, double tau) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < pool.rows(); ++j) z += std::exp(cosine(a.row(r), pool.row(j)) / tau);
    total += -(cosine(a.row(r), pool.row(r)) / tau - std::log(z));
  }
  return total / static_cast<double>(a.rows());
}

struct Toy {
  data::InteractionDataset ds = testing::random_dataset(6, 9, 0.35, 4);
  trainer::TrainConfig cfg;
  graph::CsrGraph base;
  trainer::EpochArtifacts art;
  TrainBatch batch;
  ParameterStore<double> store;

  Toy() {
    cfg.embed_dim = 8;
    cfg.levels = 2;
    cfg.codebook_size = 4;
    cfg.p_replace = cfg.p_add = 0.3;
    cfg.dropout_rate = 0.0;
    base = graph::build_base_graph(ds);
    auto f = trainer::init_parameters(ds, cfg);
    art = trainer::prepare_epoch(f, ds, base, cfg, 1);
    Rng rng(1);
    batch = BatchSampler(ds).make_batch(std::span<const data::Pair>(ds.train).first(8), &art.index, rng);
    store = f.cast<double>();
  }

  LossBreakdown breakdown(const LossWeights& w) {
    Tape<double> tape;
    const auto views = encoder::encode_all_views(tape, base, &art.pair, store, cfg.encoder(), {1, 2, 3}, true);
    return total_loss(tape, views, batch, ds.num_users, store, w, cfg.quantizer()).second;
  }
};

}  // namespace

TEST_CASE("info_nce with a single anchor is zero") {
  Tape<double> tape;
  const Var a = tape.constant(random_mat(1, 4, 1));
  CHECK(tape.scalar(info_nce(tape, a, tape.constant(random_mat(1, 4, 2)), 0.2)) == doctest::Approx(0.0));
}

TEST_CASE("info_nce matches a log-sum-exp oracle") {
  const auto a = random_mat(2, 3, 3), p = random_mat(2, 3, 4), n = random_mat(3, 3, 5);
  Tape<double> tape;
  CHECK(tape.scalar(info_nce(tape, tape.constant(a), tape.constant(p), 0.2)) == doctest::Approx(nce_oracle(a, p, 0.2)));
  Mat<double> pool(5, 3);
  pool << p, n;
  CHECK(tape.scalar(info_nce(tape, tape.constant(a), tape.constant(p), tape.constant(n), 0.2)) ==
        doctest::Approx(nce_oracle(a, pool, 0.2)));
}

TEST_CASE("info_nce is scale invariant and temperature sensitive") {
  const auto a = random_mat(5, 4, 6), p = random_mat(5, 4, 7);
  Tape<double> tape;
  const double base = tape.scalar(info_nce(tape, tape.constant(a), tape.constant(p), 0.2));
  const Mat<double> a3 = 3.0 * a, p7 = 0.7 * p;
  CHECK(tape.scalar(info_nce(tape, tape.constant(a3), tape.constant(p7), 0.2)) == doctest::Approx(base).epsilon(1e-6));
  CHECK(tape.scalar(info_nce(tape, tape.constant(a), tape.constant(p), 0.4)) != doctest::Approx(base));
}

TEST_CASE("info_nce grad-stop zeroes the designated similarity entries") {
  const auto a = random_mat(4, 3, 8), p = random_mat(4, 3, 9);
  for (auto stop : {GradStop::no_alignment, GradStop::no_uniformity}) {
    Tape<double> tape;
    ParameterStore<double> store;
    store.add("a", a);
    Var sims;
    const Var l = info_nce(tape, tape.parameter(store, "a"), tape.constant(p), 0.2, stop, &sims);
    tape.backward(l);
    const Mat<double> g = tape.grad(sims);
    Mat<double> off = g;
    off.diagonal().setZero();
    if (stop == GradStop::no_alignment) {
      CHECK(g.diagonal().isZero(0.0));
      CHECK(!off.isZero());
    } else {
      CHECK(off.isZero(0.0));
      CHECK(!g.diagonal().isZero());
    }
  }
}

TEST_CASE("contrastive terms vanish for a single-entity batch") {
  Toy t;
  Rng rng(2);
  t.batch = BatchSampler(t.ds).make_batch(std::span<const data::Pair>(t.ds.train).first(1), &t.art.index, rng);
  Tape<double> tape;
  const auto views = encoder::encode_all_views(tape, t.base, &t.art.pair, t.store, t.cfg.encoder(), {1, 2, 3}, true);
  CHECK(tape.scalar(l_aug(tape, views, t.batch, t.ds.num_users, 0.2, GradStop::none)) == doctest::Approx(0.0));
  CHECK(tape.scalar(l_sim(tape, views, t.batch, t.ds.num_users, 0.2, GradStop::none)) == doctest::Approx(0.0));
}

TEST_CASE("l_aug and l_sim match oracles built from the view matrices") {
  Toy t;
  Tape<double> tape;
  const auto views = encoder::encode_all_views(tape, t.base, &t.art.pair, t.store, t.cfg.encoder(), {1, 2, 3}, true);
  const Mat<double> z1 = tape.value(*views.aug1), z2 = tape.value(*views.aug2), zb = tape.value(views.base);
  const auto rows = [](const Mat<double>& m, const std::vector<std::int32_t>& idx, std::int32_t off) {
    Mat<double> out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(idx[k] + off);
    return out;
  };
  const auto nu = t.ds.num_users;
  double want_aug = 0.0, want_sim = 0.0;
  for (const auto& [ids, partners, off] :
       {std::tuple{t.batch.cl_users, t.batch.user_partners, 0}, std::tuple{t.batch.cl_items, t.batch.item_partners, nu}}) {
    const auto a = rows(z1, ids, off), b = rows(z2, ids, off), p = rows(zb, partners, off);
    want_aug += nce_oracle(a, b, 0.2) + nce_oracle(b, a, 0.2);
    want_sim += nce_oracle(a, p, 0.2) + nce_oracle(b, p, 0.2);
  }
  CHECK(tape.scalar(l_aug(tape, views, t.batch, nu, 0.2, GradStop::none)) == doctest::Approx(want_aug));
  CHECK(tape.scalar(l_sim(tape, views, t.batch, nu, 0.2, GradStop::none)) == doctest::Approx(want_sim));
}

TEST_CASE("bpr_loss matches a hand computation") {
  Mat<double> base(4, 2);
  base << 1, 0, 0, 1, 2, 0, 0, 3;  // users 0-1, items 0-1
  TrainBatch b;
  b.users = {0, 1};
  b.pos_items = {0, 1};
  b.neg_items = {1, 0};
  Tape<double> tape;
  const double want = (std::log1p(std::exp(-2.0)) + std::log1p(std::exp(-3.0))) / 2.0;
  CHECK(tape.scalar(bpr_loss(tape, tape.constant(base), b, 2)) == doctest::Approx(want));
}

TEST_CASE("zero auxiliary weights reduce to BPR and the total is additive") {
  Toy t;
  const auto plain = t.breakdown({0.0, 0.0, 0.0});
  CHECK(plain.total == doctest::Approx(plain.bpr));
  CHECK(plain.code == 0.0);
  const auto all = t.breakdown({1.0, 1.0, 1.0});
  CHECK(all.bpr == doctest::Approx(plain.bpr));
  CHECK(all.total == doctest::Approx(all.bpr + all.code + all.aug + all.sim));
  const auto mixed = t.breakdown({0.5, 0.2, 0.05});
  CHECK(mixed.total == doctest::Approx(mixed.bpr + 0.5 * mixed.code + 0.2 * mixed.aug + 0.05 * mixed.sim));
}

TEST_CASE("total loss gradient passes a finite-difference check") {
  Toy t;
  LossWeights w{1.0, 1.0, 1.0};
  for (const char* entry : {encoder::kEmbedding, encoder::kCodeEmbedding}) {
    const auto r = compute::grad_check(
        t.store,
        [&](ParameterStore<double>& s, bool g) {
          Tape<double> tape;
          const auto views = encoder::encode_all_views(tape, t.base, &t.art.pair, s, t.cfg.encoder(), {1, 2, 3}, true);
          const auto [l, br] = total_loss(tape, views, t.batch, t.ds.num_users, s, w, t.cfg.quantizer());
          if (g) tape.backward(l);
          return br.total;
        },
        entry, 30, 2);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("alignment and uniformity closed forms") {
  const std::vector<std::pair<std::int32_t, std::int32_t>> self = {{0, 0}, {1, 1}, {2, 2}};
  const Mat<double> same = Mat<double>::Ones(3, 4);
  auto au = alignment_uniformity<double>(same, self, 0.2);
  CHECK(au.alignment == doctest::Approx(-5.0));
  CHECK(au.uniformity == doctest::Approx(5.0));
  const Mat<double> eye = Mat<double>::Identity(3, 3);
  au = alignment_uniformity<double>(eye, self, 0.2);
  CHECK(au.alignment == doctest::Approx(-5.0));
  CHECK(au.uniformity == doctest::Approx(0.0));
}

TEST_CASE("loss weights validation") {
  CHECK_THROWS_AS((LossWeights{-1.0}.validate()), UsageError);
  LossWeights w;
  w.tau = 0.0;
  CHECK_THROWS_AS(w.validate(), UsageError);
  CHECK_NOTHROW(LossWeights{}.validate());
}
